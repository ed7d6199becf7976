#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "synthloop/classifier.hpp"
#include "synthloop/dataset.hpp"
#include "synthloop/generation.hpp"
#include "synthloop/metrics.hpp"
#include "synthloop/prompting.hpp"
#include "synthloop/quality_gate.hpp"

namespace synthloop {

enum class Regime { real_only, synthetic_only, mixed };

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view text);

struct ExperimentPlan {
    std::string target_attack = "tcp_ack_flood";
    std::vector<int> synthetic_counts{0, 20, 40, 60, 80, 100};
    std::vector<Regime> regimes{Regime::real_only, Regime::synthetic_only, Regime::mixed};
    int n_seeds = 10;
    std::uint64_t base_seed = 0;
    int jobs = 1;

    PromptConfig prompt;
    GateConfig gate;
    ClassifierConfig classifier;
    BackendConfig backend;

    void validate() const;
};

struct CellKey {
    Regime regime = Regime::real_only;
    int count = 0;
    std::uint64_t seed = 0;
    bool operator==(const CellKey&) const = default;
};

// real_only runs at count 0 only; synthetic_only skips count 0; mixed runs
// every count. Ordered by regime (plan order), count, then seed.
std::vector<CellKey> plan_cells(const ExperimentPlan& plan);

enum class CellStatus { ok, gate_failed, insufficient_synthetic, backend_error };
std::string_view to_string(CellStatus s);
CellStatus cell_status_from_string(std::string_view text);

struct CellResult {
    CellKey key;
    CellStatus status = CellStatus::ok;
    std::optional<EvalMetrics> metrics;     // absent for failed cells
    int rounds_used = 0;                    // generation rounds (0 for real_only)
    std::optional<Verdict> verdict;         // final gate verdict, synthetic regimes only
    std::vector<Verdict> round_verdicts;
    std::string error;                      // backend error text, if any
};

// Real data a sweep runs on: `train` is the scarce labeled set (also the
// prompt examples and the gate holdout), `test` is held out for evaluation.
struct ExperimentInputs {
    Dataset train;
    Dataset test;
};

// Derived per-cell seeds. Synthetic data depends on (count, seed) only, so
// synthetic_only and mixed cells at the same point see the same records.
struct CellSeeds {
    std::uint64_t classifier;
    std::uint64_t backend;
    std::uint64_t probe;
};
CellSeeds cell_seeds(const ExperimentPlan& plan, const CellKey& key);

CellResult run_cell(const ExperimentPlan& plan, const ExperimentInputs& inputs, const GenerationBackend& backend,
                    const CellKey& key);

struct SummaryRow {
    Regime regime = Regime::real_only;
    int count = 0;
    int n_ok = 0;
    std::optional<double> mean_accuracy, std_accuracy, mean_f1, std_f1;
    // Against the real_only mean accuracy; absent without a real_only baseline.
    std::optional<double> abs_improvement, rel_improvement;
};

struct RunMeta {
    std::string backend_kind;
    std::string model_name;
    std::string target_attack;
    std::string config_hash;
    std::string kernel_isa;
    std::string started_at;
    std::string finished_at;
};

struct ExperimentResult {
    RunMeta meta;
    std::vector<CellResult> grid;

    std::vector<SummaryRow> summary() const;
    // True when the best mean mixed-regime accuracy sits strictly between the
    // smallest and the largest synthetic count.
    bool more_is_not_always_better() const;
    std::size_t failed_cells() const;
};

// Every planned cell runs; failures are recorded, never thrown. Cells run on
// plan.jobs worker threads; the grid order is the plan order regardless.
ExperimentResult run_sweep(const ExperimentPlan& plan, const ExperimentInputs& inputs,
                           const GenerationBackend& backend);

// Throws DataError when a test record also appears in the training data.
void check_disjoint(const Dataset& train, const Dataset& test);

// Report file: {"meta", "grid", "summary"}.
nlohmann::json to_json(const ExperimentResult& result);
ExperimentResult experiment_result_from_json(const nlohmann::json& j);
void write_report(const ExperimentResult& result, const std::filesystem::path& path);
ExperimentResult read_report(const std::filesystem::path& path);
std::string grid_csv(const ExperimentResult& result);
void write_grid_csv(const ExperimentResult& result, const std::filesystem::path& path);
std::string summarize(const ExperimentResult& result);

}  // namespace synthloop
