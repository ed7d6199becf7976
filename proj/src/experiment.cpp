#include "synthloop/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <set>
#include <thread>

#include "synthloop/error.hpp"
#include "synthloop/kernels.hpp"
#include "synthloop/random.hpp"

namespace synthloop {

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::real_only: return "real_only";
        case Regime::synthetic_only: return "synthetic_only";
        case Regime::mixed: return "mixed";
    }
    return "real_only";
}

Regime regime_from_string(std::string_view text) {
    for (auto r : {Regime::real_only, Regime::synthetic_only, Regime::mixed}) {
        if (to_string(r) == text) return r;
    }
    throw ConfigError("unknown regime \"" + std::string(text) + "\"");
}

std::string_view to_string(CellStatus s) {
    switch (s) {
        case CellStatus::ok: return "ok";
        case CellStatus::gate_failed: return "gate_failed";
        case CellStatus::insufficient_synthetic: return "insufficient_synthetic";
        case CellStatus::backend_error: return "backend_error";
    }
    return "ok";
}

CellStatus cell_status_from_string(std::string_view text) {
    for (auto s : {CellStatus::ok, CellStatus::gate_failed, CellStatus::insufficient_synthetic,
                   CellStatus::backend_error}) {
        if (to_string(s) == text) return s;
    }
    throw ParseError("unknown cell status \"" + std::string(text) + "\"");
}

void ExperimentPlan::validate() const {
    if (target_attack.empty()) throw ValidationError("plan.target_attack must be set");
    if (synthetic_counts.empty()) throw ValidationError("plan.synthetic_counts must be non-empty");
    if (!std::is_sorted(synthetic_counts.begin(), synthetic_counts.end()) ||
        std::adjacent_find(synthetic_counts.begin(), synthetic_counts.end()) != synthetic_counts.end()) {
        throw ValidationError("plan.synthetic_counts must be strictly ascending");
    }
    if (synthetic_counts.front() < 0) throw ValidationError("plan.synthetic_counts must be >= 0");
    if (regimes.empty()) throw ValidationError("plan.regimes must be non-empty");
    if (std::set<Regime>(regimes.begin(), regimes.end()).size() != regimes.size()) {
        throw ValidationError("plan.regimes must not repeat");
    }
    if (n_seeds < 1) throw ValidationError("plan.n_seeds must be >= 1");
    if (jobs < 1) throw ValidationError("plan.jobs must be >= 1");
    prompt.validate();
    gate.validate();
}

std::vector<CellKey> plan_cells(const ExperimentPlan& plan) {
    std::vector<CellKey> cells;
    for (auto regime : plan.regimes) {
        for (int count : plan.synthetic_counts) {
            if (regime == Regime::real_only && count != 0) continue;
            if (regime == Regime::synthetic_only && count == 0) continue;
            for (int s = 0; s < plan.n_seeds; ++s) {
                cells.push_back({regime, count, plan.base_seed + static_cast<std::uint64_t>(s)});
            }
        }
        // real_only always runs, even when 0 is not among the counts.
        if (regime == Regime::real_only && plan.synthetic_counts.front() != 0) {
            for (int s = 0; s < plan.n_seeds; ++s) {
                cells.push_back({regime, 0, plan.base_seed + static_cast<std::uint64_t>(s)});
            }
        }
    }
    return cells;
}

CellSeeds cell_seeds(const ExperimentPlan& plan, const CellKey& key) {
    const auto count = static_cast<std::uint64_t>(key.count);
    return {derive_seed(plan.classifier.init_seed, {key.seed}), derive_seed(plan.backend.seed, {count, key.seed}),
            derive_seed(plan.gate.probe_seed, {count, key.seed})};
}

namespace {

// Balanced pick of `count` records (benign gets the odd one), acceptance order kept.
std::optional<std::vector<TrafficRecord>> take_balanced(const std::vector<TrafficRecord>& records, int count) {
    const int want_attack = count / 2;
    const int want_benign = count - want_attack;
    int attack = 0, benign = 0;
    std::vector<TrafficRecord> out;
    for (const auto& r : records) {
        int& have = r.label.is_attack() ? attack : benign;
        const int want = r.label.is_attack() ? want_attack : want_benign;
        if (have < want) {
            out.push_back(r);
            ++have;
        }
    }
    if (attack < want_attack || benign < want_benign) return std::nullopt;
    return out;
}

}  // namespace

CellResult run_cell(const ExperimentPlan& plan, const ExperimentInputs& inputs, const GenerationBackend& backend,
                    const CellKey& key) {
    CellResult cell;
    cell.key = key;
    if (key.count < 0) throw ValidationError("cell count must be >= 0");
    const auto seeds = cell_seeds(plan, key);
    const FeatureSchema& schema = inputs.train.schema();
    const NormStats norm = fit_norm_stats(inputs.train);

    std::vector<TrafficRecord> training = inputs.train.records();
    const bool needs_synthetic = key.regime != Regime::real_only && key.count > 0;
    if (key.regime == Regime::synthetic_only) training.clear();

    if (needs_synthetic) {
        PromptConfig prompt = plan.prompt;
        prompt.n_requested = (key.count + 1) / 2;
        const auto bundle = build_generation_prompt(prompt, schema, inputs.train, plan.target_attack);
        GateConfig gate = plan.gate;
        gate.probe = plan.classifier;
        gate.probe_seed = seeds.probe;
        LoopSettings settings{plan.backend.model, plan.backend.temperature, plan.backend.max_tokens, seeds.backend,
                              plan.prompt.self_evolution_text};
        LoopResult loop;
        try {
            loop = run_self_evolution_loop(bundle, backend, schema, inputs.train, gate, settings);
        } catch (const BackendError& e) {
            cell.status = CellStatus::backend_error;
            cell.error = e.what();
            return cell;
        }
        cell.rounds_used = static_cast<int>(loop.reports.size());
        for (const auto& r : loop.reports) cell.round_verdicts.push_back(r.verdict);
        cell.verdict = loop.final_report().verdict;
        if (!loop.passed()) {
            cell.status = CellStatus::gate_failed;
            return cell;
        }
        auto picked = take_balanced(*loop.accepted, key.count);
        if (!picked) {
            cell.status = CellStatus::insufficient_synthetic;
            return cell;
        }
        training.insert(training.end(), picked->begin(), picked->end());
    }

    ClassifierConfig cfg = plan.classifier;
    cfg.init_seed = seeds.classifier;
    const Dataset train_set(schema, std::move(training));
    const auto model = train(cfg, train_set, norm);
    cell.metrics = evaluate(model.params, inputs.test, norm);
    return cell;
}

void check_disjoint(const Dataset& train, const Dataset& test) {
    std::set<std::pair<std::vector<double>, std::string>> seen;
    for (const auto& r : train.records()) seen.emplace(r.values, r.label.to_string());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& r = test.records()[i];
        if (seen.count({r.values, r.label.to_string()})) {
            throw DataError("test record " + std::to_string(i) + " also appears in the training data");
        }
    }
}

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ExperimentResult run_sweep(const ExperimentPlan& plan, const ExperimentInputs& inputs,
                           const GenerationBackend& backend) {
    plan.validate();
    check_disjoint(inputs.train, inputs.test);

    ExperimentResult result;
    result.meta.backend_kind = backend.id();
    result.meta.model_name = plan.backend.model;
    result.meta.target_attack = plan.target_attack;
    result.meta.kernel_isa = std::string(kernels::to_string(kernels::active_isa()));
    result.meta.started_at = utc_now();

    const auto cells = plan_cells(plan);
    result.grid.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            result.grid[i] = run_cell(plan, inputs, backend, cells[i]);
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(plan.jobs), cells.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    result.meta.finished_at = utc_now();
    return result;
}

// ---------------------------------------------------------------------------

std::size_t ExperimentResult::failed_cells() const {
    return static_cast<std::size_t>(
        std::count_if(grid.begin(), grid.end(), [](const CellResult& c) { return c.status != CellStatus::ok; }));
}

std::vector<SummaryRow> ExperimentResult::summary() const {
    std::vector<std::pair<Regime, int>> order;
    std::map<std::pair<Regime, int>, std::vector<const EvalMetrics*>> groups;
    for (const auto& c : grid) {
        const auto key = std::make_pair(c.key.regime, c.key.count);
        if (!groups.count(key)) order.push_back(key);
        auto& g = groups[key];
        if (c.metrics) g.push_back(&*c.metrics);
    }

    auto mean_std = [](const std::vector<double>& xs) -> std::pair<double, double> {
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        if (xs.size() < 2) return {m, 0.0};
        double ss = 0.0;
        for (double x : xs) ss += (x - m) * (x - m);
        return {m, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
    };

    std::vector<SummaryRow> rows;
    for (const auto& key : order) {
        SummaryRow row;
        row.regime = key.first;
        row.count = key.second;
        const auto& ms = groups[key];
        row.n_ok = static_cast<int>(ms.size());
        if (!ms.empty()) {
            std::vector<double> acc, f1;
            for (const auto* m : ms) {
                acc.push_back(m->accuracy);
                f1.push_back(m->f1);
            }
            std::tie(row.mean_accuracy, row.std_accuracy) = mean_std(acc);
            std::tie(row.mean_f1, row.std_f1) = mean_std(f1);
        }
        rows.push_back(row);
    }

    std::optional<double> baseline;
    for (const auto& r : rows) {
        if (r.regime == Regime::real_only && r.mean_accuracy) baseline = r.mean_accuracy;
    }
    for (auto& r : rows) {
        if (!baseline || !r.mean_accuracy) continue;
        r.abs_improvement = *r.mean_accuracy - *baseline;
        if (*baseline > 0.0) r.rel_improvement = *r.abs_improvement / *baseline;
    }
    return rows;
}

bool ExperimentResult::more_is_not_always_better() const {
    std::vector<std::pair<int, double>> mixed;
    for (const auto& r : summary()) {
        if (r.regime == Regime::mixed && r.mean_accuracy) mixed.emplace_back(r.count, *r.mean_accuracy);
    }
    if (mixed.size() < 3) return false;
    const auto best = std::max_element(mixed.begin(), mixed.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    return best != mixed.begin() && best != mixed.end() - 1;
}

}  // namespace synthloop
