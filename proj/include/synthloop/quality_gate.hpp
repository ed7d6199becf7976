#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthloop/classifier.hpp"
#include "synthloop/dataset.hpp"
#include "synthloop/generation.hpp"
#include "synthloop/prompting.hpp"

namespace synthloop {

struct GateConfig {
    double threshold = 0.65;           // minimum probe accuracy on real data
    double duplicate_threshold = 0.5;  // duplicate fraction at or above this fails
    int max_rounds = 3;
    ClassifierConfig probe;            // probe training protocol
    std::uint64_t probe_seed = 0;

    void validate() const;
};

enum class Verdict { pass, fail_quality, fail_duplicates, fail_parse_empty };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view text);

struct ProbeScore {
    double accuracy = 0.0;
    double f1 = 0.0;
};

/// Trains the probe classifier on `synthetic` alone and scores it on the
/// real holdout. Normalization comes from the holdout (real records only).
/// Returns nullopt when the synthetic set lacks a class.
std::optional<ProbeScore> probe_evaluate(std::span<const TrafficRecord> synthetic, const Dataset& real_holdout,
                                         const GateConfig& cfg);

struct QualityReport {
    int round = 1;
    double probe_accuracy = 0.0;  // 0 when no probe could be trained
    double probe_f1 = 0.0;
    bool probe_trained = false;
    double duplicate_fraction = 0.0;
    ParseDiagnostics parse;
    Verdict verdict = Verdict::fail_parse_empty;
};

// Precedence: empty parse, then quality, then duplicates.
Verdict decide_verdict(int n_parsed, const std::optional<ProbeScore>& probe, double duplicate_fraction,
                       const GateConfig& cfg);

// Gate one batch of parsed candidates. `reference` holds the records that
// count as already seen (prompt examples plus earlier rounds).
QualityReport gate_candidates(std::span<const TrafficRecord> candidates, const ParseDiagnostics& parse, int round,
                              std::span<const TrafficRecord> reference, const Dataset& real_holdout,
                              const GateConfig& cfg);

struct LoopSettings {
    std::string model_name = "gpt-3.5-turbo";
    double temperature = 1.0;
    int max_output_tokens = 4096;
    std::uint64_t seed = 0;
    std::string self_evolution_text{kSelfEvolutionText};
};

struct LoopResult {
    std::vector<QualityReport> reports;  // one per round
    std::optional<std::vector<TrafficRecord>> accepted;
    std::vector<ConversationTurn> transcript;
    int best_round = 1;
    bool stopped_on_decline = false;

    const QualityReport& final_report() const { return reports.back(); }
    bool passed() const { return accepted.has_value(); }
};

/// Sends the bundle, gates the reply, and on failure appends the reply plus a
/// self-evolution request and retries, for at most cfg.max_rounds rounds.
/// Stops early on a pass, or once probe accuracy has fallen two rounds in a
/// row. Failed rounds' records are discarded. A transport error is retried
/// once per round before it propagates.
LoopResult run_self_evolution_loop(const PromptBundle& bundle, const GenerationBackend& backend,
                                   const FeatureSchema& schema, const Dataset& real_holdout, const GateConfig& cfg,
                                   const LoopSettings& settings = {});

nlohmann::json to_json(const QualityReport& report);
nlohmann::json to_json(const LoopResult& result);

}  // namespace synthloop
