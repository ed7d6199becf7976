#include "synthloop/quality_gate.hpp"

#include <algorithm>

#include "synthloop/error.hpp"
#include "synthloop/metrics.hpp"

namespace synthloop {

using nlohmann::json;

void GateConfig::validate() const {
    if (!(threshold > 0.5 && threshold < 1.0)) throw ValidationError("gate.threshold must be in (0.5, 1)");
    if (!(duplicate_threshold > 0.0 && duplicate_threshold <= 1.0)) {
        throw ValidationError("gate.duplicate_threshold must be in (0, 1]");
    }
    if (max_rounds < 1) throw ValidationError("gate.max_rounds must be >= 1");
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail_quality: return "fail_quality";
        case Verdict::fail_duplicates: return "fail_duplicates";
        case Verdict::fail_parse_empty: return "fail_parse_empty";
    }
    return "fail_parse_empty";
}

Verdict verdict_from_string(std::string_view text) {
    for (auto v : {Verdict::pass, Verdict::fail_quality, Verdict::fail_duplicates, Verdict::fail_parse_empty}) {
        if (to_string(v) == text) return v;
    }
    throw ParseError("unknown verdict \"" + std::string(text) + "\"");
}

std::optional<ProbeScore> probe_evaluate(std::span<const TrafficRecord> synthetic, const Dataset& real_holdout,
                                         const GateConfig& cfg) {
    if (real_holdout.empty() || real_holdout.benign_count() == 0 || real_holdout.attack_count() == 0) {
        throw ValidationError("gate holdout must contain both benign and attack records");
    }
    const bool has_attack = std::any_of(synthetic.begin(), synthetic.end(),
                                        [](const TrafficRecord& r) { return r.label.is_attack(); });
    const bool has_benign = std::any_of(synthetic.begin(), synthetic.end(),
                                        [](const TrafficRecord& r) { return !r.label.is_attack(); });
    if (!has_attack || !has_benign) return std::nullopt;

    const NormStats norm = fit_norm_stats(real_holdout);
    std::vector<Sample> train_samples;
    train_samples.reserve(synthetic.size());
    for (const auto& r : synthetic) {
        // Candidates are always clamped, whatever provenance the caller gave them.
        train_samples.push_back({normalize_values(r.values, norm, true), r.label.is_attack()});
    }
    ClassifierConfig probe = cfg.probe;
    probe.init_seed = cfg.probe_seed;
    const auto model = train(probe, train_samples);
    const auto m = evaluate(model.params, real_holdout, norm);
    return ProbeScore{m.accuracy, m.f1};
}

Verdict decide_verdict(int n_parsed, const std::optional<ProbeScore>& probe, double duplicate_fraction,
                       const GateConfig& cfg) {
    if (n_parsed <= 0) return Verdict::fail_parse_empty;
    if (!probe || probe->accuracy < cfg.threshold) return Verdict::fail_quality;
    if (duplicate_fraction >= cfg.duplicate_threshold) return Verdict::fail_duplicates;
    return Verdict::pass;
}

QualityReport gate_candidates(std::span<const TrafficRecord> candidates, const ParseDiagnostics& parse, int round,
                              std::span<const TrafficRecord> reference, const Dataset& real_holdout,
                              const GateConfig& cfg) {
    cfg.validate();
    QualityReport report;
    report.round = round;
    report.parse = parse;
    report.duplicate_fraction = duplicate_fraction(candidates, reference);
    std::optional<ProbeScore> probe;
    if (!candidates.empty()) probe = probe_evaluate(candidates, real_holdout, cfg);
    if (probe) {
        report.probe_trained = true;
        report.probe_accuracy = probe->accuracy;
        report.probe_f1 = probe->f1;
    }
    report.verdict = decide_verdict(static_cast<int>(candidates.size()), probe, report.duplicate_fraction, cfg);
    return report;
}

namespace {

GenerationResponse generate_with_retry(const GenerationBackend& backend, const GenerationRequest& request) {
    try {
        return backend.generate(request);
    } catch (const BackendError& e) {
        if (e.kind() != BackendErrorKind::transport) throw;
    }
    return backend.generate(request);
}

}  // namespace

LoopResult run_self_evolution_loop(const PromptBundle& bundle, const GenerationBackend& backend,
                                   const FeatureSchema& schema, const Dataset& real_holdout, const GateConfig& cfg,
                                   const LoopSettings& settings) {
    cfg.validate();
    LoopResult result;
    std::vector<std::pair<ConversationTurn, ConversationTurn>> prior;
    std::vector<TrafficRecord> seen = bundle.examples;

    for (int round = 1; round <= cfg.max_rounds; ++round) {
        GenerationRequest request;
        request.conversation = assemble_conversation(bundle, prior);
        request.model_name = settings.model_name;
        request.temperature = settings.temperature;
        request.max_output_tokens = settings.max_output_tokens;
        request.seed = settings.seed;
        request.batch_index = 0;

        const auto response = generate_with_retry(backend, request);
        auto parsed = parse_synthetic_output(response.raw_text, schema, round);
        auto report = gate_candidates(parsed.records, parsed.diagnostics, round, seen, real_holdout, cfg);
        const bool passed = report.verdict == Verdict::pass;
        result.reports.push_back(std::move(report));

        ConversationTurn reply{Role::assistant, response.raw_text.empty() ? "(empty response)" : response.raw_text};
        result.transcript = request.conversation;
        result.transcript.push_back(reply);

        if (passed) {
            result.accepted = parsed.records;
            break;
        }
        const auto n = result.reports.size();
        if (n >= 3 && result.reports[n - 1].probe_accuracy < result.reports[n - 2].probe_accuracy &&
            result.reports[n - 2].probe_accuracy < result.reports[n - 3].probe_accuracy) {
            result.stopped_on_decline = true;
            break;
        }
        seen.insert(seen.end(), parsed.records.begin(), parsed.records.end());
        prior.emplace_back(std::move(reply), build_self_evolution_turn(settings.self_evolution_text));
    }

    const auto best = std::max_element(result.reports.begin(), result.reports.end(),
                                       [](const QualityReport& a, const QualityReport& b) {
                                           return a.probe_accuracy < b.probe_accuracy;
                                       });
    result.best_round = best->round;
    if (result.passed()) result.best_round = result.final_report().round;
    return result;
}

json to_json(const QualityReport& r) {
    json rejects = json::array();
    for (const auto& rej : r.parse.rejects) {
        rejects.push_back({{"line", rej.line}, {"reason", std::string(to_string(rej.reason))}, {"detail", rej.detail}});
    }
    return {{"round", r.round},
            {"probe_accuracy", r.probe_accuracy},
            {"probe_f1", r.probe_f1},
            {"probe_trained", r.probe_trained},
            {"duplicate_fraction", r.duplicate_fraction},
            {"parse", {{"n_parsed", r.parse.n_parsed}, {"n_rejected", r.parse.n_rejected}, {"rejects", rejects}}},
            {"verdict", std::string(to_string(r.verdict))}};
}

json to_json(const LoopResult& result) {
    json reports = json::array();
    for (const auto& r : result.reports) reports.push_back(to_json(r));
    json transcript = json::array();
    for (const auto& t : result.transcript) {
        transcript.push_back({{"role", std::string(to_string(t.role))}, {"content", t.text}});
    }
    return {{"reports", reports},
            {"passed", result.passed()},
            {"n_accepted", result.accepted ? result.accepted->size() : 0},
            {"best_round", result.best_round},
            {"stopped_on_decline", result.stopped_on_decline},
            {"transcript", transcript}};
}

}  // namespace synthloop
