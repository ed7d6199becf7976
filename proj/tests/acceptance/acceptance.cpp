// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles/gradient_check.hpp"
#include "oracles/metrics_oracle.hpp"
#include "oracles/parser_fuzz.hpp"
#include "oracles/report_check.hpp"
#include "support/run.hpp"
#include "synthloop/corpus.hpp"
#include "synthloop/error.hpp"
#include "synthloop/experiment.hpp"
#include "synthloop/generation.hpp"
#include "synthloop/kernels.hpp"
#include "synthloop/metrics.hpp"
#include "synthloop/prompting.hpp"
#include "synthloop/quality_gate.hpp"

using namespace synthloop;
using nlohmann::json;

namespace {

struct Outcome {
    enum { pass, fail, skip } state = fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PromptBundle desk_bundle(const DeskCorpus& desk) {
    return build_generation_prompt({}, desk.train.schema(), desk.train, "tcp_ack_flood");
}

GenerationRequest first_request(const PromptBundle& bundle, std::uint64_t seed) {
    GenerationRequest r;
    r.conversation = assemble_conversation(bundle, {});
    r.seed = seed;
    return r;
}

Outcome gradient_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = oracle::run_gradient_check(200, 20240601);
    const double secs = seconds_since(t0);
    return verdict(s.instances >= 100 && s.max_rel_error < 1e-4 && secs < 30.0,
                   fmt("%d instances, max rel error %.3g, %d kink resamples, %.2fs", s.instances, s.max_rel_error,
                       s.kink_resamples, secs));
}

Outcome metrics_oracle() {
    std::vector<bool> truth, pred;
    double worst = 0;
    int cases = 0;
    for (std::size_t tp = 0; tp <= 5; ++tp)
        for (std::size_t fp = 0; fp <= 5; ++fp)
            for (std::size_t fn = 0; fn <= 5; ++fn)
                for (std::size_t tn = 0; tn <= 5; ++tn) {
                    if (tp + fp + fn + tn == 0) continue;
                    oracle::expand(tp, fp, fn, tn, truth, pred);
                    ConfusionMatrix cm;
                    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], pred[i]);
                    const auto got = metrics_from(cm);
                    const auto want = oracle::ref_metrics(truth, pred);
                    for (double d : {got.accuracy - want.accuracy, got.precision - want.precision,
                                     got.recall - want.recall, got.f1 - want.f1})
                        worst = std::max(worst, std::abs(d));
                    ++cases;
                }
    const double hand = metrics_from({3, 1, 2, 4}).f1;
    const double hand_err = std::abs(hand - 2 * 0.75 * 0.6 / 1.35);
    return verdict(cases == 1295 && worst <= 1e-12 && hand_err <= 1e-9,
                   fmt("%d matrices, max deviation %.3g, hand f1 %.10f", cases, worst, hand));
}

Outcome augmentation_direction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto desk = make_desk_corpus();
    ExperimentPlan plan;
    plan.synthetic_counts = {0, 80};
    plan.regimes = {Regime::real_only, Regime::mixed};
    plan.n_seeds = 10;
    const auto result = run_sweep(plan, {desk.train, desk.test}, *make_mock_good_backend());

    double real_acc = 0, real_f1 = 0, mixed_acc = 0, mixed_f1 = 0, worst_seed = 1e9;
    int n_real = 0, n_mixed = 0;
    std::vector<double> real_by_seed(10, 0.0);
    for (const auto& c : result.grid) {
        if (!c.metrics) continue;
        if (c.key.regime == Regime::real_only) {
            real_acc += c.metrics->accuracy;
            real_f1 += c.metrics->f1;
            real_by_seed[c.key.seed] = c.metrics->accuracy;
            ++n_real;
        }
    }
    for (const auto& c : result.grid) {
        if (!c.metrics || c.key.regime != Regime::mixed || c.key.count != 80) continue;
        mixed_acc += c.metrics->accuracy;
        mixed_f1 += c.metrics->f1;
        worst_seed = std::min(worst_seed, c.metrics->accuracy - real_by_seed[c.key.seed]);
        ++n_mixed;
    }
    if (n_real != 10 || n_mixed != 10) return verdict(false, fmt("%d real and %d mixed cells finished", n_real, n_mixed));
    real_acc /= 10, real_f1 /= 10, mixed_acc /= 10, mixed_f1 /= 10;
    const double secs = seconds_since(t0);
    const bool baseline_ok = real_acc >= 0.65 && real_acc <= 0.80;
    return verdict(baseline_ok && mixed_acc - real_acc >= 0.03 && mixed_f1 >= real_f1 && secs < 120.0,
                   fmt("real_only acc %.4f f1 %.4f, mixed@80 acc %.4f f1 %.4f, gain %+.4f (need >= +0.03), "
                       "worst per-seed delta %+.4f, %.2fs",
                       real_acc, real_f1, mixed_acc, mixed_f1, mixed_acc - real_acc, worst_seed, secs));
}

Outcome self_evolution_recovery() {
    const auto desk = make_desk_corpus();
    const auto bundle = desk_bundle(desk);
    GateConfig g;
    g.max_rounds = 3;
    auto bad = make_mock_bad_backend();
    int ok = 0;
    double min_gain = 1e9;
    bool deterministic = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        LoopSettings s;
        s.seed = seed;
        const auto r = run_self_evolution_loop(bundle, *bad, desk.train.schema(), desk.train, g, s);
        const auto again = run_self_evolution_loop(bundle, *bad, desk.train.schema(), desk.train, g, s);
        deterministic = deterministic && to_json(r).dump() == to_json(again).dump();
        if (r.reports.size() < 2 || r.reports.front().verdict == Verdict::pass || !r.passed()) continue;
        const double gain = r.final_report().probe_accuracy - r.reports.front().probe_accuracy;
        min_gain = std::min(min_gain, gain);
        ok += gain >= 0.10;
    }
    return verdict(ok == 10 && deterministic,
                   fmt("%d/10 seeds recover with gain >= 0.10 (smallest gain %.3f), deterministic %s", ok, min_gain,
                       deterministic ? "yes" : "no"));
}

Outcome gate_soundness() {
    const auto desk = make_desk_corpus();
    const auto bundle = desk_bundle(desk);
    auto good = make_mock_good_backend();
    int rejected = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto parsed = parse_synthetic_output(good->generate(first_request(bundle, seed)).raw_text,
                                             desk.train.schema(), 1);
        for (auto& r : parsed.records) r.label = r.label.is_attack() ? Label::benign() : Label::attack("tcp_ack_flood");
        GateConfig g;
        g.probe_seed = seed;
        const auto rep = gate_candidates(parsed.records, parsed.diagnostics, 1, desk.train.records(), desk.train, g);
        rejected += rep.verdict == Verdict::fail_quality;
    }
    std::vector<TrafficRecord> copies;
    int i = 0;
    for (auto r : desk.train.records()) {
        r.provenance = SyntheticSource{1, i++};
        copies.push_back(std::move(r));
    }
    GateConfig g;
    g.duplicate_threshold = 0.5;
    const auto dup = gate_candidates(copies, ParseDiagnostics{i, 0, {}}, 1, desk.train.records(), desk.train, g);
    return verdict(rejected >= 9 && dup.verdict == Verdict::fail_duplicates,
                   fmt("flipped labels fail_quality in %d/10 seeds; verbatim copies -> %s (duplicate fraction %.2f)",
                       rejected, std::string(to_string(dup.verdict)).c_str(), dup.duplicate_fraction));
}

Outcome parser_totality() {
    const auto desk = make_desk_corpus();
    const auto bundle = desk_bundle(desk);
    const auto text = make_mock_bad_backend()->generate(first_request(bundle, 1)).raw_text +
                      make_mock_good_backend()->generate(first_request(bundle, 1)).raw_text;
    const auto s = oracle::fuzz_parser(text, desk.train.schema(), 10000, 424242);
    return verdict(s.cases == 10000 && s.exceptions == 0 && s.imbalanced == 0,
                   fmt("%d mutated inputs, %d exceptions, %d unbalanced diagnostics", s.cases, s.exceptions,
                       s.imbalanced));
}

Outcome sweep_determinism() {
    const auto dir = support::fresh_dir("acceptance_determinism");
    std::vector<std::string> grids;
    for (const char* name : {"a.json", "b.json"}) {
        const auto r = support::run_cli("--backend mock-good --seed 11 sweep --out " + (dir / name).string());
        if (r.exit_code != 0) return verdict(false, fmt("sweep exited %d", r.exit_code));
        grids.push_back(json::parse(support::slurp(dir / name))["grid"].dump());
    }
    const auto n = json::parse(grids[0]).size();
    return verdict(grids[0] == grids[1] && n > 0,
                   fmt("%zu grid rows, %zu bytes, identical %s", n, grids[0].size(), grids[0] == grids[1] ? "yes" : "no"));
}

Outcome cli_round_trip() {
    const auto dir = support::fresh_dir("acceptance_round_trip");
    const auto gen = support::run_cli("gen-corpus --out-dir " + (dir / "corpus").string());
    if (gen.exit_code != 0) return verdict(false, fmt("gen-corpus exited %d", gen.exit_code));
    const auto sweep = support::run_cli("--set corpus.train_path=" + (dir / "corpus" / "train.csv").string() +
                                        " --set corpus.test_path=" + (dir / "corpus" / "test.csv").string() +
                                        " --set schema.path=" + (dir / "corpus" / "schema.json").string() +
                                        " sweep --out " + (dir / "report.json").string());
    if (sweep.exit_code != 0) return verdict(false, fmt("sweep exited %d", sweep.exit_code));
    const auto rep = support::run_cli("report --in " + (dir / "report.json").string() + " --csv " +
                                      (dir / "grid.csv").string());
    if (rep.exit_code != 0) return verdict(false, fmt("report exited %d", rep.exit_code));
    const auto report = json::parse(support::slurp(dir / "report.json"));
    const auto problems = oracle::check_report(report, 1e-9);
    return verdict(problems.empty() && rep.out == sweep.out,
                   problems.empty() ? fmt("%zu grid rows, %zu summary rows recomputed", report["grid"].size(),
                                          report["summary"].size())
                                    : problems.front());
}

Outcome live_smoke() {
    const char* key = std::getenv(kApiKeyEnv);
    if (!key || !*key) return {Outcome::skip, std::string(kApiKeyEnv) + " not set"};
    BackendConfig cfg;
    cfg.kind = "http";
    if (const char* url = std::getenv("SYNTHLOOP_BASE_URL")) cfg.base_url = url;
    if (const char* model = std::getenv("SYNTHLOOP_MODEL")) cfg.model = model;
    const auto desk = make_desk_corpus();
    GateConfig g;
    g.max_rounds = 1;
    LoopSettings s;
    s.model_name = cfg.model;
    const auto r = run_self_evolution_loop(desk_bundle(desk), *make_backend(cfg), desk.train.schema(), desk.train, g, s);
    const auto& rep = r.final_report();
    const bool balanced = static_cast<std::size_t>(rep.parse.n_rejected) == rep.parse.rejects.size();
    return verdict(balanced && (rep.parse.n_parsed >= 1 || rep.verdict != Verdict::pass),
                   fmt("%d parsed, %d rejected, verdict %s", rep.parse.n_parsed, rep.parse.n_rejected,
                       std::string(to_string(rep.verdict)).c_str()));
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"gradient oracle", gradient_oracle},
        {"metrics oracle", metrics_oracle},
        {"augmentation direction", augmentation_direction},
        {"self-evolution recovery", self_evolution_recovery},
        {"quality-gate soundness", gate_soundness},
        {"parser totality fuzz", parser_totality},
        {"end-to-end determinism", sweep_determinism},
        {"cli round trip", cli_round_trip},
        {"live smoke (optional)", live_smoke},
    };
    std::printf("kernels: %s\n", std::string(kernels::to_string(kernels::active_isa())).c_str());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Outcome::fail, std::string("threw: ") + e.what()};
        }
        const char* tag = o.state == Outcome::pass ? "PASS" : o.state == Outcome::skip ? "SKIP" : "FAIL";
        std::printf("%s %zu %s: %s\n", tag, i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
        failed += o.state == Outcome::fail;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
