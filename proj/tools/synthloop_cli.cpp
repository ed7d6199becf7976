// synthloop command-line interface.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 backend
// transport error, 4 acceptance-relevant failure (gate never passed, every
// sweep cell failed).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "synthloop/config.hpp"
#include "synthloop/corpus.hpp"
#include "synthloop/error.hpp"
#include "synthloop/experiment.hpp"
#include "synthloop/metrics.hpp"
#include "synthloop/quality_gate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace synthloop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;
constexpr int kExitFailed = 4;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string backend;
};

AppConfig resolve_config(const GlobalOptions& g, std::vector<std::string> extra = {}) {
    std::vector<std::string> overrides = g.overrides;
    if (g.seed) overrides.push_back("plan.base_seed=" + std::to_string(*g.seed));
    if (!g.backend.empty()) overrides.push_back("backend.kind=\"" + g.backend + "\"");
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    return g.config_path.empty() ? default_config(overrides) : load_config(g.config_path, overrides);
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ParseError(path.string() + " is not valid JSON");
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

int cmd_gen_corpus(const GlobalOptions& g, const std::string& out_dir) {
    const auto cfg = resolve_config(g);
    const auto schema = resolve_schema(cfg);
    if (!(schema == desk_schema())) throw ConfigError("gen-corpus only supports the bundled desk schema");
    const auto desk = make_desk_corpus({cfg.plan.target_attack, cfg.corpus.class_overlap, cfg.corpus.n_train_per_class,
                                        cfg.corpus.n_test_per_class, cfg.corpus.seed});
    fs::create_directories(out_dir);
    write_csv(desk.train, fs::path(out_dir) / "train.csv");
    write_csv(desk.test, fs::path(out_dir) / "test.csv");
    write_text(fs::path(out_dir) / "schema.json", to_json(schema).dump(2) + "\n");
    std::cout << "wrote " << desk.train.size() << " training and " << desk.test.size() << " test records to "
              << out_dir << "\n";
    return kExitOk;
}

int cmd_generate(const GlobalOptions& g, const std::string& out_csv, bool full_json) {
    const auto cfg = resolve_config(g);
    const auto schema = resolve_schema(cfg);
    const auto inputs = resolve_inputs(cfg, schema);
    const auto backend = make_backend(cfg.backend);

    const CellKey key{Regime::synthetic_only, 2 * cfg.prompt.n_requested, cfg.plan.base_seed};
    const auto seeds = cell_seeds(cfg.plan, key);
    GateConfig gate = cfg.gate;
    gate.probe_seed = seeds.probe;
    const auto bundle = build_generation_prompt(cfg.prompt, schema, inputs.train, cfg.plan.target_attack);
    const LoopSettings settings{cfg.backend.model, cfg.backend.temperature, cfg.backend.max_tokens, seeds.backend,
                                cfg.prompt.self_evolution_text};
    const auto loop = run_self_evolution_loop(bundle, *backend, schema, inputs.train, gate, settings);

    json out = to_json(loop);
    if (!full_json) out.erase("transcript");
    std::cout << out.dump(2) << "\n";
    if (!out_csv.empty() && loop.accepted) write_csv(Dataset(schema, *loop.accepted), out_csv);
    return loop.passed() ? kExitOk : kExitFailed;
}

int cmd_gate(const GlobalOptions& g, const std::string& input) {
    const auto cfg = resolve_config(g);
    const auto schema = resolve_schema(cfg);
    const auto inputs = resolve_inputs(cfg, schema);
    const auto synthetic = load_csv(input, schema, SyntheticSource{1, 0}).binary_task(cfg.plan.target_attack);
    ParseDiagnostics diag;
    diag.n_parsed = static_cast<int>(synthetic.size());
    GateConfig gate = cfg.gate;
    gate.probe_seed = cell_seeds(cfg.plan, {Regime::synthetic_only, static_cast<int>(synthetic.size()),
                                            cfg.plan.base_seed})
                          .probe;
    const auto report = gate_candidates(synthetic.records(), diag, 1, inputs.train.records(), inputs.train, gate);
    std::cout << to_json(report).dump(2) << "\n";
    return report.verdict == Verdict::pass ? kExitOk : kExitFailed;
}

int cmd_train(const GlobalOptions& g, const std::string& data_path, const std::string& model_out) {
    const auto cfg = resolve_config(g);
    const auto schema = resolve_schema(cfg);
    const Dataset data = data_path.empty()
                             ? resolve_inputs(cfg, schema).train
                             : load_csv(data_path, schema, RealSource{}).binary_task(cfg.plan.target_attack);
    const NormStats norm = fit_norm_stats(data);
    ClassifierConfig cc = cfg.classifier;
    cc.init_seed = cell_seeds(cfg.plan, {Regime::real_only, 0, cfg.plan.base_seed}).classifier;
    const auto trained = train(cc, data, norm);
    const auto m = evaluate(trained.params, data, norm);

    json model = {{"target_attack", cfg.plan.target_attack},
                  {"classifier", to_json(cc)},
                  {"params", to_json(trained.params)},
                  {"norm", {{"min", norm.min}, {"max", norm.max}}},
                  {"schema", to_json(schema)}};
    write_text(model_out, model.dump(2) + "\n");
    std::cout << json{{"epochs", trained.history.epochs_run},
                      {"initial_loss", trained.history.losses.front()},
                      {"final_loss", trained.history.losses.back()},
                      {"training_accuracy", m.accuracy},
                      {"model", model_out}}
                     .dump(2)
              << "\n";
    return kExitOk;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& model_path, const std::string& data_path) {
    const auto cfg = resolve_config(g);
    const json model = read_json_file(model_path);
    ModelParams params;
    NormStats norm;
    FeatureSchema schema = desk_schema();
    std::string attack;
    try {
        params = model_params_from_json(model.at("params"));
        norm.min = model.at("norm").at("min").get<std::vector<double>>();
        norm.max = model.at("norm").at("max").get<std::vector<double>>();
        schema = schema_from_json(model.at("schema"));
        attack = model.at("target_attack").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(model_path + ": " + e.what());
    }
    AppConfig eval_cfg = cfg;
    eval_cfg.plan.target_attack = attack;
    const Dataset test = data_path.empty() ? resolve_inputs(eval_cfg, schema).test
                                           : load_csv(data_path, schema, RealSource{}).binary_task(attack);
    const auto cm = confusion(params, test, norm);
    const auto m = metrics_from(cm);
    std::cout << json{{"n", m.n},         {"accuracy", m.accuracy}, {"precision", m.precision},
                      {"recall", m.recall}, {"f1", m.f1},           {"tp", cm.tp},
                      {"fp", cm.fp},       {"fn", cm.fn},           {"tn", cm.tn}}
                     .dump(2)
              << "\n";
    return kExitOk;
}

int finish_sweep(const ExperimentResult& result, const std::string& out, const std::string& csv) {
    if (!out.empty()) write_report(result, out);
    if (!csv.empty()) write_grid_csv(result, csv);
    std::cout << summarize(result);
    const bool any_backend_error = std::any_of(result.grid.begin(), result.grid.end(), [](const CellResult& c) {
        return c.status == CellStatus::backend_error;
    });
    if (any_backend_error) return kExitBackend;
    if (result.failed_cells() == result.grid.size()) return kExitFailed;
    return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, const std::string& out, const std::string& csv, int jobs) {
    std::vector<std::string> extra;
    if (jobs > 0) extra.push_back("plan.jobs=" + std::to_string(jobs));
    const auto cfg = resolve_config(g, extra);
    const auto schema = resolve_schema(cfg);
    const auto inputs = resolve_inputs(cfg, schema);
    const auto backend = make_backend(cfg.backend);
    auto result = run_sweep(cfg.plan, inputs, *backend);
    result.meta.config_hash = config_hash(cfg);
    return finish_sweep(result, out, csv);
}

int cmd_report(const std::string& in, const std::string& csv) {
    const auto result = read_report(in);
    if (!csv.empty()) write_grid_csv(result, csv);
    std::cout << summarize(result);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-driven synthetic traffic augmentation for intrusion detection"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "Override a config value: section.key=value (repeatable)")
        ->allow_extra_args(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--seed", g.seed, "Base seed (plan.base_seed)");
    app.add_option("--backend", g.backend, "Backend kind: http, mock-good or mock-bad");

    std::string out_dir, out, csv, input, data, model;
    bool full_json = false;
    int jobs = 0;

    auto* gen_corpus = app.add_subcommand("gen-corpus", "Write the desk corpus (train.csv, test.csv, schema.json)");
    gen_corpus->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* generate = app.add_subcommand("generate", "Run one generate-and-gate loop and print its reports");
    generate->add_option("--out", out, "Write accepted synthetic records to this CSV");
    generate->add_flag("--transcript", full_json, "Include the conversation transcript");

    auto* gate = app.add_subcommand("gate", "Re-gate an existing synthetic CSV against the real training set");
    gate->add_option("--input", input, "Synthetic corpus CSV")->required()->check(CLI::ExistingFile);

    auto* train_cmd = app.add_subcommand("train", "Train the classifier on a corpus CSV");
    train_cmd->add_option("--data", data, "Training CSV (default: configured training corpus)");
    train_cmd->add_option("--model-out", model, "Where to write the model JSON")->required();

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a trained model on a corpus CSV");
    evaluate_cmd->add_option("--model", model, "Model JSON from `train`")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--data", data, "Test CSV (default: configured test corpus)");

    auto* sweep = app.add_subcommand("sweep", "Run the regime x synthetic-count x seed grid");
    sweep->add_option("--out", out, "Report JSON path");
    sweep->add_option("--csv", csv, "Grid CSV path");
    sweep->add_option("--jobs", jobs, "Worker threads (plan.jobs)")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Summarize a report JSON");
    report->add_option("--in", input, "Report JSON")->required()->check(CLI::ExistingFile);
    report->add_option("--csv", csv, "Also write the grid as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_corpus) return cmd_gen_corpus(g, out_dir);
        if (*generate) return cmd_generate(g, out, full_json);
        if (*gate) return cmd_gate(g, input);
        if (*train_cmd) return cmd_train(g, data, model);
        if (*evaluate_cmd) return cmd_evaluate(g, model, data);
        if (*sweep) return cmd_sweep(g, out, csv, jobs);
        if (*report) return cmd_report(input, csv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
