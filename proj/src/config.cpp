#include "synthloop/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "synthloop/error.hpp"

namespace synthloop {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& value, T& out, const std::string& where) {
    try {
        out = value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": wrong value type");
    }
}

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
    throw ConfigError("unknown config key \"" + section + "." + key + "\"");
}

void require_object(const json& j, const std::string& section) {
    if (!j.is_object()) throw ConfigError("config section \"" + section + "\" must be an object");
}

void read_schema(const json& j, AppConfig& cfg) {
    require_object(j, "schema");
    for (const auto& [k, v] : j.items()) {
        if (k == "path") read(v, cfg.schema_path, "schema.path");
        else unknown_key("schema", k);
    }
}

void read_corpus(const json& j, CorpusConfig& c) {
    require_object(j, "corpus");
    for (const auto& [k, v] : j.items()) {
        const std::string where = "corpus." + k;
        if (k == "train_path") read(v, c.train_path, where);
        else if (k == "test_path") read(v, c.test_path, where);
        else if (k == "class_overlap") read(v, c.class_overlap, where);
        else if (k == "n_train_per_class") read(v, c.n_train_per_class, where);
        else if (k == "n_test_per_class") read(v, c.n_test_per_class, where);
        else if (k == "seed") read(v, c.seed, where);
        else unknown_key("corpus", k);
    }
}

void read_backend(const json& j, BackendConfig& b) {
    require_object(j, "backend");
    for (const auto& [k, v] : j.items()) {
        const std::string where = "backend." + k;
        if (k == "kind") read(v, b.kind, where);
        else if (k == "base_url") read(v, b.base_url, where);
        else if (k == "model") read(v, b.model, where);
        else if (k == "temperature") read(v, b.temperature, where);
        else if (k == "max_tokens") read(v, b.max_tokens, where);
        else if (k == "seed") read(v, b.seed, where);
        else if (k == "timeout_s") read(v, b.timeout_s, where);
        else if (k == "mock_noise_scale") read(v, b.mock_noise_scale, where);
        else unknown_key("backend", k);
    }
    if (b.kind != "http" && b.kind != "mock-good" && b.kind != "mock-bad") {
        throw ConfigError("backend.kind must be one of http, mock-good, mock-bad");
    }
}

void read_prompt(const json& j, PromptConfig& p) {
    require_object(j, "prompt");
    for (const auto& [k, v] : j.items()) {
        const std::string where = "prompt." + k;
        if (k == "task_description") read(v, p.task_description, where);
        else if (k == "n_requested") read(v, p.n_requested, where);
        else if (k == "output_format_instructions") read(v, p.output_format_instructions, where);
        else if (k == "self_evolution_text") read(v, p.self_evolution_text, where);
        else unknown_key("prompt", k);
    }
}

void read_gate(const json& j, GateConfig& g) {
    require_object(j, "gate");
    for (const auto& [k, v] : j.items()) {
        const std::string where = "gate." + k;
        if (k == "threshold") read(v, g.threshold, where);
        else if (k == "duplicate_threshold") read(v, g.duplicate_threshold, where);
        else if (k == "max_rounds") read(v, g.max_rounds, where);
        else if (k == "probe_seed") read(v, g.probe_seed, where);
        else unknown_key("gate", k);
    }
}

void read_plan(const json& j, ExperimentPlan& p) {
    require_object(j, "plan");
    for (const auto& [k, v] : j.items()) {
        const std::string where = "plan." + k;
        if (k == "target_attack") read(v, p.target_attack, where);
        else if (k == "synthetic_counts") read(v, p.synthetic_counts, where);
        else if (k == "n_seeds") read(v, p.n_seeds, where);
        else if (k == "base_seed") read(v, p.base_seed, where);
        else if (k == "jobs") read(v, p.jobs, where);
        else if (k == "regimes") {
            std::vector<std::string> names;
            read(v, names, where);
            p.regimes.clear();
            for (const auto& n : names) p.regimes.push_back(regime_from_string(n));
        } else {
            unknown_key("plan", k);
        }
    }
}

}  // namespace

AppConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    AppConfig cfg;
    for (const auto& [section, body] : j.items()) {
        if (section == "schema") read_schema(body, cfg);
        else if (section == "corpus") read_corpus(body, cfg.corpus);
        else if (section == "backend") read_backend(body, cfg.backend);
        else if (section == "prompt") read_prompt(body, cfg.prompt);
        else if (section == "gate") read_gate(body, cfg.gate);
        else if (section == "classifier") cfg.classifier = classifier_config_from_json(body);
        else if (section == "plan") read_plan(body, cfg.plan);
        else throw ConfigError("unknown config section \"" + section + "\"");
    }
    cfg.gate.probe = cfg.classifier;
    cfg.plan.prompt = cfg.prompt;
    cfg.plan.gate = cfg.gate;
    cfg.plan.classifier = cfg.classifier;
    cfg.plan.backend = cfg.backend;
    try {
        cfg.plan.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (cfg.corpus.train_path.empty() != cfg.corpus.test_path.empty()) {
        throw ConfigError("corpus.train_path and corpus.test_path must be given together");
    }
    return cfg;
}

json to_json(const AppConfig& cfg) {
    json regimes = json::array();
    for (auto r : cfg.plan.regimes) regimes.push_back(std::string(to_string(r)));
    return {
        {"schema", {{"path", cfg.schema_path}}},
        {"corpus",
         {{"train_path", cfg.corpus.train_path},
          {"test_path", cfg.corpus.test_path},
          {"class_overlap", cfg.corpus.class_overlap},
          {"n_train_per_class", cfg.corpus.n_train_per_class},
          {"n_test_per_class", cfg.corpus.n_test_per_class},
          {"seed", cfg.corpus.seed}}},
        {"backend",
         {{"kind", cfg.backend.kind},
          {"base_url", cfg.backend.base_url},
          {"model", cfg.backend.model},
          {"temperature", cfg.backend.temperature},
          {"max_tokens", cfg.backend.max_tokens},
          {"seed", cfg.backend.seed},
          {"timeout_s", cfg.backend.timeout_s},
          {"mock_noise_scale", cfg.backend.mock_noise_scale}}},
        {"prompt",
         {{"task_description", cfg.prompt.task_description},
          {"n_requested", cfg.prompt.n_requested},
          {"output_format_instructions", cfg.prompt.output_format_instructions},
          {"self_evolution_text", cfg.prompt.self_evolution_text}}},
        {"gate",
         {{"threshold", cfg.gate.threshold},
          {"duplicate_threshold", cfg.gate.duplicate_threshold},
          {"max_rounds", cfg.gate.max_rounds},
          {"probe_seed", cfg.gate.probe_seed}}},
        {"classifier", to_json(cfg.classifier)},
        {"plan",
         {{"target_attack", cfg.plan.target_attack},
          {"synthetic_counts", cfg.plan.synthetic_counts},
          {"regimes", regimes},
          {"n_seeds", cfg.plan.n_seeds},
          {"base_seed", cfg.plan.base_seed},
          {"jobs", cfg.plan.jobs}}},
    };
}

void apply_override(json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq || dot == 0 || dot + 1 == eq) {
        throw ConfigError("override must look like section.key=value, got \"" + std::string(assignment) + "\"");
    }
    const std::string section(assignment.substr(0, dot));
    const std::string key(assignment.substr(dot + 1, eq - dot - 1));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    if (!config.is_object()) config = json::object();
    config[section][key] = std::move(value);
}

AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
    for (const auto& o : overrides) apply_override(j, o);
    return config_from_json(j);
}

AppConfig default_config(const std::vector<std::string>& overrides) {
    json j = json::object();
    for (const auto& o : overrides) apply_override(j, o);
    return config_from_json(j);
}

std::string config_hash(const AppConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FeatureSchema resolve_schema(const AppConfig& cfg) {
    return cfg.schema_path.empty() ? desk_schema() : load_schema(cfg.schema_path);
}

ExperimentInputs resolve_inputs(const AppConfig& cfg, const FeatureSchema& schema) {
    if (!schema.has_attack(cfg.plan.target_attack)) {
        throw ConfigError("plan.target_attack \"" + cfg.plan.target_attack + "\" is not in the schema");
    }
    if (cfg.corpus.train_path.empty()) {
        if (!(schema == desk_schema())) {
            throw ConfigError("a custom schema needs corpus.train_path and corpus.test_path");
        }
        auto desk = make_desk_corpus({cfg.plan.target_attack, cfg.corpus.class_overlap, cfg.corpus.n_train_per_class,
                                      cfg.corpus.n_test_per_class, cfg.corpus.seed});
        return {std::move(desk.train), std::move(desk.test)};
    }
    auto train = load_csv(cfg.corpus.train_path, schema, RealSource{}).binary_task(cfg.plan.target_attack);
    auto test = load_csv(cfg.corpus.test_path, schema, RealSource{}).binary_task(cfg.plan.target_attack);
    return {std::move(train), std::move(test)};
}

}  // namespace synthloop
