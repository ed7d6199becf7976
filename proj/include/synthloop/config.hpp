#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "synthloop/corpus.hpp"
#include "synthloop/experiment.hpp"

namespace synthloop {

struct CorpusConfig {
    std::string train_path;  // empty: generate the desk corpus
    std::string test_path;
    double class_overlap = kDeskClassOverlap;
    int n_train_per_class = 10;
    int n_test_per_class = 100;
    std::uint64_t seed = 2024;
};

/// Whole-run configuration. The JSON form has the sections schema, corpus,
/// backend, prompt, gate, classifier and plan; unknown sections or keys are
/// ConfigErrors. Every key is optional and defaults as below.
struct AppConfig {
    std::string schema_path;  // empty: bundled desk schema
    CorpusConfig corpus;
    BackendConfig backend;
    PromptConfig prompt;
    GateConfig gate;
    ClassifierConfig classifier;
    ExperimentPlan plan;  // prompt/gate/classifier/backend mirrored from above
};

AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AppConfig& cfg);

// Applies "section.key=value"; the value is read as JSON when it parses,
// otherwise as a plain string.
void apply_override(nlohmann::json& config, std::string_view assignment);

AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
AppConfig default_config(const std::vector<std::string>& overrides = {});

// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const AppConfig& cfg);

FeatureSchema resolve_schema(const AppConfig& cfg);
// Real training/test corpora for the plan's target attack.
ExperimentInputs resolve_inputs(const AppConfig& cfg, const FeatureSchema& schema);

}  // namespace synthloop
