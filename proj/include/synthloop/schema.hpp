#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace synthloop {

enum class FeatureKind { continuous, count, flag };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view text);

struct FeatureSpec {
    std::string name;
    // Human-readable semantics. Quoted verbatim in the generation prompt.
    std::string description;
    FeatureKind kind = FeatureKind::continuous;
    double min = 0.0;
    double max = 1.0;

    double range() const { return max - min; }
    bool operator==(const FeatureSpec&) const = default;
};

/// Ordered feature list plus the attack labels a corpus may carry.
///
/// Construction validates every invariant (at least two features, unique
/// non-empty names, non-empty descriptions, min < max, flags on [0, 1], at
/// least one attack name) and throws ValidationError naming the offending
/// field. A constructed schema is immutable.
class FeatureSchema {
public:
    FeatureSchema(std::vector<FeatureSpec> features, std::vector<std::string> attack_names);

    const std::vector<FeatureSpec>& features() const { return features_; }
    const std::vector<std::string>& attack_names() const { return attack_names_; }
    std::size_t size() const { return features_.size(); }
    const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }

    std::optional<std::size_t> index_of(std::string_view name) const;
    bool has_attack(std::string_view name) const;

    // Feature names followed by "label", the corpus CSV header.
    std::vector<std::string> csv_header() const;
    std::string csv_header_line() const;

    bool operator==(const FeatureSchema&) const = default;

private:
    std::vector<FeatureSpec> features_;
    std::vector<std::string> attack_names_;
};

nlohmann::json to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);
FeatureSchema parse_schema(std::string_view text);
FeatureSchema load_schema(const std::filesystem::path& path);

// The bundled six-feature flow schema (data/desk_schema.json).
FeatureSchema desk_schema();

}  // namespace synthloop
