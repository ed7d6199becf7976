#include "synthloop/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "synthloop/error.hpp"

namespace synthloop {

using nlohmann::json;

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::continuous: return "continuous";
        case FeatureKind::count: return "count";
        case FeatureKind::flag: return "flag";
    }
    return "continuous";
}

FeatureKind feature_kind_from_string(std::string_view text) {
    if (text == "continuous") return FeatureKind::continuous;
    if (text == "count") return FeatureKind::count;
    if (text == "flag") return FeatureKind::flag;
    throw ValidationError("unknown feature kind \"" + std::string(text) + "\"");
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features, std::vector<std::string> attack_names)
    : features_(std::move(features)), attack_names_(std::move(attack_names)) {
    if (features_.size() < 2) {
        throw ValidationError("schema must have at least 2 features, got " + std::to_string(features_.size()));
    }
    std::set<std::string, std::less<>> seen;
    for (const auto& f : features_) {
        if (f.name.empty()) throw ValidationError("feature name must be non-empty");
        if (f.name == "label") throw ValidationError("feature name \"label\" is reserved");
        if (f.name.find_first_of(", \t\r\n") != std::string::npos) {
            throw ValidationError("feature \"" + f.name + "\": name must not contain commas or whitespace");
        }
        if (!seen.insert(f.name).second) throw ValidationError("duplicate feature name \"" + f.name + "\"");
        if (f.description.empty()) throw ValidationError("feature \"" + f.name + "\": description must be non-empty");
        if (!(f.min < f.max)) throw ValidationError("feature \"" + f.name + "\": min must be < max");
        if (f.kind == FeatureKind::flag && (f.min != 0.0 || f.max != 1.0)) {
            throw ValidationError("feature \"" + f.name + "\": flag range must be [0, 1]");
        }
    }
    if (attack_names_.empty()) throw ValidationError("schema must have at least 1 attack name");
    std::set<std::string, std::less<>> attacks;
    for (const auto& a : attack_names_) {
        if (a.empty() || a == "benign") throw ValidationError("invalid attack name \"" + a + "\"");
        if (a.find_first_of(", \t\r\n") != std::string::npos) {
            throw ValidationError("attack name \"" + a + "\" must not contain commas or whitespace");
        }
        if (!attacks.insert(a).second) throw ValidationError("duplicate attack name \"" + a + "\"");
    }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) return i;
    }
    return std::nullopt;
}

bool FeatureSchema::has_attack(std::string_view name) const {
    return std::find(attack_names_.begin(), attack_names_.end(), name) != attack_names_.end();
}

std::vector<std::string> FeatureSchema::csv_header() const {
    std::vector<std::string> header;
    header.reserve(features_.size() + 1);
    for (const auto& f : features_) header.push_back(f.name);
    header.emplace_back("label");
    return header;
}

std::string FeatureSchema::csv_header_line() const {
    std::string line;
    for (const auto& f : features_) {
        line += f.name;
        line += ',';
    }
    line += "label";
    return line;
}

json to_json(const FeatureSchema& schema) {
    json features = json::array();
    for (const auto& f : schema.features()) {
        features.push_back({{"name", f.name},
                            {"description", f.description},
                            {"kind", std::string(to_string(f.kind))},
                            {"min", f.min},
                            {"max", f.max}});
    }
    return {{"features", features}, {"attack_names", schema.attack_names()}};
}

namespace {

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + ": field \"" + key + "\" has the wrong type");
    }
}

}  // namespace

FeatureSchema schema_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("schema: expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "features" && key != "attack_names") throw ParseError("schema: unknown field \"" + key + "\"");
    }
    if (!j.contains("features") || !j.at("features").is_array()) {
        throw ParseError("schema: \"features\" must be an array");
    }
    std::vector<FeatureSpec> features;
    std::size_t index = 0;
    for (const auto& f : j.at("features")) {
        const std::string where = "schema.features[" + std::to_string(index++) + "]";
        if (!f.is_object()) throw ParseError(where + ": expected an object");
        FeatureSpec spec;
        spec.name = required<std::string>(f, "name", where);
        spec.description = required<std::string>(f, "description", where);
        spec.kind = feature_kind_from_string(required<std::string>(f, "kind", where));
        spec.min = required<double>(f, "min", where);
        spec.max = required<double>(f, "max", where);
        features.push_back(std::move(spec));
    }
    auto attacks = required<std::vector<std::string>>(j, "attack_names", "schema");
    return FeatureSchema(std::move(features), std::move(attacks));
}

FeatureSchema parse_schema(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("schema: malformed JSON: ") + e.what());
    }
    return schema_from_json(j);
}

FeatureSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schema(buf.str());
}

FeatureSchema desk_schema() {
    return FeatureSchema(
        {
            {"packet_count", "Number of packets observed in the flow during a one-second window.",
             FeatureKind::count, 0, 5000},
            {"byte_count", "Total bytes carried by the flow during the same one-second window, headers included.",
             FeatureKind::count, 0, 2000000},
            {"mean_inter_arrival_ms", "Average gap between consecutive packets of the flow, in milliseconds.",
             FeatureKind::continuous, 0, 200},
            {"syn_flag_ratio", "Share of TCP packets in the flow with the SYN flag set, between 0 and 1.",
             FeatureKind::continuous, 0, 1},
            {"ack_flag_ratio", "Share of TCP packets in the flow with the ACK flag set, between 0 and 1.",
             FeatureKind::continuous, 0, 1},
            {"fin_flag_ratio", "Share of TCP packets in the flow with the FIN flag set, between 0 and 1.",
             FeatureKind::continuous, 0, 1},
        },
        {"tcp_ack_flood", "tcp_fin_flood"});
}

}  // namespace synthloop
