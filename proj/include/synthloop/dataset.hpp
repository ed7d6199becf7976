#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "synthloop/schema.hpp"

namespace synthloop {

inline constexpr std::string_view kBenignLabel = "benign";

/// Benign, or an attack named in the schema.
class Label {
public:
    static Label benign() { return Label{}; }
    static Label attack(std::string name) { return Label{std::move(name)}; }
    // "benign" or the attack name; does not check the name against a schema.
    static Label from_string(std::string_view text);

    bool is_attack() const { return attack_.has_value(); }
    const std::string& attack_name() const { return *attack_; }
    std::string to_string() const { return attack_ ? *attack_ : std::string(kBenignLabel); }

    bool operator==(const Label&) const = default;
    auto operator<=>(const Label&) const = default;

private:
    Label() = default;
    explicit Label(std::string name) : attack_(std::move(name)) {}

    std::optional<std::string> attack_;
};

struct RealSource {
    bool operator==(const RealSource&) const = default;
};

struct SyntheticSource {
    int round = 1;        // >= 1
    int batch_index = 0;  // >= 0, order of acceptance within the round
    bool operator==(const SyntheticSource&) const = default;
};

using Provenance = std::variant<RealSource, SyntheticSource>;

inline bool is_real(const Provenance& p) { return std::holds_alternative<RealSource>(p); }
inline bool is_synthetic(const Provenance& p) { return std::holds_alternative<SyntheticSource>(p); }

struct TrafficRecord {
    std::vector<double> values;
    Label label = Label::benign();
    Provenance provenance = RealSource{};

    bool operator==(const TrafficRecord&) const = default;
};

/// Labeled records sharing one schema. Immutable after construction; the
/// constructor validates value counts, labels, and (for real records) ranges.
class Dataset {
public:
    explicit Dataset(FeatureSchema schema, std::vector<TrafficRecord> records = {});

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<TrafficRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // Tallies keyed by label string ("benign" or the attack name).
    const std::map<std::string, std::size_t>& counts() const { return counts_; }
    std::size_t count(std::string_view label) const;
    std::size_t attack_count() const;
    std::size_t benign_count() const { return count(kBenignLabel); }

    // Records labeled benign or `attack_name`, order preserved.
    Dataset binary_task(std::string_view attack_name) const;
    Dataset concat(const Dataset& other) const;

private:
    FeatureSchema schema_;
    std::vector<TrafficRecord> records_;
    std::map<std::string, std::size_t> counts_;
};

// Throws ValidationError when the record breaks a TrafficRecord invariant.
void validate_record(const TrafficRecord& record, const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// CSV corpus files

// Shortest text that parses back to exactly `v`.
std::string format_number(double v);
// One CSV data row: values in schema order, label last.
std::string format_row(const TrafficRecord& record);

std::string to_csv_text(const Dataset& d);
void write_csv(const Dataset& d, const std::filesystem::path& path);

Dataset parse_csv_text(std::string_view text, const FeatureSchema& schema, const Provenance& provenance);
Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema, const Provenance& provenance);

// ---------------------------------------------------------------------------
// Splits, normalization and duplicate detection

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double fraction, std::uint64_t seed);

struct NormStats {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t size() const { return min.size(); }
    bool operator==(const NormStats&) const = default;
};

inline constexpr double kSyntheticNormLow = -0.5;
inline constexpr double kSyntheticNormHigh = 1.5;

// Min/max over the Real-provenance records of `d`.
NormStats fit_norm_stats(const Dataset& d);
// (v - min) / (max - min); constant features map to 0. Values of synthetic
// records are clamped to [-0.5, 1.5].
TrafficRecord apply_norm(const TrafficRecord& record, const NormStats& stats);
std::vector<double> normalize_values(std::span<const double> values, const NormStats& stats, bool clamp);

// Fraction of candidates whose value vector, rounded to 6 decimals, equals a
// reference vector or an earlier candidate.
double duplicate_fraction(std::span<const TrafficRecord> candidates, std::span<const TrafficRecord> reference);

}  // namespace synthloop
