#include "synthloop/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "synthloop/error.hpp"
#include "synthloop/random.hpp"
#include "text_util.hpp"

namespace synthloop {

Label Label::from_string(std::string_view text) {
    if (text == kBenignLabel) return benign();
    return attack(std::string(text));
}

void validate_record(const TrafficRecord& record, const FeatureSchema& schema) {
    if (record.values.size() != schema.size()) {
        throw ValidationError("record has " + std::to_string(record.values.size()) + " values, schema has " +
                              std::to_string(schema.size()) + " features");
    }
    if (record.label.is_attack() && !schema.has_attack(record.label.attack_name())) {
        throw ValidationError("unknown label \"" + record.label.attack_name() + "\"");
    }
    if (const auto* syn = std::get_if<SyntheticSource>(&record.provenance)) {
        if (syn->round < 1 || syn->batch_index < 0) throw ValidationError("invalid synthetic provenance");
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const double v = record.values[i];
        const auto& f = schema[i];
        if (!std::isfinite(v)) throw ValidationError("feature \"" + f.name + "\": value is not finite");
        if (!is_real(record.provenance)) continue;
        if (v < f.min || v > f.max) {
            throw ValidationError("feature \"" + f.name + "\": value " + format_number(v) + " outside [" +
                                  format_number(f.min) + ", " + format_number(f.max) + "]");
        }
        if (f.kind == FeatureKind::flag && v != 0.0 && v != 1.0) {
            throw ValidationError("feature \"" + f.name + "\": flag value must be 0 or 1");
        }
    }
}

Dataset::Dataset(FeatureSchema schema, std::vector<TrafficRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        try {
            validate_record(records_[i], schema_);
        } catch (const ValidationError& e) {
            throw ValidationError("record " + std::to_string(i) + ": " + e.what());
        }
        ++counts_[records_[i].label.to_string()];
    }
}

std::size_t Dataset::count(std::string_view label) const {
    auto it = counts_.find(std::string(label));
    return it == counts_.end() ? 0 : it->second;
}

std::size_t Dataset::attack_count() const { return records_.size() - benign_count(); }

Dataset Dataset::binary_task(std::string_view attack_name) const {
    std::vector<TrafficRecord> kept;
    for (const auto& r : records_) {
        if (!r.label.is_attack() || r.label.attack_name() == attack_name) kept.push_back(r);
    }
    return Dataset(schema_, std::move(kept));
}

Dataset Dataset::concat(const Dataset& other) const {
    if (!(other.schema_ == schema_)) throw ValidationError("cannot concatenate datasets with different schemas");
    std::vector<TrafficRecord> all = records_;
    all.insert(all.end(), other.records_.begin(), other.records_.end());
    return Dataset(schema_, std::move(all));
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, end);
}

std::string format_row(const TrafficRecord& record) {
    std::string row;
    for (double v : record.values) {
        row += format_number(v);
        row += ',';
    }
    row += record.label.to_string();
    return row;
}

std::string to_csv_text(const Dataset& d) {
    std::string out = d.schema().csv_header_line();
    out += '\n';
    for (const auto& r : d.records()) {
        out += format_row(r);
        out += '\n';
    }
    return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_csv_text(d);
    if (!out) throw DataError("write failed for " + path.string());
}

Dataset parse_csv_text(std::string_view text, const FeatureSchema& schema, const Provenance& provenance) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    const auto lines = detail::split_lines(text);
    std::size_t header_line = 0;
    while (header_line < lines.size() && detail::trim(lines[header_line]).empty()) ++header_line;
    if (header_line == lines.size()) throw ParseError("CSV has no header row");

    const auto expected = schema.csv_header();
    auto header = detail::split_cells(lines[header_line]);
    if (header != expected) {
        throw ParseError("CSV header mismatch: expected \"" + schema.csv_header_line() + "\", got \"" +
                         std::string(detail::trim(lines[header_line])) + "\"");
    }

    std::vector<TrafficRecord> records;
    int batch_index = 0;
    for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty()) continue;
        const std::string where = "row " + std::to_string(li + 1);
        auto cells = detail::split_cells(lines[li]);
        if (cells.size() != expected.size()) {
            throw ParseError(where + ": expected " + std::to_string(expected.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        TrafficRecord r;
        r.values.reserve(schema.size());
        for (std::size_t c = 0; c < schema.size(); ++c) {
            auto v = detail::parse_double(cells[c]);
            if (!v) {
                throw ParseError(where + ", column " + std::to_string(c + 1) + " (" + schema[c].name +
                                 "): non-numeric value \"" + cells[c] + "\"");
            }
            r.values.push_back(*v);
        }
        const std::string& label = cells.back();
        if (label != kBenignLabel && !schema.has_attack(label)) {
            throw ValidationError(where + ": unknown label \"" + label + "\"");
        }
        r.label = Label::from_string(label);
        r.provenance = provenance;
        if (auto* syn = std::get_if<SyntheticSource>(&r.provenance)) syn->batch_index = batch_index++;
        try {
            validate_record(r, schema);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return Dataset(schema, std::move(records));
}

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema, const Provenance& provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv_text(buf.str(), schema, provenance);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("split fraction must be in (0, 1)");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < d.size(); ++i) by_class[d.records()[i].label.to_string()].push_back(i);

    Rng rng(seed);
    std::vector<char> in_first(d.size(), 0);
    for (auto& [label, idx] : by_class) {
        if (idx.size() < 2) {
            throw ValidationError("class \"" + label + "\" has " + std::to_string(idx.size()) +
                                  " record(s); stratified split needs at least 2");
        }
        const auto n = static_cast<long long>(idx.size());
        const long long k = std::clamp(std::llround(fraction * static_cast<double>(n)), 1LL, n - 1);
        rng.shuffle(std::span<std::size_t>(idx));
        for (long long i = 0; i < k; ++i) in_first[idx[i]] = 1;
    }

    std::vector<TrafficRecord> first, second;
    for (std::size_t i = 0; i < d.size(); ++i) (in_first[i] ? first : second).push_back(d.records()[i]);
    return {Dataset(d.schema(), std::move(first)), Dataset(d.schema(), std::move(second))};
}

NormStats fit_norm_stats(const Dataset& d) {
    NormStats s;
    bool any = false;
    for (const auto& r : d.records()) {
        if (!is_real(r.provenance)) continue;
        if (!any) {
            s.min = r.values;
            s.max = r.values;
            any = true;
            continue;
        }
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            s.min[i] = std::min(s.min[i], r.values[i]);
            s.max[i] = std::max(s.max[i], r.values[i]);
        }
    }
    if (!any) throw ValidationError("cannot fit normalization statistics: no real records");
    return s;
}

std::vector<double> normalize_values(std::span<const double> values, const NormStats& stats, bool clamp) {
    if (values.size() != stats.size()) throw ValidationError("value count does not match normalization statistics");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double span = stats.max[i] - stats.min[i];
        double v = span > 0.0 ? (values[i] - stats.min[i]) / span : 0.0;
        if (clamp) v = std::clamp(v, kSyntheticNormLow, kSyntheticNormHigh);
        out[i] = v;
    }
    return out;
}

TrafficRecord apply_norm(const TrafficRecord& record, const NormStats& stats) {
    TrafficRecord out = record;
    out.values = normalize_values(record.values, stats, is_synthetic(record.provenance));
    return out;
}

double duplicate_fraction(std::span<const TrafficRecord> candidates, std::span<const TrafficRecord> reference) {
    if (candidates.empty()) return 0.0;
    const std::size_t width = candidates.front().values.size();
    auto key = [width](const TrafficRecord& r) {
        if (r.values.size() != width) throw ValidationError("duplicate check: records have different lengths");
        std::vector<double> k(r.values.size());
        for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::round(r.values[i] * 1e6) / 1e6;
        return k;
    };
    std::set<std::vector<double>> seen;
    for (const auto& r : reference) seen.insert(key(r));
    std::size_t dup = 0;
    for (const auto& c : candidates) {
        if (!seen.insert(key(c)).second) ++dup;
    }
    return static_cast<double>(dup) / static_cast<double>(candidates.size());
}

}  // namespace synthloop
