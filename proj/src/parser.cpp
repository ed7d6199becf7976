#include "synthloop/error.hpp"
#include "synthloop/generation.hpp"
#include "text_util.hpp"

namespace synthloop {

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::prose: return "prose";
        case RejectReason::code_fence: return "code_fence";
        case RejectReason::header: return "header";
        case RejectReason::field_count: return "field_count";
        case RejectReason::non_numeric: return "non_numeric";
        case RejectReason::unknown_label: return "unknown_label";
        case RejectReason::implausible_value: return "implausible_value";
    }
    return "prose";
}

int GenerationRequest::round() const {
    int users = 0;
    for (const auto& t : conversation) users += t.role == Role::user ? 1 : 0;
    return std::max(users, 1);
}

void GenerationRequest::validate() const {
    if (conversation.empty()) throw ValidationError("generation request has an empty conversation");
    if (conversation.front().role == Role::assistant) {
        throw ValidationError("generation request must start with a user or system turn");
    }
    for (const auto& t : conversation) {
        if (t.text.empty()) throw ValidationError("generation request contains an empty turn");
    }
    if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
    if (max_output_tokens < 1) throw ValidationError("max_output_tokens must be >= 1");
}

ParsedOutput parse_synthetic_output(std::string_view raw_text, const FeatureSchema& schema, int round) {
    ParsedOutput out;
    auto& diag = out.diagnostics;
    const auto header = schema.csv_header();
    const auto lines = detail::split_lines(raw_text);

    auto reject = [&](std::size_t index, RejectReason reason, std::string detail) {
        diag.rejects.push_back({static_cast<int>(index + 1), reason, std::move(detail)});
        ++diag.n_rejected;
    };

    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = detail::trim(lines[li]);
        if (line.empty()) continue;
        if (line.starts_with("```")) {
            reject(li, RejectReason::code_fence, "");
            continue;
        }
        // Markdown bullets around otherwise valid rows.
        if (line.starts_with("- ") || line.starts_with("* ")) line = detail::trim(line.substr(2));
        if (line.find(',') == std::string_view::npos) {
            reject(li, RejectReason::prose, "");
            continue;
        }
        const auto cells = detail::split_cells(line);
        if (cells == header) {
            reject(li, RejectReason::header, "");
            continue;
        }
        if (cells.size() != header.size()) {
            reject(li, RejectReason::field_count,
                   "expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
            continue;
        }

        TrafficRecord r;
        r.values.reserve(schema.size());
        std::optional<std::size_t> bad_cell;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            auto v = detail::parse_double(cells[c]);
            if (!v) {
                bad_cell = c;
                break;
            }
            r.values.push_back(*v);
        }
        if (bad_cell) {
            reject(li, RejectReason::non_numeric, "column " + schema[*bad_cell].name);
            continue;
        }
        const std::string& label = cells.back();
        if (label != kBenignLabel && !schema.has_attack(label)) {
            reject(li, RejectReason::unknown_label, label);
            continue;
        }
        std::optional<std::size_t> implausible;
        for (std::size_t c = 0; c < schema.size() && !implausible; ++c) {
            const auto& f = schema[c];
            const double slack = kPlausibleRangeFactor * f.range();
            if (r.values[c] < f.min - slack || r.values[c] > f.max + slack) implausible = c;
        }
        if (implausible) {
            reject(li, RejectReason::implausible_value, "column " + schema[*implausible].name);
            continue;
        }
        r.label = Label::from_string(label);
        r.provenance = SyntheticSource{std::max(round, 1), diag.n_parsed};
        out.records.push_back(std::move(r));
        ++diag.n_parsed;
    }
    return out;
}

}  // namespace synthloop
