#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "synthloop/error.hpp"
#include "synthloop/generation.hpp"
#include "synthloop/random.hpp"
#include "text_util.hpp"

namespace synthloop {

namespace {

// What a mock can read back out of the rendered generation prompt.
struct PromptView {
    std::string header_line;
    std::vector<std::vector<double>> values;
    std::vector<std::string> labels;
    int n_requested = 0;
};

PromptView read_prompt(const std::vector<ConversationTurn>& conversation) {
    const auto first_user = std::find_if(conversation.begin(), conversation.end(),
                                         [](const ConversationTurn& t) { return t.role == Role::user; });
    if (first_user == conversation.end()) {
        throw BackendError(BackendErrorKind::backend_reported, "mock backend: conversation has no user turn");
    }
    const auto lines = detail::split_lines(first_user->text);
    const std::string_view heading = section_heading(PromptSection::examples_listing);

    PromptView view;
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]) != heading) ++i;
    for (++i; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.starts_with("### ")) break;
        if (view.header_line.empty()) {
            if (line.ends_with(",label")) view.header_line = std::string(line);
            continue;
        }
        auto cells = detail::split_cells(line);
        if (cells.size() < 2) continue;
        std::vector<double> v;
        for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
            auto x = detail::parse_double(cells[c]);
            if (!x) break;
            v.push_back(*x);
        }
        if (v.size() + 1 != cells.size()) continue;
        view.values.push_back(std::move(v));
        view.labels.push_back(cells.back());
    }

    constexpr std::string_view marker = "Generate exactly ";
    for (auto line : lines) {
        const auto pos = line.find(marker);
        if (pos == std::string_view::npos) continue;
        auto rest = line.substr(pos + marker.size());
        int n = 0;
        std::size_t k = 0;
        while (k < rest.size() && std::isdigit(static_cast<unsigned char>(rest[k]))) n = n * 10 + (rest[k++] - '0');
        view.n_requested = n;
        break;
    }
    if (view.header_line.empty() || view.values.empty() || view.n_requested < 1) {
        throw BackendError(BackendErrorKind::backend_reported,
                           "mock backend: could not read the examples or the requested count from the prompt");
    }
    return view;
}

// Per-class example groups with the statistics the mocks sample from.
struct ClassModel {
    std::string label;
    std::vector<const std::vector<double>*> rows;
    std::vector<double> spread;  // sample stddev per feature
};

struct ExampleModel {
    std::vector<ClassModel> classes;  // benign first
    std::vector<bool> integral;       // every example value is a whole number
    std::vector<bool> nonnegative;
};

ExampleModel model_examples(const PromptView& view) {
    ExampleModel m;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < view.values.size(); ++r) {
        const auto& label = view.labels[r];
        auto [it, inserted] = index.try_emplace(label, m.classes.size());
        if (inserted) m.classes.push_back({label, {}, {}});
        m.classes[it->second].rows.push_back(&view.values[r]);
    }
    std::stable_partition(m.classes.begin(), m.classes.end(),
                          [](const ClassModel& c) { return c.label == kBenignLabel; });

    const std::size_t width = view.values.front().size();
    m.integral.assign(width, true);
    m.nonnegative.assign(width, true);
    std::vector<double> lo(width, INFINITY), hi(width, -INFINITY);
    for (const auto& row : view.values) {
        for (std::size_t f = 0; f < width && f < row.size(); ++f) {
            m.integral[f] = m.integral[f] && row[f] == std::round(row[f]);
            m.nonnegative[f] = m.nonnegative[f] && row[f] >= 0.0;
            lo[f] = std::min(lo[f], row[f]);
            hi[f] = std::max(hi[f], row[f]);
        }
    }
    for (auto& c : m.classes) {
        c.spread.assign(width, 0.0);
        for (std::size_t f = 0; f < width; ++f) {
            double mean = 0.0;
            for (const auto* row : c.rows) mean += (*row)[f];
            mean /= static_cast<double>(c.rows.size());
            double ss = 0.0;
            for (const auto* row : c.rows) ss += ((*row)[f] - mean) * ((*row)[f] - mean);
            double sd = c.rows.size() > 1 ? std::sqrt(ss / static_cast<double>(c.rows.size() - 1)) : 0.0;
            if (sd == 0.0) sd = 0.05 * (hi[f] - lo[f]);
            c.spread[f] = sd;
        }
    }
    return m;
}

std::string format_value(double v, bool integral) {
    if (integral) return format_number(std::round(v));
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string perturbed_row(Rng& rng, const ExampleModel& m, const ClassModel& cls, double scale,
                          const std::string& label) {
    const auto& base = *cls.rows[rng.below(cls.rows.size())];
    std::string row;
    for (std::size_t f = 0; f < base.size(); ++f) {
        double v = base[f] + scale * cls.spread[f] * rng.normal();
        if (m.nonnegative[f]) v = std::max(v, 0.0);
        row += format_value(v, m.integral[f]);
        row += ',';
    }
    row += label;
    return row;
}

std::string verbatim_row(const std::vector<double>& values, const std::string& label) {
    std::string row;
    for (double v : values) {
        row += format_number(v);
        row += ',';
    }
    row += label;
    return row;
}

int self_evolution_turns(const std::vector<ConversationTurn>& conversation) {
    return std::max(0, static_cast<int>(std::count_if(conversation.begin(), conversation.end(),
                                                      [](const ConversationTurn& t) {
                                                          return t.role == Role::user;
                                                      })) - 1);
}

std::string good_answer(const GenerationRequest& request, const PromptView& view, double noise_scale, Rng& rng) {
    const auto m = model_examples(view);
    const double scale = noise_scale * std::pow(0.5, self_evolution_turns(request.conversation));
    std::string text = "Here are the generated records:\n```csv\n" + view.header_line + "\n";
    for (const auto& cls : m.classes) {
        for (int i = 0; i < view.n_requested; ++i) text += perturbed_row(rng, m, cls, scale, cls.label) + "\n";
    }
    text += "```\n";
    return text;
}

std::string bad_answer(const PromptView& view, double noise_scale, Rng& rng) {
    const auto m = model_examples(view);
    const int total = 2 * view.n_requested;
    std::string text = "Sure! Below is some traffic data similar to your examples.\n" + view.header_line + "\n";
    for (int i = 0; i < total; ++i) {
        const auto& cls = m.classes[static_cast<std::size_t>(i) % m.classes.size()];
        const auto& other = m.classes[(static_cast<std::size_t>(i) + 1) % m.classes.size()];
        switch (i % 4) {
            case 0: {
                // Malformed: rotate through three failure shapes.
                std::string row = perturbed_row(rng, m, cls, noise_scale, cls.label);
                if ((i / 4) % 3 == 0) {
                    row.replace(0, row.find(','), "N/A");
                } else if ((i / 4) % 3 == 1) {
                    row.erase(0, row.find(',') + 1);
                } else {
                    row = "Record " + std::to_string(i + 1) + ": values omitted, traffic looked similar";
                }
                text += row + "\n";
                break;
            }
            case 1: {
                const auto r = static_cast<std::size_t>(i / 4) % view.values.size();
                text += verbatim_row(view.values[r], view.labels[r]) + "\n";
                break;
            }
            default:
                // Label swapped: looks like one class, labeled as the other.
                text += perturbed_row(rng, m, cls, noise_scale, other.label) + "\n";
                break;
        }
    }
    text += "Let me know if you need more samples.\n";
    return text;
}

class MockBackend final : public GenerationBackend {
public:
    MockBackend(bool staged_failure, double noise_scale) : staged_failure_(staged_failure), noise_scale_(noise_scale) {
        if (!(noise_scale >= 0.0)) throw ConfigError("mock noise scale must be >= 0");
    }

    std::string id() const override { return staged_failure_ ? "mock-bad" : "mock-good"; }

    GenerationResponse generate(const GenerationRequest& request) const override {
        request.validate();
        const int round = request.round();
        const auto view = read_prompt(request.conversation);
        Rng rng(derive_seed(request.seed, {static_cast<std::uint64_t>(round),
                                           static_cast<std::uint64_t>(request.batch_index)}));
        const bool asked_better = request.conversation.back().role == Role::user &&
                                  detail::contains_icase(request.conversation.back().text, "generate better data");
        GenerationResponse response;
        response.backend_id = id();
        response.round = round;
        response.raw_text = staged_failure_ && !asked_better ? bad_answer(view, noise_scale_, rng)
                                                             : good_answer(request, view, noise_scale_, rng);
        return response;
    }

private:
    bool staged_failure_;
    double noise_scale_;
};

}  // namespace

std::unique_ptr<GenerationBackend> make_mock_good_backend(double noise_scale) {
    return std::make_unique<MockBackend>(false, noise_scale);
}

std::unique_ptr<GenerationBackend> make_mock_bad_backend(double noise_scale) {
    return std::make_unique<MockBackend>(true, noise_scale);
}

std::unique_ptr<GenerationBackend> make_backend(const BackendConfig& cfg) {
    if (cfg.kind == "mock-good") return make_mock_good_backend(cfg.mock_noise_scale);
    if (cfg.kind == "mock-bad") return make_mock_bad_backend(cfg.mock_noise_scale);
    if (cfg.kind == "http") return make_http_backend({cfg.base_url, "", cfg.timeout_s});
    throw ConfigError("unknown backend kind \"" + cfg.kind + "\" (expected http, mock-good or mock-bad)");
}

}  // namespace synthloop
