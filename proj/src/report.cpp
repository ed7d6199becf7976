#include <cstdio>
#include <fstream>
#include <sstream>

#include "synthloop/error.hpp"
#include "synthloop/experiment.hpp"

namespace synthloop {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

json to_json(const ExperimentResult& result) {
    json grid = json::array();
    for (const auto& c : result.grid) {
        json row = {{"regime", std::string(to_string(c.key.regime))},
                    {"count", c.key.count},
                    {"seed", c.key.seed},
                    {"accuracy", nullptr},
                    {"precision", nullptr},
                    {"recall", nullptr},
                    {"f1", nullptr},
                    {"rounds_used", c.rounds_used},
                    {"verdict", c.verdict ? json(std::string(to_string(*c.verdict))) : json(nullptr)},
                    {"status", std::string(to_string(c.status))}};
        if (c.metrics) {
            row["accuracy"] = c.metrics->accuracy;
            row["precision"] = c.metrics->precision;
            row["recall"] = c.metrics->recall;
            row["f1"] = c.metrics->f1;
            row["n"] = c.metrics->n;
        }
        json rounds = json::array();
        for (auto v : c.round_verdicts) rounds.push_back(std::string(to_string(v)));
        row["round_verdicts"] = rounds;
        if (!c.error.empty()) row["error"] = c.error;
        grid.push_back(std::move(row));
    }

    json summary = json::array();
    for (const auto& s : result.summary()) {
        summary.push_back({{"regime", std::string(to_string(s.regime))},
                           {"count", s.count},
                           {"n_ok", s.n_ok},
                           {"mean_accuracy", opt(s.mean_accuracy)},
                           {"std_accuracy", opt(s.std_accuracy)},
                           {"mean_f1", opt(s.mean_f1)},
                           {"std_f1", opt(s.std_f1)},
                           {"abs_improvement_vs_real_only", opt(s.abs_improvement)},
                           {"rel_improvement_vs_real_only", opt(s.rel_improvement)}});
    }

    const auto& m = result.meta;
    json meta = {{"backend", m.backend_kind},
                 {"model", m.model_name},
                 {"target_attack", m.target_attack},
                 {"config_hash", m.config_hash},
                 {"kernel_isa", m.kernel_isa},
                 {"started_at", m.started_at},
                 {"finished_at", m.finished_at},
                 {"n_cells", result.grid.size()},
                 {"n_failed_cells", result.failed_cells()},
                 {"more_is_not_always_better", result.more_is_not_always_better()}};
    return {{"meta", meta}, {"grid", grid}, {"summary", summary}};
}

ExperimentResult experiment_result_from_json(const json& j) {
    ExperimentResult result;
    try {
        const auto& m = j.at("meta");
        result.meta.backend_kind = m.at("backend").get<std::string>();
        result.meta.model_name = m.value("model", "");
        result.meta.target_attack = m.value("target_attack", "");
        result.meta.config_hash = m.at("config_hash").get<std::string>();
        result.meta.kernel_isa = m.value("kernel_isa", "");
        result.meta.started_at = m.value("started_at", "");
        result.meta.finished_at = m.value("finished_at", "");
        for (const auto& row : j.at("grid")) {
            CellResult c;
            c.key.regime = regime_from_string(row.at("regime").get<std::string>());
            c.key.count = row.at("count").get<int>();
            c.key.seed = row.at("seed").get<std::uint64_t>();
            c.rounds_used = row.at("rounds_used").get<int>();
            if (!row.at("verdict").is_null()) c.verdict = verdict_from_string(row.at("verdict").get<std::string>());
            c.status = cell_status_from_string(row.value("status", "ok"));
            if (auto acc = opt_double(row, "accuracy")) {
                EvalMetrics em;
                em.accuracy = *acc;
                em.precision = row.at("precision").get<double>();
                em.recall = row.at("recall").get<double>();
                em.f1 = row.at("f1").get<double>();
                em.n = row.value("n", std::size_t{0});
                c.metrics = em;
            }
            if (row.contains("round_verdicts")) {
                for (const auto& v : row.at("round_verdicts")) {
                    c.round_verdicts.push_back(verdict_from_string(v.get<std::string>()));
                }
            }
            c.error = row.value("error", "");
            result.grid.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return result;
}

void write_report(const ExperimentResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report " + path.string());
    out << to_json(result).dump(2) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

ExperimentResult read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ParseError("report " + path.string() + " is not valid JSON");
    return experiment_result_from_json(j);
}

std::string grid_csv(const ExperimentResult& result) {
    std::string out = "regime,count,seed,accuracy,precision,recall,f1,rounds_used,verdict,status\n";
    for (const auto& c : result.grid) {
        out += std::string(to_string(c.key.regime)) + ',' + std::to_string(c.key.count) + ',' +
               std::to_string(c.key.seed) + ',';
        if (c.metrics) {
            out += format_number(c.metrics->accuracy) + ',' + format_number(c.metrics->precision) + ',' +
                   format_number(c.metrics->recall) + ',' + format_number(c.metrics->f1) + ',';
        } else {
            out += ",,,,";
        }
        out += std::to_string(c.rounds_used) + ',';
        out += c.verdict ? std::string(to_string(*c.verdict)) : std::string();
        out += ',' + std::string(to_string(c.status)) + '\n';
    }
    return out;
}

void write_grid_csv(const ExperimentResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << grid_csv(result);
}

std::string summarize(const ExperimentResult& result) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-15s %6s %4s  %-17s %-17s %10s %10s\n", "regime", "count", "n", "accuracy",
                  "f1", "abs(pp)", "rel(%)");
    out += line;
    auto pm = [](const std::optional<double>& m, const std::optional<double>& s) {
        char buf[32];
        if (!m) return std::string("-");
        std::snprintf(buf, sizeof buf, "%.4f +/- %.4f", *m, s.value_or(0.0));
        return std::string(buf);
    };
    auto num = [](const std::optional<double>& v, double scale) {
        char buf[32];
        if (!v) return std::string("-");
        std::snprintf(buf, sizeof buf, "%+.2f", *v * scale);
        return std::string(buf);
    };
    for (const auto& r : result.summary()) {
        std::snprintf(line, sizeof line, "%-15s %6d %4d  %-17s %-17s %10s %10s\n",
                      std::string(to_string(r.regime)).c_str(), r.count, r.n_ok,
                      pm(r.mean_accuracy, r.std_accuracy).c_str(), pm(r.mean_f1, r.std_f1).c_str(),
                      num(r.abs_improvement, 100.0).c_str(), num(r.rel_improvement, 100.0).c_str());
        out += line;
    }
    out += "improvement columns compare mean accuracy with real_only: abs in percentage points, rel in percent\n";
    out += "failed cells: " + std::to_string(result.failed_cells()) + " of " + std::to_string(result.grid.size()) + "\n";
    if (result.more_is_not_always_better()) {
        out += "note: mixed-regime accuracy peaks at an interior synthetic count (more is not always better)\n";
    }
    return out;
}

}  // namespace synthloop
