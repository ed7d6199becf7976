#include "synthloop/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "synthloop/error.hpp"
#include "synthloop/kernels.hpp"
#include "synthloop/random.hpp"

namespace synthloop {

using nlohmann::json;

std::string_view to_string(Architecture a) { return a == Architecture::mlp ? "mlp" : "cnn1d"; }

Architecture architecture_from_string(std::string_view text) {
    if (text == "cnn1d") return Architecture::cnn1d;
    if (text == "mlp") return Architecture::mlp;
    throw ConfigError("unknown architecture \"" + std::string(text) + "\" (expected cnn1d or mlp)");
}

void ClassifierConfig::validate(std::size_t input_width) const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be > 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(init_scale >= 0.0)) throw ValidationError("init_scale must be >= 0");
    if (input_width < 1) throw ValidationError("input width must be >= 1");
    if (architecture == Architecture::cnn1d) {
        if (kernel_size < 1 || channels < 1) throw ValidationError("kernel_size and channels must be >= 1");
        if (static_cast<std::size_t>(kernel_size) > input_width) {
            throw ValidationError("kernel_size " + std::to_string(kernel_size) + " exceeds input width " +
                                  std::to_string(input_width));
        }
    } else if (hidden_units < 1) {
        throw ValidationError("hidden_units must be >= 1");
    }
}

const LayerShape& ModelParams::layer(std::string_view name) const {
    for (const auto& l : layers) {
        if (l.name == name) return l;
    }
    throw std::out_of_range("no layer named " + std::string(name));
}

std::span<double> ModelParams::view(std::string_view name) {
    const auto& l = layer(name);
    return std::span<double>(values).subspan(l.offset, l.size());
}

std::span<const double> ModelParams::view(std::string_view name) const {
    const auto& l = layer(name);
    return std::span<const double>(values).subspan(l.offset, l.size());
}

ModelParams make_layout(const ClassifierConfig& cfg, std::size_t input_width) {
    cfg.validate(input_width);
    ModelParams p;
    p.architecture = cfg.architecture;
    p.input_width = input_width;
    std::size_t offset = 0;
    auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
        p.layers.push_back({std::move(name), rows, cols, offset});
        offset += rows * cols;
    };
    if (cfg.architecture == Architecture::mlp) {
        p.units = static_cast<std::size_t>(cfg.hidden_units);
        add("hidden.weight", p.units, input_width);
        add("hidden.bias", p.units, 1);
    } else {
        p.units = static_cast<std::size_t>(cfg.channels);
        p.kernel_size = static_cast<std::size_t>(cfg.kernel_size);
        add("conv.weight", p.units, p.kernel_size);
        add("conv.bias", p.units, 1);
    }
    add("out.weight", 1, p.units);
    add("out.bias", 1, 1);
    p.values.assign(offset, 0.0);
    return p;
}

ModelParams init_params(const ClassifierConfig& cfg, std::size_t input_width) {
    ModelParams p = make_layout(cfg, input_width);
    Rng rng(cfg.init_seed);
    for (auto& v : p.values) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
    if (cfg.init_scale == 0.0) std::fill(p.values.begin(), p.values.end(), 0.0);
    return p;
}

namespace {

// Per-sample activations, reused across the batch.
struct Workspace {
    std::vector<double> pre;   // mlp: [H]; cnn1d: [C x P]
    std::vector<double> act;   // same shape as pre
    std::vector<double> pool;  // cnn1d: [C]
    std::vector<double> delta;

    explicit Workspace(const ModelParams& p) {
        const std::size_t positions =
            p.architecture == Architecture::cnn1d ? p.input_width - p.kernel_size + 1 : 1;
        pre.resize(p.units * positions);
        act.resize(p.units * positions);
        pool.resize(p.units);
        delta.resize(p.units * positions);
    }
};

void check_input(const ModelParams& p, std::span<const double> x) {
    if (x.size() != p.input_width) {
        throw ValidationError("input has " + std::to_string(x.size()) + " values, model expects " +
                              std::to_string(p.input_width));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("input contains a non-finite value");
    }
}

// Returns the clamped logit; fills the workspace for a following backward pass.
double forward_pass(const ModelParams& p, std::span<const double> x, Workspace& ws) {
    const auto out_w = p.view("out.weight");
    const double out_b = p.view("out.bias")[0];
    double z = 0.0;
    if (p.architecture == Architecture::mlp) {
        const auto w = p.view("hidden.weight");
        const auto b = p.view("hidden.bias");
        const std::size_t d = p.input_width;
        for (std::size_t h = 0; h < p.units; ++h) {
            ws.pre[h] = kernels::dot(w.subspan(h * d, d), x) + b[h];
            ws.act[h] = std::max(ws.pre[h], 0.0);
        }
        z = kernels::dot(out_w, std::span<const double>(ws.act).first(p.units)) + out_b;
    } else {
        const auto w = p.view("conv.weight");
        const auto b = p.view("conv.bias");
        const std::size_t k = p.kernel_size;
        const std::size_t positions = p.input_width - k + 1;
        for (std::size_t c = 0; c < p.units; ++c) {
            std::span<double> pre(ws.pre.data() + c * positions, positions);
            std::fill(pre.begin(), pre.end(), b[c]);
            for (std::size_t j = 0; j < k; ++j) kernels::axpy(w[c * k + j], x.subspan(j, positions), pre);
            std::span<double> act(ws.act.data() + c * positions, positions);
            for (std::size_t i = 0; i < positions; ++i) act[i] = std::max(pre[i], 0.0);
            ws.pool[c] = kernels::sum(act) / static_cast<double>(positions);
        }
        z = kernels::dot(out_w, ws.pool) + out_b;
    }
    return std::clamp(z, -kLogitClamp, kLogitClamp);
}

// Accumulates d(loss)/d(params) for one sample given dz = d(loss)/d(logit).
void backward_pass(const ModelParams& p, std::span<const double> x, double dz, Workspace& ws, std::span<double> g) {
    const auto out_w = p.view("out.weight");
    const auto& out_w_l = p.layer("out.weight");
    const auto& out_b_l = p.layer("out.bias");
    std::span<double> g_out_w = g.subspan(out_w_l.offset, out_w_l.size());
    g[out_b_l.offset] += dz;

    if (p.architecture == Architecture::mlp) {
        const auto& w_l = p.layer("hidden.weight");
        const auto& b_l = p.layer("hidden.bias");
        const std::size_t d = p.input_width;
        kernels::axpy(dz, std::span<const double>(ws.act).first(p.units), g_out_w);
        for (std::size_t h = 0; h < p.units; ++h) {
            if (ws.pre[h] <= 0.0) continue;
            const double dh = dz * out_w[h];
            kernels::axpy(dh, x, g.subspan(w_l.offset + h * d, d));
            g[b_l.offset + h] += dh;
        }
    } else {
        const auto& w_l = p.layer("conv.weight");
        const auto& b_l = p.layer("conv.bias");
        const std::size_t k = p.kernel_size;
        const std::size_t positions = p.input_width - k + 1;
        kernels::axpy(dz, ws.pool, g_out_w);
        for (std::size_t c = 0; c < p.units; ++c) {
            const double dpool = dz * out_w[c] / static_cast<double>(positions);
            std::span<double> delta(ws.delta.data() + c * positions, positions);
            const double* pre = ws.pre.data() + c * positions;
            for (std::size_t i = 0; i < positions; ++i) delta[i] = pre[i] > 0.0 ? dpool : 0.0;
            g[b_l.offset + c] += kernels::sum(delta);
            for (std::size_t j = 0; j < k; ++j) {
                g[w_l.offset + c * k + j] += kernels::dot(delta, x.subspan(j, positions));
            }
        }
    }
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Binary cross-entropy in logit space: max(z, 0) - z*y + log(1 + exp(-|z|)).
double bce_from_logit(double z, bool positive) {
    return std::max(z, 0.0) - (positive ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double logit(const ModelParams& params, std::span<const double> x) {
    check_input(params, x);
    Workspace ws(params);
    return forward_pass(params, x, ws);
}

double forward(const ModelParams& params, std::span<const double> x) { return sigmoid(logit(params, x)); }

Prediction predict(const ModelParams& params, std::span<const double> x) {
    return forward(params, x) >= 0.5 ? Prediction::attack : Prediction::benign;
}

double loss_and_grad(const ModelParams& params, std::span<const Sample> batch, std::span<double> grad_out) {
    if (batch.empty()) throw ValidationError("gradient of an empty batch is undefined");
    if (grad_out.size() != params.values.size()) throw ValidationError("gradient buffer has the wrong length");
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    Workspace ws(params);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& s : batch) {
        check_input(params, s.x);
        const double z = forward_pass(params, s.x, ws);
        total += bce_from_logit(z, s.attack);
        const double dz = (sigmoid(z) - (s.attack ? 1.0 : 0.0)) * inv_n;
        backward_pass(params, s.x, dz, ws, grad_out);
    }
    return total * inv_n;
}

double loss(const ModelParams& params, std::span<const Sample> batch) {
    if (batch.empty()) throw ValidationError("loss of an empty batch is undefined");
    Workspace ws(params);
    double total = 0.0;
    for (const auto& s : batch) {
        check_input(params, s.x);
        total += bce_from_logit(forward_pass(params, s.x, ws), s.attack);
    }
    return total / static_cast<double>(batch.size());
}

std::vector<double> grad(const ModelParams& params, std::span<const Sample> batch) {
    std::vector<double> g(params.values.size());
    loss_and_grad(params, batch, g);
    return g;
}

std::vector<Sample> to_samples(const Dataset& data, const NormStats& norm) {
    std::vector<Sample> out;
    out.reserve(data.size());
    for (const auto& r : data.records()) {
        out.push_back({normalize_values(r.values, norm, is_synthetic(r.provenance)), r.label.is_attack()});
    }
    return out;
}

TrainResult train(const ClassifierConfig& cfg, std::span<const Sample> samples) {
    if (samples.empty()) throw ValidationError("cannot train on an empty dataset");
    const bool has_pos = std::any_of(samples.begin(), samples.end(), [](const Sample& s) { return s.attack; });
    const bool has_neg = std::any_of(samples.begin(), samples.end(), [](const Sample& s) { return !s.attack; });
    if (!has_pos || !has_neg) throw ValidationError("training data must contain both benign and attack records");

    TrainResult result{init_params(cfg, samples.front().x.size()), {}};
    std::vector<double> g(result.params.values.size());
    result.history.losses.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double l = loss_and_grad(result.params, samples, g);
        if (!std::isfinite(l)) throw ValidationError("training loss became non-finite at epoch " + std::to_string(epoch));
        result.history.losses.push_back(l);
        kernels::axpy(-cfg.learning_rate, g, result.params.values);
    }
    result.history.epochs_run = cfg.epochs;
    return result;
}

TrainResult train(const ClassifierConfig& cfg, const Dataset& data, const NormStats& norm) {
    const auto samples = to_samples(data, norm);
    return train(cfg, samples);
}

// ---------------------------------------------------------------------------

json to_json(const ClassifierConfig& cfg) {
    return {{"architecture", std::string(to_string(cfg.architecture))},
            {"kernel_size", cfg.kernel_size},
            {"channels", cfg.channels},
            {"hidden_units", cfg.hidden_units},
            {"learning_rate", cfg.learning_rate},
            {"epochs", cfg.epochs},
            {"init_seed", cfg.init_seed},
            {"init_scale", cfg.init_scale}};
}

ClassifierConfig classifier_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("classifier: expected an object");
    ClassifierConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "architecture") cfg.architecture = architecture_from_string(value.get<std::string>());
            else if (key == "kernel_size") cfg.kernel_size = value.get<int>();
            else if (key == "channels") cfg.channels = value.get<int>();
            else if (key == "hidden_units") cfg.hidden_units = value.get<int>();
            else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
            else if (key == "epochs") cfg.epochs = value.get<int>();
            else if (key == "init_seed") cfg.init_seed = value.get<std::uint64_t>();
            else if (key == "init_scale") cfg.init_scale = value.get<double>();
            else throw ConfigError("classifier: unknown key \"" + key + "\"");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("classifier: ") + e.what());
    }
    return cfg;
}

json to_json(const ModelParams& params) {
    json layers = json::array();
    for (const auto& l : params.layers) layers.push_back({{"name", l.name}, {"rows", l.rows}, {"cols", l.cols}});
    return {{"architecture", std::string(to_string(params.architecture))},
            {"input_width", params.input_width},
            {"units", params.units},
            {"kernel_size", params.kernel_size},
            {"layers", layers},
            {"values", params.values}};
}

ModelParams model_params_from_json(const json& j) {
    try {
        ClassifierConfig cfg;
        cfg.architecture = architecture_from_string(j.at("architecture").get<std::string>());
        const auto units = j.at("units").get<int>();
        cfg.channels = units;
        cfg.hidden_units = units;
        if (cfg.architecture == Architecture::cnn1d) cfg.kernel_size = j.at("kernel_size").get<int>();
        ModelParams p = make_layout(cfg, j.at("input_width").get<std::size_t>());
        auto values = j.at("values").get<std::vector<double>>();
        if (values.size() != p.values.size()) throw ParseError("model: parameter count does not match layout");
        for (double v : values) {
            if (!std::isfinite(v)) throw ParseError("model: non-finite parameter");
        }
        p.values = std::move(values);
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

}  // namespace synthloop
