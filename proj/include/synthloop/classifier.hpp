#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "synthloop/dataset.hpp"

namespace synthloop {

enum class Architecture { cnn1d, mlp };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view text);

struct ClassifierConfig {
    Architecture architecture = Architecture::mlp;
    int kernel_size = 3;    // cnn1d
    int channels = 8;       // cnn1d
    int hidden_units = 16;  // mlp
    double learning_rate = 0.05;
    int epochs = 300;
    std::uint64_t init_seed = 0;
    double init_scale = 0.1;

    // Throws ValidationError for a non-positive learning rate, epochs < 1,
    // or (cnn1d) a kernel wider than the input.
    void validate(std::size_t input_width) const;
    bool operator==(const ClassifierConfig&) const = default;
};

struct LayerShape {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
    std::size_t size() const { return rows * cols; }
    bool operator==(const LayerShape&) const = default;
};

// Flat parameter vector plus the layout needed to interpret it.
//
//   mlp:   hidden.weight [H x D], hidden.bias [H], out.weight [1 x H], out.bias [1]
//   cnn1d: conv.weight [C x K], conv.bias [C], out.weight [1 x C], out.bias [1]
//
// The cnn1d treats the feature vector as a one-channel sequence: C filters
// of width K slide over it, ReLU, global average pool, then a dense unit.
struct ModelParams {
    Architecture architecture = Architecture::cnn1d;
    std::size_t input_width = 0;
    std::size_t units = 0;        // hidden units (mlp) or channels (cnn1d)
    std::size_t kernel_size = 0;  // cnn1d only
    std::vector<LayerShape> layers;
    std::vector<double> values;

    const LayerShape& layer(std::string_view name) const;
    std::span<double> view(std::string_view name);
    std::span<const double> view(std::string_view name) const;

    bool operator==(const ModelParams&) const = default;
};

struct TrainHistory {
    std::vector<double> losses;  // mean BCE at the start of each epoch
    int epochs_run = 0;
};

// One normalized input with its binary target (attack = positive).
struct Sample {
    std::vector<double> x;
    bool attack = false;
};

enum class Prediction { benign, attack };

inline constexpr double kLogitClamp = 30.0;

ModelParams make_layout(const ClassifierConfig& cfg, std::size_t input_width);
// Uniform in [-init_scale, init_scale], deterministic per init_seed.
ModelParams init_params(const ClassifierConfig& cfg, std::size_t input_width);

// Pre-sigmoid output, clamped to [-30, 30].
double logit(const ModelParams& params, std::span<const double> x);
double forward(const ModelParams& params, std::span<const double> x);
// Probability >= 0.5 is an attack.
Prediction predict(const ModelParams& params, std::span<const double> x);

double loss(const ModelParams& params, std::span<const Sample> batch);
std::vector<double> grad(const ModelParams& params, std::span<const Sample> batch);
// Mean binary cross-entropy and its gradient in one pass.
double loss_and_grad(const ModelParams& params, std::span<const Sample> batch, std::span<double> grad_out);

std::vector<Sample> to_samples(const Dataset& data, const NormStats& norm);

struct TrainResult {
    ModelParams params;
    TrainHistory history;
};

// Full-batch gradient descent. Needs both classes present.
TrainResult train(const ClassifierConfig& cfg, std::span<const Sample> samples);
TrainResult train(const ClassifierConfig& cfg, const Dataset& data, const NormStats& norm);

nlohmann::json to_json(const ClassifierConfig& cfg);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelParams& params);
ModelParams model_params_from_json(const nlohmann::json& j);

}  // namespace synthloop
