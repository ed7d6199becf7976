#pragma once

#include <cstddef>

#include "synthloop/classifier.hpp"
#include "synthloop/dataset.hpp"

namespace synthloop {

// Binary confusion counts with attack as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t n() const { return tp + fp + fn + tn; }
    void add(bool truth_attack, bool predicted_attack);
    bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t n = 0;
};

// Precision, recall and F1 are 0 when their denominators vanish.
EvalMetrics metrics_from(const ConfusionMatrix& cm);

ConfusionMatrix confusion(const ModelParams& params, const Dataset& test, const NormStats& norm);
ConfusionMatrix confusion(const ModelParams& params, std::span<const Sample> test);

inline EvalMetrics evaluate(const ModelParams& params, const Dataset& test, const NormStats& norm) {
    return metrics_from(confusion(params, test, norm));
}

}  // namespace synthloop
