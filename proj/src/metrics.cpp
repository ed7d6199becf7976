#include "synthloop/metrics.hpp"

#include "synthloop/error.hpp"

namespace synthloop {

void ConfusionMatrix::add(bool truth_attack, bool predicted_attack) {
    if (truth_attack) {
        ++(predicted_attack ? tp : fn);
    } else {
        ++(predicted_attack ? fp : tn);
    }
}

EvalMetrics metrics_from(const ConfusionMatrix& cm) {
    const std::size_t n = cm.n();
    if (n == 0) throw ValidationError("metrics of an empty confusion matrix are undefined");
    EvalMetrics m;
    m.n = n;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
    m.precision = cm.tp + cm.fp == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    m.recall = cm.tp + cm.fn == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

ConfusionMatrix confusion(const ModelParams& params, std::span<const Sample> test) {
    if (test.empty()) throw ValidationError("cannot evaluate on an empty test set");
    ConfusionMatrix cm;
    for (const auto& s : test) cm.add(s.attack, predict(params, s.x) == Prediction::attack);
    return cm;
}

ConfusionMatrix confusion(const ModelParams& params, const Dataset& test, const NormStats& norm) {
    if (test.empty()) throw ValidationError("cannot evaluate on an empty test set");
    const auto samples = to_samples(test, norm);
    return confusion(params, samples);
}

}  // namespace synthloop
