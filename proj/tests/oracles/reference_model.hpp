#pragma once

// Plain re-implementation of the classifier forward pass and loss, written
// straight from the layer layout without the kernels. Used as the oracle for
// the analytic gradient and for hand-checked activations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "synthloop/classifier.hpp"

namespace oracle {

struct RefOutput {
    double logit = 0.0;
    // Smallest |pre-activation| seen; finite differences are unreliable when
    // this is within a step of zero.
    double nearest_kink = std::numeric_limits<double>::infinity();
};

inline RefOutput ref_forward(const synthloop::ModelParams& p, std::span<const double> x) {
    RefOutput out;
    const auto& v = p.values;
    const std::size_t D = p.input_width, U = p.units;
    std::vector<double> act(U, 0.0);
    if (p.architecture == synthloop::Architecture::mlp) {
        const std::size_t w0 = p.layer("hidden.weight").offset, b0 = p.layer("hidden.bias").offset;
        for (std::size_t h = 0; h < U; ++h) {
            double z = v[b0 + h];
            for (std::size_t d = 0; d < D; ++d) z += v[w0 + h * D + d] * x[d];
            out.nearest_kink = std::min(out.nearest_kink, std::abs(z));
            act[h] = z > 0 ? z : 0.0;
        }
    } else {
        const std::size_t K = p.kernel_size, P = D - K + 1;
        const std::size_t w0 = p.layer("conv.weight").offset, b0 = p.layer("conv.bias").offset;
        for (std::size_t c = 0; c < U; ++c) {
            double pooled = 0.0;
            for (std::size_t pos = 0; pos < P; ++pos) {
                double z = v[b0 + c];
                for (std::size_t k = 0; k < K; ++k) z += v[w0 + c * K + k] * x[pos + k];
                out.nearest_kink = std::min(out.nearest_kink, std::abs(z));
                pooled += z > 0 ? z : 0.0;
            }
            act[c] = pooled / static_cast<double>(P);
        }
    }
    const std::size_t o0 = p.layer("out.weight").offset, ob = p.layer("out.bias").offset;
    double z = v[ob];
    for (std::size_t u = 0; u < U; ++u) z += v[o0 + u] * act[u];
    out.logit = std::clamp(z, -synthloop::kLogitClamp, synthloop::kLogitClamp);
    return out;
}

// Mean binary cross-entropy, log(1 + e^-z) for attacks and log(1 + e^z) otherwise.
inline double ref_loss(const synthloop::ModelParams& p, std::span<const synthloop::Sample> batch) {
    double total = 0.0;
    for (const auto& s : batch) {
        const double z = ref_forward(p, s.x).logit;
        const double m = s.attack ? -z : z;
        total += std::log1p(std::exp(m));
    }
    return total / static_cast<double>(batch.size());
}

}  // namespace oracle
