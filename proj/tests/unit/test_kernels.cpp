#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "synthloop/kernels.hpp"
#include "synthloop/random.hpp"

using namespace synthloop;
namespace k = synthloop::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal(0.0, 3.0);
    return v;
}

// Long-double reference, independent of both kernel variants.
long double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return s;
}

double abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
    return s;
}

class KernelIsa : public ::testing::TestWithParam<k::Isa> {
protected:
    void SetUp() override {
        if (!k::isa_supported(GetParam())) GTEST_SKIP() << "CPU lacks " << k::to_string(GetParam());
        saved_ = k::active_isa();
        k::set_active_isa(GetParam());
    }
    void TearDown() override {
        if (k::isa_supported(GetParam())) k::set_active_isa(saved_);
    }
    k::Isa saved_ = k::Isa::scalar;
};

}  // namespace

TEST_P(KernelIsa, DotMatchesReference) {
    Rng rng(1);
    for (std::size_t n = 0; n < 70; ++n) {
        auto a = random_vec(rng, n), b = random_vec(rng, n);
        const double got = k::dot(a, b);
        EXPECT_NEAR(got, static_cast<double>(ref_dot(a, b)), 1e-14 * (abs_sum(a, b) + 1.0)) << "n=" << n;
    }
}

TEST_P(KernelIsa, AxpyExact) {
    Rng rng(2);
    for (std::size_t n = 0; n < 70; ++n) {
        auto x = random_vec(rng, n), y = random_vec(rng, n);
        auto expect = y;
        const double alpha = rng.normal();
        for (std::size_t i = 0; i < n; ++i) expect[i] = std::fma(alpha, x[i], expect[i]);
        k::axpy(alpha, x, y);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], expect[i], 1e-15 * (std::abs(alpha * x[i]) + std::abs(y[i])));
    }
}

TEST_P(KernelIsa, SumMatchesReference) {
    Rng rng(3);
    for (std::size_t n = 0; n < 70; ++n) {
        auto x = random_vec(rng, n);
        long double s = 0, a = 0;
        for (double v : x) {
            s += v;
            a += std::abs(v);
        }
        EXPECT_NEAR(k::sum(x), static_cast<double>(s), 1e-14 * (static_cast<double>(a) + 1.0));
    }
}

INSTANTIATE_TEST_SUITE_P(Isa, KernelIsa, ::testing::Values(k::Isa::scalar, k::Isa::avx2),
                         [](const auto& info) { return std::string(k::to_string(info.param)); });

#if defined(__x86_64__)
TEST(KernelEquivalence, ScalarVsAvx2RandomLengths) {
    if (!k::isa_supported(k::Isa::avx2)) GTEST_SKIP() << "no AVX2";
    Rng rng(4);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = rng.below(300);
        auto a = random_vec(rng, n), b = random_vec(rng, n);
        const double tol = 1e-13 * (abs_sum(a, b) + 1.0);
        EXPECT_NEAR(k::scalar::dot(a.data(), b.data(), n), k::avx2::dot(a.data(), b.data(), n), tol);
        EXPECT_NEAR(k::scalar::sum(a.data(), n), k::avx2::sum(a.data(), n), tol);
        const double alpha = rng.normal();
        auto y1 = b, y2 = b;
        k::scalar::axpy(alpha, a.data(), y1.data(), n);
        k::avx2::axpy(alpha, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14 * (std::abs(y1[i]) + 1.0));
    }
}
#endif

TEST(KernelDispatch, SwitchAndNames) {
    EXPECT_TRUE(k::isa_supported(k::Isa::scalar));
    EXPECT_EQ(k::to_string(k::Isa::scalar), "scalar");
    EXPECT_EQ(k::to_string(k::Isa::avx2), "avx2");
    const auto saved = k::active_isa();
    k::set_active_isa(k::Isa::scalar);
    EXPECT_EQ(k::active_isa(), k::Isa::scalar);
    if (!k::isa_supported(k::Isa::avx2)) {
        EXPECT_THROW(k::set_active_isa(k::Isa::avx2), std::invalid_argument);
    }
    k::set_active_isa(saved);
}

TEST(KernelDispatch, LengthMismatchRejected) {
    std::vector<double> a(3), b(4);
    EXPECT_THROW(k::dot(a, b), std::invalid_argument);
    EXPECT_THROW(k::axpy(1.0, a, b), std::invalid_argument);
}
