#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner-loop kernels used by the classifier. Every kernel has a scalar
// reference implementation and an AVX2/FMA variant; the variant is chosen
// once at runtime from CPUID and may be forced with SYNTHLOOP_KERNELS=scalar
// (or =avx2) in the environment.
namespace synthloop::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
// Throws std::invalid_argument when the CPU lacks `isa`.
void set_active_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> x);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace avx2

}  // namespace synthloop::kernels
