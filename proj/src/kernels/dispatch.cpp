#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "synthloop/kernels.hpp"

namespace synthloop::kernels {

namespace {

struct Table {
    Isa isa;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
};

constexpr Table kScalar{Isa::scalar, &scalar::dot, &scalar::axpy, &scalar::sum};
#if defined(SYNTHLOOP_HAVE_AVX2_TU)
constexpr Table kAvx2{Isa::avx2, &avx2::dot, &avx2::axpy, &avx2::sum};
#endif

const Table* table_for(Isa isa) {
#if defined(SYNTHLOOP_HAVE_AVX2_TU)
    if (isa == Isa::avx2) return &kAvx2;
#endif
    (void)isa;
    return &kScalar;
}

const Table* pick_default() {
    if (const char* forced = std::getenv("SYNTHLOOP_KERNELS")) {
        const std::string want(forced);
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && isa_supported(Isa::avx2)) return table_for(Isa::avx2);
    }
    return isa_supported(Isa::avx2) ? table_for(Isa::avx2) : &kScalar;
}

std::atomic<const Table*>& active() {
    static std::atomic<const Table*> table{pick_default()};
    return table;
}

inline const Table& current() { return *active().load(std::memory_order_relaxed); }

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
    if (isa == Isa::scalar) return true;
#if defined(SYNTHLOOP_HAVE_AVX2_TU)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa active_isa() { return current().isa; }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) throw std::invalid_argument("kernel ISA not supported on this CPU: " + std::string(to_string(isa)));
    active().store(table_for(isa), std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    return current().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    current().axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return current().sum(x.data(), x.size()); }

}  // namespace synthloop::kernels
