#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the FMLM fit and result aggregation.
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2/FMA
// variant. The variant is chosen once at startup from the CPU feature flags;
// FEWSIM_SIMD=scalar|avx2 in the environment overrides the choice.

namespace fewsim::kernels {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend backend);

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// y[r] = sum_c A[r, c] * x[c], A row-major rows x cols
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    /// g[c] += sum_r A[r, c] * w[r]
    void (*gemv_t_acc)(const double* a, std::size_t rows, std::size_t cols, const double* w, double* g);
    /// out[b] = sum of x[b*block .. b*block+block); n must be a multiple of block
    void (*block_sums)(const double* x, std::size_t n, std::size_t block, double* out);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports(Backend backend);

/// Backend currently in use.
Backend active_backend();
/// Forces a backend (falls back to scalar if unsupported). Returns the backend now active.
Backend set_backend(Backend backend);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
    active().gemv(a.data(), rows, cols, x.data(), y.data());
}
inline void gemv_t_acc(std::span<const double> a, std::size_t rows, std::size_t cols,
                       std::span<const double> w, std::span<double> g) {
    active().gemv_t_acc(a.data(), rows, cols, w.data(), g.data());
}
inline void block_sums(std::span<const double> x, std::size_t block, std::span<double> out) {
    active().block_sums(x.data(), x.size(), block, out.data());
}

}  // namespace fewsim::kernels
