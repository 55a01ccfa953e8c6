#include "fewsim/kernels/kernels.hpp"

namespace fewsim::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* a, std::size_t rows, std::size_t cols, const double* w, double* g) {
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(w[r], a + r * cols, g, cols);
}

void block_sums_scalar(const double* x, std::size_t n, std::size_t block, double* out) {
    for (std::size_t b = 0; b * block < n; ++b) out[b] = sum_scalar(x + b * block, block);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{dot_scalar,  sum_scalar,        axpy_scalar,
                                   gemv_scalar, gemv_t_acc_scalar, block_sums_scalar};
    return table;
}

}  // namespace fewsim::kernels
