#include <random>
#include <vector>

#include "doctest.h"
#include "support.hpp"

#include "fewsim/kernels/kernels.hpp"

using namespace fewsim::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
    return s;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference values") {
    const auto& k = scalar_table();
    std::vector<double> a = {1, 2, 3, 4, 5}, b = {5, 4, 3, 2, 1};
    CHECK(k.dot(a.data(), b.data(), 5) == 35.0);
    CHECK(k.sum(a.data(), 5) == 15.0);
    k.axpy(2.0, a.data(), b.data(), 5);
    CHECK(b == std::vector<double>{7, 8, 9, 10, 11});
    std::vector<double> m = {1, 2, 3, 4, 5, 6}, x = {1, 1, 1}, y(2);
    k.gemv(m.data(), 2, 3, x.data(), y.data());
    CHECK(y == std::vector<double>{6, 15});
    std::vector<double> w = {1, 2}, g(3, 1.0);
    k.gemv_t_acc(m.data(), 2, 3, w.data(), g.data());
    CHECK(g == std::vector<double>{10, 13, 16});
    std::vector<double> blocks(2);
    std::vector<double> months(24, 1.0);
    k.block_sums(months.data(), 24, 12, blocks.data());
    CHECK(blocks == std::vector<double>{12, 12});
}

TEST_CASE("avx2 variants match the scalar reference") {
    const KernelTable* fast = avx2_table();
    if (fast == nullptr || !cpu_supports(Backend::avx2)) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    const auto& ref = scalar_table();
    std::mt19937_64 rng(42);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 100u, 1001u}) {
        auto a = random_vector(rng, n), b = random_vector(rng, n);
        double tol = 1e-13 * (abs_sum(a, b) + 1.0);
        CHECK(std::abs(fast->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::abs(fast->sum(a.data(), n) - ref.sum(a.data(), n)) <= 1e-13 * (n * 10.0 + 1.0));

        auto y1 = b, y2 = b;
        ref.axpy(0.37, a.data(), y1.data(), n);
        fast->axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1}, {5, 15}, {372, 15}, {33, 9}}) {
        auto m = random_vector(rng, rows * cols), x = random_vector(rng, cols), w = random_vector(rng, rows);
        std::vector<double> y1(rows), y2(rows), g1(cols, 0.5), g2(cols, 0.5);
        ref.gemv(m.data(), rows, cols, x.data(), y1.data());
        fast->gemv(m.data(), rows, cols, x.data(), y2.data());
        for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(y1[r] - y2[r]) <= 1e-12 * (100.0 * cols));
        ref.gemv_t_acc(m.data(), rows, cols, w.data(), g1.data());
        fast->gemv_t_acc(m.data(), rows, cols, w.data(), g2.data());
        for (std::size_t c = 0; c < cols; ++c) CHECK(std::abs(g1[c] - g2[c]) <= 1e-12 * (100.0 * rows));
    }
    for (std::size_t block : {1u, 4u, 12u}) {
        auto x = random_vector(rng, block * 29);
        std::vector<double> o1(29), o2(29);
        ref.block_sums(x.data(), x.size(), block, o1.data());
        fast->block_sums(x.data(), x.size(), block, o2.data());
        for (std::size_t i = 0; i < 29; ++i) CHECK(std::abs(o1[i] - o2[i]) <= 1e-12 * (10.0 * block));
    }
}

TEST_CASE("backend can be forced") {
    auto before = active_backend();
    CHECK(set_backend(Backend::scalar) == Backend::scalar);
    CHECK(&active() == &scalar_table());
    set_backend(before);
    CHECK(to_string(Backend::avx2) == "avx2");
}

}  // TEST_SUITE
