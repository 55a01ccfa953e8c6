#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "fewsim/core/errors.hpp"
#include "fewsim/fmlm/fmlm.hpp"
#include "fewsim/kernels/kernels.hpp"

using namespace fewsim;
using namespace fewsim::fmlm;

namespace {

const std::vector<std::string> kCrops = {"a", "b", "c", "d"};
const std::vector<std::string> kPredictors = {"intercept", "x1", "x2"};

Coefficients truth() {
    auto c = Coefficients::zeros(kCrops, kPredictors);
    c.betas = {0.5, -0.8, 0.3,   //
               -0.4, 0.6, 0.9,   //
               1.1, 0.2, -0.7};
    return c;
}

SharePanel synthetic_panel(const Coefficients& coefs, std::size_t rows, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    SharePanel panel;
    for (std::size_t r = 0; r < rows; ++r) {
        PanelRow row{"d" + std::to_string(r % 12), 1990 + static_cast<int>(r / 12), {1.0, n(rng), n(rng)}, {}};
        row.shares = predict(coefs, row.predictors);
        panel.rows.push_back(std::move(row));
    }
    return panel;
}

}  // namespace

TEST_SUITE("fmlm") {

TEST_CASE("hand-computed shares") {
    Coefficients c{{"base", "two", "three"}, {"intercept"}, {std::log(2.0), std::log(3.0)}};
    auto s = predict(c, std::vector<double>{1.0});
    CHECK(s[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
    CHECK(s[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("zero coefficients give equal shares") {
    auto c = Coefficients::zeros({"a", "b", "c", "d", "e", "f"}, kPredictors);
    for (double v : predict(c, std::vector<double>{1.0, 3.0, -2.0})) CHECK(v == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("shares sum to one on random inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    auto c = Coefficients::zeros({"a", "b", "c", "d", "e", "f"}, kPredictors);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        for (auto& b : c.betas) b = u(rng) / 10.0;
        std::vector<double> x = {1.0, u(rng), u(rng)};
        auto s = predict(c, x);
        double total = 0.0;
        for (double v : s) {
            CHECK(v >= 0.0);
            total += v;
        }
        worst = std::max(worst, std::abs(total - 1.0));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(predict(truth(), std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST_CASE("bundled coefficients reproduce the oracle shares") {
    const auto& ds = testing::bundled();
    for (const auto& [clim, expected] : testing::oracles()["fmlm_shares_2022"].items()) {
        auto x = predictors_for_year(ds.climate(clim), ds.fmlm.coefficients.crops, 2022,
                                     ds.fmlm.reference_temperature_C, ds.fmlm.reference_precip_mm);
        auto s = predict(ds.fmlm.coefficients, x);
        for (std::size_t j = 0; j < s.size(); ++j) {
            CHECK(s[j] == doctest::Approx(expected[ds.crops[j].id].get<double>()).epsilon(1e-12));
        }
        double veg_alfalfa = expected["vegetables"].get<double>() + expected["alfalfa"].get<double>();
        CHECK(veg_alfalfa > 0.5);
    }
}

TEST_CASE("analytic gradient matches central differences") {
    auto panel = synthetic_panel(truth(), 60, 3);
    // Perturb shares so the optimum is not at the evaluation points.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& row : panel.rows) {
        double t = 0.0;
        for (auto& s : row.shares) t += (s *= u(rng));
        for (auto& s : row.shares) s /= t;
    }
    std::normal_distribution<double> n(0.0, 1.0);
    const double h = 1e-5;
    for (int point = 0; point < 20; ++point) {
        auto c = Coefficients::zeros(kCrops, kPredictors);
        for (auto& b : c.betas) b = n(rng);
        auto g = gradient(c, panel);
        for (std::size_t i = 0; i < c.betas.size(); ++i) {
            auto up = c, down = c;
            up.betas[i] += h;
            down.betas[i] -= h;
            double fd = (log_likelihood(up, panel) - log_likelihood(down, panel)) / (2.0 * h);
            CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
        }
    }
}

TEST_CASE("fit recovers known coefficients from 5000 rows") {
    auto panel = synthetic_panel(truth(), 5000, 9);
    auto result = fit(panel, kCrops, kPredictors);
    CHECK(result.converged);
    CHECK_FALSE(result.degenerate);
    for (std::size_t i = 0; i < truth().betas.size(); ++i) {
        CHECK(std::abs(result.coefficients.betas[i] - truth().betas[i]) <= 0.05);
    }
    for (std::size_t i = 1; i < result.history.size(); ++i) CHECK(result.history[i] >= result.history[i - 1]);
}

TEST_CASE("fit agrees across kernel backends") {
    auto panel = synthetic_panel(truth(), 800, 21);
    auto before = kernels::active_backend();
    kernels::set_backend(kernels::Backend::scalar);
    auto a = fit(panel, kCrops, kPredictors);
    kernels::set_backend(kernels::Backend::avx2);
    auto b = fit(panel, kCrops, kPredictors);
    kernels::set_backend(before);
    for (std::size_t i = 0; i < a.coefficients.betas.size(); ++i) {
        CHECK(a.coefficients.betas[i] == doctest::Approx(b.coefficients.betas[i]).epsilon(1e-6));
    }
}

TEST_CASE("degenerate crop is flagged and clipped") {
    auto panel = synthetic_panel(truth(), 200, 4);
    for (auto& row : panel.rows) {
        double dropped = row.shares[3];
        row.shares[3] = 0.0;
        row.shares[0] += dropped;
    }
    auto result = fit(panel, kCrops, kPredictors, FitOptions{500, 1e-8, 50.0});
    CHECK(result.degenerate);
    REQUIRE(result.degenerate_crops.size() == 1);
    CHECK(result.degenerate_crops[0] == "d");
    for (double b : result.coefficients.betas) CHECK(std::isfinite(b));
}

TEST_CASE("malformed panels are rejected") {
    auto panel = synthetic_panel(truth(), 10, 1);
    panel.rows[3].shares[0] += 0.2;
    CHECK_THROWS_AS(fit(panel, kCrops, kPredictors), ValidationError);
    auto single = synthetic_panel(truth(), 1, 1);
    CHECK_THROWS_AS(fit(single, kCrops, kPredictors), ValidationError);
}

TEST_CASE("coefficient CSV round trip") {
    testing::TempDir tmp;
    auto c = truth();
    c.betas[4] = 0.1 + 0.2;
    write_coefficients_csv(c, tmp.path() / "c.csv");
    CHECK(read_coefficients_csv(tmp.path() / "c.csv", kCrops, kPredictors) == c);
    auto panel = synthetic_panel(c, 24, 2);
    write_panel_csv(panel, kCrops, kPredictors, tmp.path() / "p.csv");
    auto back = read_panel_csv(tmp.path() / "p.csv", kCrops, kPredictors);
    CHECK(back == panel);
}

TEST_CASE("district areas follow shares, masks and cropland") {
    const auto& ds = testing::bundled();
    const auto& climate = ds.climate("ssp245");
    double all = 0.0;
    for (const auto& d : ds.water.districts) {
        auto areas = project_crop_areas(ds, ds.fmlm.coefficients, climate, d.id, 2030);
        double total = 0.0;
        for (std::size_t j = 0; j < areas.size(); ++j) {
            total += areas[j];
            bool allowed = std::find(d.allowed_crops.begin(), d.allowed_crops.end(), ds.crops[j].id) !=
                           d.allowed_crops.end();
            if (!allowed) CHECK(areas[j] == 0.0);
        }
        CHECK(total == doctest::Approx(d.cropland_in(2030, 2022)).epsilon(1e-12));
        auto half = project_crop_areas(ds, ds.fmlm.coefficients, climate, d.id, 2030, 0.5);
        CHECK(half[0] == doctest::Approx(areas[0] * 0.5));
        all += total;
    }
    CHECK(all > 0.0);
    CHECK_THROWS_AS(project_crop_areas(ds, ds.fmlm.coefficients, climate, "atlantis", 2030), NotFoundError);
    CHECK_THROWS_AS(project_crop_areas(ds, ds.fmlm.coefficients, climate, ds.water.districts[0].id, 2051),
                    ValidationError);
}

TEST_CASE("masking keeps proportions") {
    std::vector<double> s = {0.1, 0.2, 0.3, 0.4};
    auto m = mask_shares(s, kCrops, {"b", "d"});
    CHECK(m[0] == 0.0);
    CHECK(m[1] == doctest::Approx(0.2 / 0.6));
    CHECK(m[3] == doctest::Approx(0.4 / 0.6));
    auto none = mask_shares(s, kCrops, {});
    for (double v : none) CHECK(v == 0.0);
}

}  // TEST_SUITE
