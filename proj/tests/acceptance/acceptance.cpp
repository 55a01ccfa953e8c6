// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"

#include "fewsim/coupling/engine.hpp"
#include "fewsim/energy/energy.hpp"
#include "fewsim/fmlm/fmlm.hpp"
#include "fewsim/indices/indices.hpp"
#include "fewsim/middleware/case_manager.hpp"
#include "fewsim/middleware/grid.hpp"

#include "../common/allocation_oracle.hpp"
#include "../common/standalone.hpp"

using namespace fewsim;
using namespace fewsim::middleware;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

CaseConfig study_case(const std::string& name, double wue_upper = 30.0) {
    return {name, "ssp245", {{"municipal_wue", 0, wue_upper, 10}, {"household_eue", 0, 20, 10}, {"irrigation_ie", 0, 20, 10}}};
}

// Grid run shared by the criteria that audit stored results.
struct GridRun {
    double submit_ms = 0.0;
    double elapsed_s = 0.0;
    std::size_t workers = 0;
    std::map<std::string, ScenarioDocument> docs;
    bool finished = false;
};

Outcome grid_names(const GridRun& run) {
    auto specs = expand_scenario_grid(study_case("grid"));
    std::set<std::string> names;
    for (const auto& s : specs) names.insert(s.name);
    Outcome o;
    o.pass = specs.size() == 36 && names.size() == 36 && run.docs.size() == 36;
    for (const char* n : {"ssp245_101010", "ssp245_201010", "ssp245_301010", "ssp245_base"}) {
        if (!names.contains(n) || !run.docs.contains(n)) o.pass = false;
    }
    o.detail = fmt::format("{} scenarios expanded, {} stored", specs.size(), run.docs.size());
    return o;
}

Outcome water_balance(const StudyAreaDataset& ds, const GridRun& run) {
    std::size_t checks = 0, bad = 0;
    double worst = 0.0;
    for (const auto& [name, doc] : run.docs) {
        const auto& r = doc.result;
        for (const auto& n : ds.demand_nodes()) {
            const auto& dem = r.get(n.branch(), "demand").values;
            const auto& del = r.get(n.branch(), "delivered").values;
            const auto& un = r.get(n.branch(), "unmet").values;
            for (std::size_t t = 0; t < dem.size(); ++t) {
                double err = std::abs(del[t] + un[t] - dem[t]) / std::max(dem[t], 1.0);
                worst = std::max(worst, err);
                ++checks;
                if (err > 1e-9 || del[t] < 0.0 || un[t] < 0.0) ++bad;
            }
        }
        for (const auto& s : ds.water.sources) {
            if (s.kind == SourceKind::residual) continue;
            const auto& del = r.get(s.branch(), "delivered").values;
            const auto& av = r.get(s.branch(), "availability").values;
            for (std::size_t t = 0; t < del.size(); ++t) {
                ++checks;
                if (del[t] > av[t] * (1.0 + 1e-9) + 1e-9) ++bad;
            }
        }
    }
    return {bad == 0 && checks > 0, fmt::format("{} checks, {} violations, worst balance error {:.2e}", checks, bad, worst)};
}

Outcome energy_balance(const StudyAreaDataset& ds, const GridRun& run) {
    const auto& plants = ds.energy.plants;
    std::size_t checks = 0, bad_balance = 0, bad_merit = 0;
    for (const auto& [name, doc] : run.docs) {
        const auto& r = doc.result;
        const auto& gen = r.get("energy/supply", "generation").values;
        const auto& unserved = r.get("energy/supply", "unserved").values;
        const auto& gross = r.get("energy/supply", "gross_demand").values;
        const auto& net = r.get("energy/demand", "demand").values;
        std::vector<const std::vector<double>*> pg;
        for (const auto& p : plants) pg.push_back(&r.get(p.branch(), "generation").values);
        for (std::size_t t = 0; t < gen.size(); ++t) {
            YearMonth ym = r.horizon.at(t);
            ++checks;
            if (rel_diff(gen[t] + unserved[t], gross[t]) > 1e-9) ++bad_balance;
            if (rel_diff(gross[t], net[t] / (1.0 - ds.energy.loss_fraction)) > 1e-9) ++bad_balance;
            // A plant may run only when every cheaper plant is at its capability.
            for (std::size_t i = 0; i < plants.size(); ++i) {
                bool runs = (*pg[i])[t] > 0.0;
                for (std::size_t j = 0; j < plants.size(); ++j) {
                    bool cheaper = plants[j].merit_rank < plants[i].merit_rank;
                    if (!(cheaper && runs) && !(j == i && unserved[t] > 0.0)) continue;
                    double cap = energy::monthly_capability_GWh(plants[j].capacity_MW, ym) * plants[j].capacity_factor;
                    if ((*pg[j])[t] < cap * (1.0 - 1e-9)) ++bad_merit;
                }
            }
        }
    }
    return {bad_balance == 0 && bad_merit == 0 && checks > 0,
            fmt::format("{} months, {} balance violations, {} merit-order violations", checks, bad_balance, bad_merit)};
}

Outcome wue_linearity(const GridRun& run) {
    auto series = [&](const std::string& name) -> const std::vector<double>& {
        return run.docs.at(name).result.get("water/demand/municipal", "delivered").values;
    };
    const auto& base = series("ssp245_base");
    const auto& w10 = series("ssp245_101010");
    const auto& w20 = series("ssp245_201010");
    const auto& w30 = series("ssp245_301010");
    double worst = 0.0;
    std::size_t non_monotone = 0;
    for (std::size_t t = 0; t < base.size(); ++t) {
        worst = std::max(worst, rel_diff(w10[t], 0.9 * base[t]));
        if (!(w10[t] >= w20[t] && w20[t] >= w30[t])) ++non_monotone;
    }
    bool strictly = std::accumulate(w10.begin(), w10.end(), 0.0) > std::accumulate(w20.begin(), w20.end(), 0.0) &&
                    std::accumulate(w20.begin(), w20.end(), 0.0) > std::accumulate(w30.begin(), w30.end(), 0.0);
    return {worst <= 1e-9 && non_monotone == 0 && strictly,
            fmt::format("worst relative error vs 0.9 x base {:.2e}, {} non-monotone months", worst, non_monotone)};
}

fmlm::SharePanel synthetic_panel(const fmlm::Coefficients& coefs, std::size_t rows, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    fmlm::SharePanel panel;
    for (std::size_t r = 0; r < rows; ++r) {
        fmlm::PanelRow row{"d" + std::to_string(r % 12), 1990 + static_cast<int>(r / 12), {1.0, n(rng), n(rng)}, {}};
        row.shares = fmlm::predict(coefs, row.predictors);
        panel.rows.push_back(std::move(row));
    }
    return panel;
}

Outcome fmlm_checks() {
    const std::vector<std::string> crops = {"a", "b", "c", "d"};
    const std::vector<std::string> predictors = {"intercept", "x1", "x2"};
    auto truth = fmlm::Coefficients::zeros(crops, predictors);
    truth.betas = {0.5, -0.8, 0.3, -0.4, 0.6, 0.9, 1.1, 0.2, -0.7};

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    auto panel = synthetic_panel(truth, 60, 3);
    for (auto& row : panel.rows) {
        double t = 0.0;
        for (auto& s : row.shares) t += (s *= u(rng));
        for (auto& s : row.shares) s /= t;
    }
    double worst_grad = 0.0;
    const double h = 1e-5;
    for (int point = 0; point < 20; ++point) {
        auto c = fmlm::Coefficients::zeros(crops, predictors);
        for (auto& b : c.betas) b = n(rng);
        auto g = fmlm::gradient(c, panel);
        for (std::size_t i = 0; i < c.betas.size(); ++i) {
            auto up = c, down = c;
            up.betas[i] += h;
            down.betas[i] -= h;
            double fd = (fmlm::log_likelihood(up, panel) - fmlm::log_likelihood(down, panel)) / (2.0 * h);
            worst_grad = std::max(worst_grad, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
        }
    }

    auto fitted = fmlm::fit(synthetic_panel(truth, 5000, 9), crops, predictors);
    double worst_coef = 0.0;
    for (std::size_t i = 0; i < truth.betas.size(); ++i) {
        worst_coef = std::max(worst_coef, std::abs(fitted.coefficients.betas[i] - truth.betas[i]));
    }

    std::uniform_real_distribution<double> wide(-30.0, 30.0);
    auto c = fmlm::Coefficients::zeros({"a", "b", "c", "d", "e", "f"}, predictors);
    double worst_sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        for (auto& b : c.betas) b = wide(rng) / 10.0;
        std::vector<double> x = {1.0, wide(rng), wide(rng)};
        double total = 0.0;
        for (double v : fmlm::predict(c, x)) total += v;
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
    return {worst_grad <= 1e-5 && fitted.converged && worst_coef <= 0.05 && worst_sum <= 1e-12,
            fmt::format("gradient error {:.1e}, coefficient error {:.4f}, share-sum error {:.1e}", worst_grad,
                        worst_coef, worst_sum)};
}

Outcome coupling_checks(const StudyAreaDataset& bundled, const GridRun& run) {
    auto ds = standalone::decoupled(bundled);
    auto coupled = coupling::run_scenario(ds, {"ssp245_base", "ssp245", {}});
    auto water_alone = standalone::water_run(ds, "ssp245");
    auto nodes = ds.demand_nodes();
    const auto& climate = ds.climate("ssp245");
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < ds.horizon.months(); ++t) {
        const auto& a = water_alone[t];
        for (std::size_t d = 0; d < nodes.size(); ++d) {
            if (coupled.get(nodes[d].branch(), "delivered").values[t] != a.delivered_to(d)) ++mismatches;
            if (coupled.get(nodes[d].branch(), "unmet").values[t] != a.unmet[d]) ++mismatches;
        }
        YearMonth ym = ds.horizon.at(t);
        double net = 0.0;
        for (double v : energy::sector_demand(ds.energy, climate, ym, 0.0)) net += v;
        auto alone = energy::dispatch(ds.energy.plants, net, ds.energy.loss_fraction, ds.energy.reserve_margin,
                                      ds.energy.load_factor, ym);
        for (std::size_t p = 0; p < ds.energy.plants.size(); ++p) {
            if (coupled.get(ds.energy.plants[p].branch(), "generation").values[t] != alone.generation[p]) ++mismatches;
        }
    }

    double residual = 0.0;
    int iterations = 0;
    bool warned = false;
    std::vector<const ScenarioResult*> results;
    for (const auto& [name, doc] : run.docs) results.push_back(&doc.result);
    auto other = coupling::run_scenario(bundled, {"ssp585_base", "ssp585", {}});
    results.push_back(&other);
    for (const auto* r : results) {
        residual = std::max(residual, r->max_residual);
        for (int it : r->iterations) iterations = std::max(iterations, it);
        warned = warned || r->warning;
    }

    const ScenarioSpec spec{"ssp245_201010", "ssp245", {{"household_eue", 10}, {"irrigation_ie", 10}, {"municipal_wue", 20}}};
    auto a = coupling::run_scenario(bundled, spec);
    auto b = coupling::run_scenario(bundled, spec);
    bool identical = a == b && run.docs.contains(spec.name) && run.docs.at(spec.name).result == a;

    return {mismatches == 0 && residual < 1e-6 && iterations <= 10 && !warned && identical,
            fmt::format("decoupled mismatches {}, max residual {:.3e}, max iterations {}, reruns {}", mismatches, residual,
                        iterations, identical ? "identical" : "differ")};
}

Outcome allocation_oracle() {
    auto grid = oracle::instance_grid();
    std::size_t mismatches = 0;
    std::string first;
    for (const auto& in : grid) {
        if (oracle::gap(in) > 1e-9 && mismatches++ == 0) first = in.describe();
    }
    std::string detail = fmt::format("{} instances, {} mismatches", grid.size(), mismatches);
    if (!first.empty()) detail += "; first: " + first;
    return {grid.size() >= 200 && mismatches == 0, detail};
}

Outcome indices_checks(const StudyAreaDataset& ds, const GridRun& run) {
    using namespace fewsim::indices;
    std::size_t values = 0, out_of_range = 0, bad_identity = 0;
    for (const auto& [name, doc] : run.docs) {
        for (int year = ds.horizon.first_year(); year <= ds.horizon.last_year(); ++year) {
            auto v = compute_indices(doc.result, ds, year);
            for (const auto& iv : v.values) {
                if (iv.flagged) continue;
                ++values;
                if (!(iv.value >= 0.0 && iv.value <= 1.0)) ++out_of_range;
            }
            auto in = index_inputs(doc.result, ds, year);
            double weighted = 0.0;
            for (std::size_t s = 0; s < in.sector_delivered.size(); ++s) {
                if (in.sector_delivered[s] > 0.0) {
                    weighted += (in.sector_delivered[s] / in.delivered) * (in.sector_gw[s] / in.sector_delivered[s]);
                }
            }
            if (std::abs(weighted - v[Index::regional_gw_reliance].value) > 1e-9) ++bad_identity;
        }
    }

    Horizon year{{2022, 1}, {2022, 12}};
    ScenarioResult fixture;
    fixture.spec = {"fixture", "ssp245", {}};
    fixture.horizon = year;
    fixture.series["energy/demand"]["demand"] = make_series(year, Unit::GWh_per_month, 10.0);
    fixture.series["energy/supply"]["emissions"] = make_series(year, Unit::tCO2_per_month, 0.0);
    double renewable = -1.0;
    for (const auto& p : ds.energy.plants) {
        if (!is_renewable(p.fuel)) continue;
        fixture.series[p.branch()]["generation"] = make_series(year, Unit::GWh_per_month, 10.0);
        renewable = compute_indices(fixture, ds, 2022)[Index::renewable_share].value;
        break;
    }
    return {values > 0 && out_of_range == 0 && bad_identity == 0 && renewable == 1.0,
            fmt::format("{} index values, {} out of range, {} decomposition failures, all-renewable share {}", values,
                        out_of_range, bad_identity, renewable)};
}

Outcome middleware_checks(const std::shared_ptr<const StudyAreaDataset>& ds, const std::filesystem::path& dir,
                          const GridRun& run) {
    // Restart: a new manager over the same store serves results equal to fresh in-process runs.
    std::size_t restart_mismatches = 0;
    {
        CaseManager manager(ds, dir);
        for (const auto& spec : expand_scenario_grid(study_case("grid"))) {
            auto stored = manager.store().read_scenario("grid", spec.name);
            if (!(stored == make_document(coupling::run_scenario(*ds, spec)))) ++restart_mismatches;
        }
    }

    CaseManager manager(ds, dir);
    manager.submit(study_case("edit", 20.0));
    manager.wait("edit");
    std::size_t first = manager.runs();
    manager.edit("edit", study_case("edit").adjustments);
    auto job = manager.wait("edit");
    std::size_t widened = manager.runs();
    std::size_t reused = 0;
    for (const auto& s : job.scenarios) reused += s.status == ScenarioStatus::reused ? 1 : 0;
    manager.edit("edit", study_case("edit").adjustments);
    manager.wait("edit");
    std::size_t repeated = manager.runs();

    bool pass = run.submit_ms < 100.0 && restart_mismatches == 0 && first == 27 && widened == 36 && reused == 27 &&
                repeated == 36;
    return {pass, fmt::format("submit {:.2f} ms, {} restart mismatches, runs {} -> {} ({} reused) -> {}", run.submit_ms,
                              restart_mismatches, first, widened, reused, repeated)};
}

Outcome performance(const GridRun& run) {
    return {run.finished && run.elapsed_s < 60.0,
            fmt::format("36 scenarios in {:.2f} s on {} worker(s), {} hardware thread(s)", run.elapsed_s, run.workers,
                        std::thread::hardware_concurrency())};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fewsim acceptance suite"};
    std::string data_dir = (std::filesystem::temp_directory_path() / "fewsim-acceptance").string();
    std::string dataset_dir = FEWSIM_DEFAULT_DATASET;
    app.add_option("--data-dir", data_dir, "Scratch result store (cleared first)");
    app.add_option("--dataset", dataset_dir, "Study-area dataset directory");
    CLI11_PARSE(app, argc, argv);

    const std::filesystem::path dir = data_dir;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto ds = std::make_shared<const StudyAreaDataset>(load_dataset(dataset_dir));

    GridRun run;
    {
        CaseManager manager(ds, dir);
        run.workers = manager.worker_count();
        auto t0 = Clock::now();
        manager.submit(study_case("grid"));
        run.submit_ms = seconds_since(t0) * 1000.0;
        auto job = manager.wait("grid");
        run.elapsed_s = seconds_since(t0);
        run.finished = job.status == JobStatus::finished;
        for (const auto& name : manager.store().list_scenarios("grid")) {
            run.docs.emplace(name, manager.store().read_scenario("grid", name));
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"scenario grid", [&] { return grid_names(run); }},
        {"water mass balance", [&] { return water_balance(*ds, run); }},
        {"energy balance and merit order", [&] { return energy_balance(*ds, run); }},
        {"WUE linearity", [&] { return wue_linearity(run); }},
        {"FMLM", [] { return fmlm_checks(); }},
        {"coupling", [&] { return coupling_checks(*ds, run); }},
        {"allocation optimality", [] { return allocation_oracle(); }},
        {"indices", [&] { return indices_checks(*ds, run); }},
        {"middleware", [&] { return middleware_checks(ds, dir, run); }},
        {"performance", [&] { return performance(run); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        failed += o.pass ? 0 : 1;
        fmt::print("{} {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
