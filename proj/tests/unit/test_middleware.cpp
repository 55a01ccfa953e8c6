#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "fewsim/core/errors.hpp"
#include "fewsim/coupling/engine.hpp"
#include "fewsim/middleware/aggregate.hpp"
#include "fewsim/middleware/case_manager.hpp"
#include "fewsim/middleware/export.hpp"
#include "fewsim/middleware/grid.hpp"
#include "fewsim/middleware/store.hpp"

using namespace fewsim;
using namespace fewsim::middleware;

namespace {

CaseConfig case_study(const std::string& name = "study", double wue_upper = 30.0) {
    return {name, "ssp245", {{"municipal_wue", 0, wue_upper, 10}, {"household_eue", 0, 20, 10}, {"irrigation_ie", 0, 20, 10}}};
}

std::shared_ptr<const StudyAreaDataset> shared_dataset() {
    static auto ds = std::make_shared<const StudyAreaDataset>(testing::bundled());
    return ds;
}

std::set<std::string> names_of(const std::vector<ScenarioSpec>& specs) {
    std::set<std::string> out;
    for (const auto& s : specs) out.insert(s.name);
    return out;
}

// Blocks workers until released, so a case can be observed while it is running.
struct Gate {
    std::mutex mu;
    std::condition_variable cv;
    bool open = false;
    void wait() {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return open; });
    }
    void release() {
        {
            std::lock_guard lock(mu);
            open = true;
        }
        cv.notify_all();
    }
};

}  // namespace

TEST_SUITE("middleware") {

TEST_CASE("case-study grid has 36 named scenarios") {
    auto specs = expand_scenario_grid(case_study());
    CHECK(specs.size() == 36);
    CHECK(grid_size(case_study()) == 36);
    auto names = names_of(specs);
    CHECK(names.size() == 36);
    for (const char* n : {"ssp245_101010", "ssp245_201010", "ssp245_301010", "ssp245_base", "ssp245_000010"}) {
        CHECK(names.contains(n));
    }
    CHECK(specs.front().name == "ssp245_base");
    CHECK(specs.front().deltas.empty());
    CHECK(specs[1].name == "ssp245_000010");
    CHECK(specs.back().name == "ssp245_302020");
    const auto& s = *std::find_if(specs.begin(), specs.end(), [](const auto& x) { return x.name == "ssp245_101010"; });
    CHECK(s.deltas == std::map<std::string, double>{{"household_eue", 10}, {"irrigation_ie", 10}, {"municipal_wue", 10}});
}

TEST_CASE("degenerate grids") {
    CaseConfig none{"c", "ssp245", {}};
    auto base = expand_scenario_grid(none);
    REQUIRE(base.size() == 1);
    CHECK(base[0].name == "ssp245_base");

    CaseConfig symmetric{"c", "ssp585", {{"cap_availability", -20, 20, 20}}};
    auto specs = expand_scenario_grid(symmetric);
    CHECK(names_of(specs) == std::set<std::string>{"ssp585_-20", "ssp585_base", "ssp585_20"});

    CaseConfig fixed{"c", "ssp245", {{"solar_capacity", 50, 50, 1}}};
    auto pinned = expand_scenario_grid(fixed);
    REQUIRE(pinned.size() == 2);
    CHECK(pinned[0].name == "ssp245_base");
    CHECK(pinned[1].name == "ssp245_50");
    CHECK(grid_size(fixed) == 2);
}

TEST_CASE("scenario name formatting") {
    CHECK(scenario_name("ssp245", {5, 100, 0}) == "ssp245_0510000");
    CHECK(scenario_name("ssp245", {2.5}) == "ssp245_02p5");
    CHECK(scenario_name("ssp245", {-10, 12.5}) == "ssp245_-1012p5");
    CHECK(scenario_name("ssp585", {0, 0}) == "ssp585_base");
    VariableAdjustment a{"x", 0, 0.3, 0.1};
    CHECK(a.values() == std::vector<double>{0, 0.1, 0.2, 0.3});
}

TEST_CASE("invalid adjustments") {
    CHECK_THROWS_AS((VariableAdjustment{"x", 10, 30, 10}.validate()), ValidationError);
    CHECK_THROWS_AS((VariableAdjustment{"x", 0, 25, 10}.validate()), ValidationError);
    CHECK_THROWS_AS((VariableAdjustment{"x", 0, 20, 0}.validate()), ValidationError);
    CHECK_THROWS_AS((VariableAdjustment{"x", 20, 0, 10}.validate()), ValidationError);
    CaseConfig twice{"c", "ssp245", {{"municipal_wue", 0, 10, 10}, {"municipal_wue", 0, 20, 10}}};
    CHECK_THROWS_AS(twice.validate(), ValidationError);
    CHECK_THROWS_AS((CaseConfig{"../etc", "ssp245", {}}.validate()), ValidationError);
    CHECK(valid_case_name("study-2.v1"));
    CHECK_FALSE(valid_case_name(".hidden"));
}

TEST_CASE("annual aggregation") {
    Horizon two{{2022, 1}, {2023, 12}};
    auto ones = make_series(two, Unit::m3_per_month, 1.0);
    auto annual = aggregate_annual(ones, VariableKind::flow);
    CHECK(annual.values == std::vector<double>{12.0, 12.0});
    CHECK(annual.first_year == 2022);
    CHECK(annual.at(2023) == 12.0);
    CHECK_THROWS_AS(annual.at(2024), NotFoundError);

    auto half = make_series(two, Unit::dimensionless, 0.5);
    CHECK(aggregate_annual(half, VariableKind::share).values == std::vector<double>{0.5, 0.5});

    MonthlySeries partial{{2022, 3}, Unit::m3_per_month, std::vector<double>(12, 1.0)};
    CHECK_THROWS_AS(aggregate_annual(partial, VariableKind::flow), ValidationError);

    CHECK(kind_for_unit(Unit::m3_per_month) == VariableKind::flow);
    CHECK(kind_for_unit(Unit::tCO2_per_month) == VariableKind::flow);
    CHECK(kind_for_unit(Unit::ha) == VariableKind::stock);
    CHECK(kind_for_unit(Unit::dimensionless) == VariableKind::share);
}

TEST_CASE("aggregation is linear and matches the oracle fixture") {
    const auto& o = testing::oracles()["aggregation"];
    MonthlySeries flow{{2022, 1}, Unit::m3_per_month, o["flow"].get<std::vector<double>>()};
    MonthlySeries share{{2022, 1}, Unit::dimensionless, o["share"].get<std::vector<double>>()};
    auto fa = aggregate_annual(flow, VariableKind::flow);
    auto sa = aggregate_annual(share, VariableKind::share);
    for (std::size_t y = 0; y < 2; ++y) {
        CHECK(fa.values[y] == doctest::Approx(o["flow_annual"][y].get<double>()).epsilon(1e-13));
        CHECK(sa.values[y] == doctest::Approx(o["share_annual"][y].get<double>()).epsilon(1e-13));
    }
    auto combo = flow;
    for (std::size_t i = 0; i < combo.values.size(); ++i) combo.values[i] = 2.0 * flow.values[i] + 3.0 * share.values[i];
    auto ca = aggregate_annual(combo, VariableKind::flow);
    auto sf = aggregate_annual(MonthlySeries{{2022, 1}, Unit::m3_per_month, share.values}, VariableKind::flow);
    for (std::size_t y = 0; y < 2; ++y) {
        CHECK(ca.values[y] == doctest::Approx(2.0 * fa.values[y] + 3.0 * sf.values[y]).epsilon(1e-13));
    }
}

TEST_CASE("store round trip is bit-exact") {
    testing::TempDir tmp;
    ResultStore store(tmp.path());
    auto result = coupling::run_scenario(testing::bundled(), {"ssp245_base", "ssp245", {}});
    result.flows[0].series.values[0] = 0.1 + 0.2;
    auto doc = make_document(result);
    CaseManifest manifest{{"c", "ssp245", {}}, {"c", JobStatus::finished, {{"ssp245_base", ScenarioStatus::done, {}}}}, 1};
    store.write_manifest(manifest);
    store.write_scenario("c", doc);
    CHECK(store.read_scenario("c", "ssp245_base") == doc);
    CHECK(store.read_manifest("c") == manifest);
    CHECK(store.list_cases() == std::vector<std::string>{"c"});
    CHECK(store.list_scenarios("c") == std::vector<std::string>{"ssp245_base"});
    CHECK_THROWS_AS(store.read_scenario("c", "nope"), NotFoundError);
    CHECK_FALSE(store.read_manifest("nope").has_value());
    store.delete_case("c");
    CHECK_FALSE(store.has_case("c"));
}

TEST_CASE("submit returns at once and results survive a restart") {
    testing::TempDir tmp;
    std::vector<ScenarioDocument> before;
    {
        CaseManager manager(shared_dataset(), tmp.path());
        auto t0 = std::chrono::steady_clock::now();
        auto job = manager.submit(case_study());
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        CHECK(ms < 100.0);
        CHECK(job.status == JobStatus::in_progress);
        CHECK(job.total() == 36);
        CHECK_THROWS_AS(manager.submit(case_study()), ConflictError);
        job = manager.wait("study");
        CHECK(job.status == JobStatus::finished);
        CHECK(job.completed() == 36);
        CHECK(manager.runs() == 36);
        for (const char* n : {"ssp245_base", "ssp245_101010"}) before.push_back(manager.store().read_scenario("study", n));
    }
    CaseManager again(shared_dataset(), tmp.path());
    CHECK(again.cases() == std::vector<std::string>{"study"});
    CHECK(again.status("study").status == JobStatus::finished);
    CHECK(again.store().read_scenario("study", "ssp245_base") == before[0]);
    auto fresh = coupling::run_scenario(testing::bundled(), before[1].result.spec);
    CHECK(again.store().read_scenario("study", "ssp245_101010").result == fresh);
    CHECK(again.runs() == 0);
}

TEST_CASE("edit reruns only the grid difference") {
    testing::TempDir tmp;
    CaseManager manager(shared_dataset(), tmp.path());
    manager.submit(case_study("wue", 20.0));
    manager.wait("wue");
    CHECK(manager.runs() == 27);

    auto widened = case_study("wue", 30.0).adjustments;
    auto job = manager.edit("wue", widened);
    job = manager.wait("wue");
    CHECK(manager.runs() == 36);
    CHECK(manager.manifest("wue").runs == 36);
    std::size_t reused = 0;
    for (const auto& s : job.scenarios) reused += s.status == ScenarioStatus::reused ? 1 : 0;
    CHECK(reused == 27);

    // Case-study grid with EUE widened from 20 to 30: 12 new scenarios.
    auto eue = widened;
    eue[1].upper_pct = 30.0;
    manager.edit("wue", eue);
    manager.wait("wue");
    CHECK(manager.runs() == 48);

    // Identical edit runs nothing.
    job = manager.edit("wue", eue);
    job = manager.wait("wue");
    CHECK(manager.runs() == 48);
    CHECK(job.status == JobStatus::finished);

    // Narrowing deletes results that left the grid. One adjustment means new names, so only
    // the base is reused.
    manager.edit("wue", {{"municipal_wue", 0, 10, 10}});
    manager.wait("wue");
    CHECK(manager.runs() == 49);
    CHECK(manager.store().list_scenarios("wue").size() == 2);
}

TEST_CASE("a failing scenario fails the job and keeps the rest") {
    testing::TempDir tmp;
    ManagerOptions opt;
    opt.before_run = [](const std::string&, const ScenarioSpec& spec) {
        if (spec.name == "ssp245_10") throw std::runtime_error("injected fault");
    };
    CaseManager manager(shared_dataset(), tmp.path(), opt);
    manager.submit({"faulty", "ssp245", {{"municipal_wue", 0, 20, 10}}});
    auto job = manager.wait("faulty");
    CHECK(job.status == JobStatus::failed);
    CHECK(job.failed() == 1);
    CHECK(job.completed() == 2);
    CHECK(job.error.find("ssp245_10") != std::string::npos);
    CHECK(manager.store().has_scenario("faulty", "ssp245_20"));
    CHECK_FALSE(manager.store().has_scenario("faulty", "ssp245_10"));
}

TEST_CASE("running cases cannot be edited or removed") {
    testing::TempDir tmp;
    auto gate = std::make_shared<Gate>();
    ManagerOptions opt;
    opt.workers = 1;
    opt.before_run = [gate](const std::string&, const ScenarioSpec&) { gate->wait(); };
    CaseManager manager(shared_dataset(), tmp.path(), opt);
    manager.submit({"busy", "ssp245", {{"municipal_wue", 0, 10, 10}}});
    CHECK_THROWS_AS(manager.edit("busy", {}), ConflictError);
    CHECK_THROWS_AS(manager.remove("busy"), ConflictError);
    gate->release();
    manager.wait("busy");
    manager.remove("busy");
    CHECK_THROWS_AS(manager.edit("busy", {}), NotFoundError);
    CHECK_THROWS_AS(manager.status("busy"), NotFoundError);
}

TEST_CASE("interrupted cases are marked failed on restart") {
    testing::TempDir tmp;
    {
        ResultStore store(tmp.path());
        CaseManifest m{{"half", "ssp245", {}}, {"half", JobStatus::in_progress, {{"ssp245_base", ScenarioStatus::running, {}}}}, 0};
        store.write_manifest(m);
    }
    CaseManager manager(shared_dataset(), tmp.path());
    auto job = manager.status("half");
    CHECK(job.status == JobStatus::failed);
    CHECK(job.error.find("interrupted") != std::string::npos);
    manager.edit("half", {});
    CHECK(manager.wait("half").status == JobStatus::finished);
}

TEST_CASE("bad configs are rejected before anything runs") {
    testing::TempDir tmp;
    CaseManager manager(shared_dataset(), tmp.path());
    CHECK_THROWS_AS(manager.submit({"c", "ssp999", {}}), NotFoundError);
    CHECK_THROWS_AS(manager.submit({"c", "ssp245", {{"free_lunch", 0, 10, 10}}}), ValidationError);
    CHECK_THROWS_AS(manager.submit({"c", "ssp245", {{"municipal_wue", 0, 90, 10}}}), ValidationError);
    CHECK(manager.cases().empty());
    CHECK(manager.runs() == 0);
}

TEST_CASE("CSV export") {
    auto doc = make_document(coupling::run_scenario(testing::bundled(), {"ssp245_base", "ssp245", {}}));
    std::ostringstream out;
    write_results_header(out);
    write_results_csv(out, doc);
    std::string text = out.str();
    CHECK(text.rfind("scenario,branch,year,variable,value,unit\n", 0) == 0);
    CHECK(text.find("ssp245_base,water/supply/SRP,2022,delivered,") != std::string::npos);
}

}  // TEST_SUITE
