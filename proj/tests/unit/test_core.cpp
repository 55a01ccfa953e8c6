#include <fstream>

#include "doctest.h"
#include "support.hpp"

#include "fewsim/core/branch_tree.hpp"
#include "fewsim/core/errors.hpp"
#include "fewsim/core/levers.hpp"
#include "fewsim/core/series.hpp"
#include "fewsim/core/units.hpp"

using namespace fewsim;

namespace {

void write_climate(const std::filesystem::path& path, YearMonth first, std::size_t months,
                   const std::string& bad_cell = {}) {
    std::ofstream out(path);
    out << "year,month,tmean_C,precip_mm,population\n";
    for (std::size_t i = 0; i < months; ++i) {
        auto ym = first.plus_months(static_cast<long>(i));
        out << ym.year << ',' << ym.month << ',' << (i == 5 && !bad_cell.empty() ? bad_cell : "20.5") << ",12,1000\n";
    }
}

DatasetError::Kind load_error_kind(const std::filesystem::path& dir, std::string* field = nullptr) {
    try {
        load_dataset(dir);
    } catch (const DatasetError& e) {
        if (field) *field = e.field();
        return e.kind();
    }
    FAIL("dataset loaded without error");
    return DatasetError::Kind::schema;
}

void copy_bundled(const std::filesystem::path& dst) {
    std::filesystem::copy(FEWSIM_DEFAULT_DATASET, dst, std::filesystem::copy_options::recursive);
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("unit names round trip") {
    for (auto u : {Unit::m3_per_month, Unit::GWh_per_month, Unit::ha, Unit::tonne, Unit::percent, Unit::persons,
                   Unit::dimensionless, Unit::tCO2_per_month}) {
        CHECK(parse_unit(to_string(u)) == u);
    }
    CHECK_THROWS_AS(parse_unit("acre_feet"), ValidationError);
    CHECK(kwh_to_gwh(5e5) == doctest::Approx(0.5));
    CHECK(mw_to_gwh(100.0, 720.0) == doctest::Approx(72.0));
    CHECK(mm_over_ha_to_m3(1.0) == 10.0);
}

TEST_CASE("calendar arithmetic") {
    YearMonth ym{2022, 11};
    CHECK(ym.plus_months(3) == YearMonth{2023, 2});
    CHECK(ym.plus_months(-11) == YearMonth{2021, 12});
    CHECK(YearMonth::parse("2050-12") == YearMonth{2050, 12});
    CHECK(YearMonth{2022, 3}.to_string() == "2022-03");
    CHECK(days_in_month(2024, 2) == 29);
    CHECK(days_in_month(2100, 2) == 28);
    CHECK(days_in_month(2000, 2) == 29);
    CHECK(hours_in_month(2023, 6) == 720.0);
    Horizon h;
    CHECK(h.months() == 348);
    CHECK(h.whole_years());
    CHECK(h.index_of({2023, 1}) == 12);
    CHECK(h.at(347) == YearMonth{2050, 12});
}

TEST_CASE("monthly series validation") {
    MonthlySeries s{{2022, 1}, Unit::m3_per_month, {1.0, 2.0, 3.0}};
    CHECK(s.end() == YearMonth{2022, 3});
    CHECK(s.at({2022, 2}) == 2.0);
    CHECK_THROWS(s.at({2022, 4}));
    s.values[1] = -1.0;
    CHECK_THROWS_AS(s.validate("x", true), ValidationError);
    CHECK_NOTHROW(s.validate("x", false));
    s.values[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(s.validate("x", false), ValidationError);
}

TEST_CASE("lever settings") {
    LeverSettings levers({{"municipal_wue", 10.0}, {"irrigation_ie", 25.0}, {"solar_capacity", -50.0}});
    CHECK(levers.municipal_factor() == doctest::Approx(0.9));
    CHECK(levers.irrigation_divisor() == doctest::Approx(1.25));
    CHECK(levers.scale(Lever::solar_capacity) == doctest::Approx(0.5));
    CHECK(levers.delta_pct(Lever::household_eue) == 0.0);
    CHECK_THROWS_AS(LeverSettings({{"free_lunch", 1.0}}), ValidationError);
}

TEST_CASE("branch tree lookups") {
    const auto& tree = testing::bundled().tree;
    CHECK_NOTHROW(tree.validate());
    CHECK(tree.roots().size() == 3);
    CHECK(tree.find("water/supply/SRP") != nullptr);
    CHECK(tree.owner_of("municipal_wue") != nullptr);
    CHECK(BranchTree::parent_of("water/supply/SRP") == "water/supply");
    CHECK(BranchTree::parent_of("water").empty());
    try {
        tree.resolve("water/supply/nowhere");
        FAIL("expected NotFoundError");
    } catch (const NotFoundError& e) {
        CHECK(e.hint() == "water/supply");
    }
    auto root = tree.resolve("");
    CHECK(root.children.size() == 3);
    auto sub = tree.subtree("water/supply");
    CHECK(sub.front()->id == "water/supply");
    CHECK(sub.size() == 1 + testing::bundled().water.sources.size());
}

TEST_CASE("branch tree rejects a duplicate id") {
    BranchTree tree;
    tree.add(BranchNode{"water", Sector::water, "Water", {}, {}});
    CHECK_THROWS(tree.add(BranchNode{"water", Sector::water, "Water", {}, {}}));
    CHECK_THROWS(tree.add(BranchNode{"energy/demand", Sector::energy, "orphan", {}, {}}));
}

TEST_CASE("bundled dataset loads") {
    const auto& ds = testing::bundled();
    CHECK(ds.horizon.months() == 348);
    CHECK(ds.crops.size() == 6);
    CHECK(ds.crops.front().id == "alfalfa");
    CHECK(ds.climates.contains("ssp245"));
    CHECK(ds.climates.contains("ssp585"));
    CHECK(ds.levers.size() == 10);
    CHECK_NOTHROW(validate_dataset(ds));
}

TEST_CASE("dataset save and reload is lossless") {
    testing::TempDir tmp;
    save_dataset(testing::bundled(), tmp.path() / "copy");
    auto again = load_dataset(tmp.path() / "copy");
    CHECK(again == testing::bundled());
}

TEST_CASE("dataset errors name the field") {
    testing::TempDir tmp;
    CHECK(load_error_kind(tmp.path() / "absent") == DatasetError::Kind::missing_file);

    auto dir = tmp.path() / "ds";
    copy_bundled(dir);
    std::filesystem::remove(dir / "climate" / "ssp585.csv");
    CHECK(load_error_kind(dir) == DatasetError::Kind::missing_file);

    auto dir2 = tmp.path() / "ds2";
    copy_bundled(dir2);
    {
        std::ofstream(dir2 / "manifest.json") << "{\"name\": 3";
    }
    std::string field;
    CHECK(load_error_kind(dir2, &field) == DatasetError::Kind::schema);
    CHECK(field == "manifest.json");
}

TEST_CASE("climate CSV with 347 months is a horizon error") {
    testing::TempDir tmp;
    write_climate(tmp.path() / "short.csv", {2022, 1}, 347);
    try {
        read_climate_csv(tmp.path() / "short.csv", "short", Horizon{});
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(e.kind() == DatasetError::Kind::horizon);
        CHECK(std::string(e.what()).find("347") != std::string::npos);
    }
    write_climate(tmp.path() / "full.csv", {2021, 1}, 360);
    auto c = read_climate_csv(tmp.path() / "full.csv", "full", Horizon{});
    CHECK(c.first == YearMonth{2021, 1});
    CHECK(c.value("tmean_C", {2050, 12}) == 20.5);
    CHECK(c.annual_sum("precip_mm", 2030) == 144.0);
}

TEST_CASE("climate CSV rejects non-numeric cells and gaps") {
    testing::TempDir tmp;
    Horizon h{{2022, 1}, {2022, 12}};
    write_climate(tmp.path() / "nan.csv", {2022, 1}, 12, "warm");
    std::string field;
    try {
        read_climate_csv(tmp.path() / "nan.csv", "nan", h);
    } catch (const DatasetError& e) {
        field = e.field();
    }
    CHECK(field == "nan.csv:tmean_C");

    {
        std::ofstream out(tmp.path() / "gap.csv");
        out << "year,month,tmean_C\n2022,1,1\n2022,3,1\n";
    }
    CHECK_THROWS_AS(read_climate_csv(tmp.path() / "gap.csv", "gap", h), DatasetError);
    {
        std::ofstream out(tmp.path() / "hdr.csv");
        out << "month,year,tmean_C\n1,2022,1\n";
    }
    CHECK_THROWS_AS(read_climate_csv(tmp.path() / "hdr.csv", "hdr", h), DatasetError);
}

}  // TEST_SUITE
