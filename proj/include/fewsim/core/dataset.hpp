#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fewsim/core/branch_tree.hpp"
#include "fewsim/core/series.hpp"
#include "fewsim/core/time.hpp"
#include "fewsim/fmlm/types.hpp"

namespace fewsim {

/// Exogenous forcing for one climate pathway. Columns cover an optional historical
/// block followed by exactly the simulation horizon.
struct ClimateFile {
    std::string name;
    YearMonth first;  // first row, at or before horizon.start
    Horizon horizon;
    std::map<std::string, MonthlySeries> columns;

    bool operator==(const ClimateFile&) const = default;

    const MonthlySeries& column(const std::string& name) const;
    double value(const std::string& column_name, YearMonth ym) const;
    /// Mean over the twelve months of `year`.
    double annual_mean(const std::string& column_name, int year) const;
    double annual_sum(const std::string& column_name, int year) const;

    const MonthlySeries& tmean_C() const { return column("tmean_C"); }
    const MonthlySeries& precip_mm() const { return column("precip_mm"); }
    const MonthlySeries& population() const { return column("population"); }

    static std::string price_column(const std::string& crop) { return "price_" + crop; }
    static std::string yield_column(const std::string& crop) { return "yield_" + crop; }
};

struct Crop {
    std::string id;
    std::string label;
    double base_yield_t_per_ha = 0.0;
    std::array<double, 12> kc{};  // monthly crop coefficient

    bool operator==(const Crop&) const = default;
};

enum class SourceKind { surface, residual, reclaimed };

struct WaterSource {
    std::string id;
    std::string label;
    SourceKind kind = SourceKind::surface;
    /// Climate column holding monthly availability (surface sources).
    std::string availability_column;
    /// Optional monthly cap for the residual source; uncapped when absent.
    std::optional<double> monthly_cap_m3;
    /// Reclaimed sources: availability = return_fraction x sum of demand at `return_from`.
    double return_fraction = 0.0;
    std::vector<std::string> return_from;

    bool operator==(const WaterSource&) const = default;

    std::string branch() const { return "water/supply/" + id; }
};

enum class DemandSector { municipal, native_american, industrial, power_plants, agricultural };

std::string_view to_string(DemandSector sector);
DemandSector parse_demand_sector(std::string_view text);

struct WaterDemandNode {
    std::string id;
    std::string label;
    DemandSector sector = DemandSector::municipal;
    int priority = 1;
    std::vector<std::string> sources;  // preference order
    /// population x share x per-capita intensity (municipal, native american)
    double per_capita_m3_per_month = 0.0;
    double population_share = 0.0;
    /// Fixed monthly base volume (industrial, non-district irrigation)
    double base_m3_per_month = 0.0;
    std::array<double, 12> seasonal{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};

    bool operator==(const WaterDemandNode&) const = default;

    std::string branch() const;
};

struct IrrigationDistrict {
    std::string id;
    std::string label;
    double cropland_ha = 0.0;
    double cropland_trend_per_year = 0.0;  // fractional change per year after horizon start
    std::vector<std::string> allowed_crops;
    int priority = 3;
    std::vector<std::string> sources;
    double base_efficiency = 0.75;

    bool operator==(const IrrigationDistrict&) const = default;

    std::string branch() const { return "water/demand/agriculture/" + id; }
    double cropland_in(int year, int first_year) const;
};

struct WaterSettings {
    std::vector<WaterSource> sources;
    std::vector<WaterDemandNode> demands;
    std::vector<IrrigationDistrict> districts;
    double latitude_deg = 33.4;
    std::array<double, 12> diurnal_range_C{};
    double effective_precip_fraction = 0.8;

    bool operator==(const WaterSettings&) const = default;

    const WaterSource* find_source(std::string_view id) const;
    const WaterDemandNode* find_demand(std::string_view id) const;
    const IrrigationDistrict* find_district(std::string_view id) const;
};

enum class Fuel { coal, natural_gas, uranium, solar, wind, hydro };

std::string_view to_string(Fuel fuel);
Fuel parse_fuel(std::string_view text);
bool is_renewable(Fuel fuel);

struct PowerPlant {
    std::string id;
    std::string label;
    bool in_area = true;
    Fuel fuel = Fuel::natural_gas;
    double capacity_MW = 0.0;
    /// Share of nameplate energy available in a month (solar, wind, hydro < 1).
    double capacity_factor = 1.0;
    int merit_rank = 0;
    double emission_factor_t_per_GWh = 0.0;
    double water_factor_m3_per_GWh = 0.0;

    bool operator==(const PowerPlant&) const = default;

    std::string branch() const {
        return std::string(in_area ? "energy/supply/in_area/" : "energy/supply/out_of_area/") + id;
    }
};

/// An end-use sector: demand = activity x intensity, with an optional cooling term.
struct EnergySector {
    std::string id;  // residential, commercial, industrial
    std::string activity_column;  // climate column; empty means activity 1 per month
    double intensity_kwh = 0.0;   // kWh per activity unit per month
    double cooling_sensitivity_per_C = 0.0;
    double balance_temperature_C = 0.0;

    bool operator==(const EnergySector&) const = default;

    std::string branch() const { return "energy/demand/" + id; }
};

struct EnergySettings {
    double loss_fraction = 0.05;
    double reserve_margin = 0.15;
    double load_factor = 0.55;
    std::vector<EnergySector> sectors;
    std::map<std::string, double> water_infrastructure_kwh_per_m3;  // by water source id
    std::vector<PowerPlant> plants;

    bool operator==(const EnergySettings&) const = default;

    const EnergySector* find_sector(std::string_view id) const;
};

struct FmlmSettings {
    fmlm::Coefficients coefficients;
    fmlm::SharePanel history;
    double reference_temperature_C = 22.0;
    double reference_precip_mm = 200.0;

    bool operator==(const FmlmSettings&) const = default;
};

/// An adjustable scenario lever as declared in the manifest.
struct LeverDef {
    std::string key;
    std::string branch;
    std::string label;
    VariableKind kind = VariableKind::intensity;
    std::optional<double> base_value;
    std::string series_ref;
    double min_pct = -100.0;
    double max_pct = 100.0;

    bool operator==(const LeverDef&) const = default;
};

struct StudyAreaDataset {
    std::string name;
    Horizon horizon;
    std::vector<Crop> crops;
    WaterSettings water;
    EnergySettings energy;
    FmlmSettings fmlm;
    std::vector<LeverDef> levers;
    std::map<std::string, ClimateFile> climates;
    BranchTree tree;  // derived from the sections above

    bool operator==(const StudyAreaDataset&) const = default;

    const ClimateFile& climate(const std::string& name) const;
    const Crop* find_crop(std::string_view id) const;
    const LeverDef* find_lever(std::string_view key) const;
    /// All demand nodes, districts included, in manifest order.
    std::vector<WaterDemandNode> demand_nodes() const;
};

/// Loads and validates `<dir>/manifest.json` plus the files it references.
/// Throws DatasetError naming the offending field.
StudyAreaDataset load_dataset(const std::filesystem::path& dir);

/// Writes the manifest, climate CSVs, coefficient and panel files to `dir`.
void save_dataset(const StudyAreaDataset& dataset, const std::filesystem::path& dir);

/// Checks every dataset invariant. Throws DatasetError.
void validate_dataset(const StudyAreaDataset& dataset);

/// Builds the branch tree for a dataset's water network, plants, crops and levers.
BranchTree build_branch_tree(const StudyAreaDataset& dataset);

/// Parses a climate CSV (`year,month,tmean_C,precip_mm,population,...`).
ClimateFile read_climate_csv(const std::filesystem::path& path, std::string name, const Horizon& horizon);
void write_climate_csv(const ClimateFile& climate, const std::filesystem::path& path);

}  // namespace fewsim
