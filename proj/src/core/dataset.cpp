#include "fewsim/core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/core/levers.hpp"
#include "fewsim/fmlm/fmlm.hpp"
#include "json.hpp"

namespace fewsim {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& message) {
    throw DatasetError(DatasetError::Kind::schema, field, field + ": " + message);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) schema_error(path + "." + key, "missing field");
    return obj.at(key);
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = require(obj, key, path);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        schema_error(path + "." + key, "wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
    if (!obj.contains(key)) return fallback;
    return get<T>(obj, key, path);
}

std::array<double, 12> get_monthly(const json& obj, const std::string& key, const std::string& path,
                                   std::optional<std::array<double, 12>> fallback = std::nullopt) {
    if (!obj.contains(key) && fallback) return *fallback;
    auto v = get<std::vector<double>>(obj, key, path);
    if (v.size() != 12) schema_error(path + "." + key, "expected 12 monthly values");
    std::array<double, 12> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

const json& require_array(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_array()) schema_error(path + "." + key, "expected an array");
    return v;
}

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::surface: return "surface";
        case SourceKind::residual: return "residual";
        case SourceKind::reclaimed: return "reclaimed";
    }
    return "?";
}

SourceKind parse_source_kind(const std::string& text, const std::string& field) {
    if (text == "surface") return SourceKind::surface;
    if (text == "residual") return SourceKind::residual;
    if (text == "reclaimed") return SourceKind::reclaimed;
    schema_error(field, "unknown source kind '" + text + "'");
}

template <typename F>
auto with_field(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        schema_error(field, e.what());
    }
}

VariableDef output(std::string key, std::string label, Unit unit, VariableKind kind = VariableKind::flow) {
    VariableDef v;
    v.key = std::move(key);
    v.label = std::move(label);
    v.unit = unit;
    v.kind = kind;
    return v;
}

BranchNode node(std::string id, Sector sector, std::string label, std::vector<VariableDef> vars) {
    BranchNode n;
    n.id = std::move(id);
    n.sector = sector;
    n.label = std::move(label);
    n.variables = std::move(vars);
    return n;
}

std::vector<VariableDef> demand_vars() {
    return {output("delivered", "Delivered", Unit::m3_per_month),
            output("demand", "Demand", Unit::m3_per_month),
            output("unmet", "Unmet demand", Unit::m3_per_month)};
}

}  // namespace

std::string_view to_string(DemandSector sector) {
    switch (sector) {
        case DemandSector::municipal: return "municipal";
        case DemandSector::native_american: return "native_american";
        case DemandSector::industrial: return "industrial";
        case DemandSector::power_plants: return "power_plants";
        case DemandSector::agricultural: return "agricultural";
    }
    return "?";
}

DemandSector parse_demand_sector(std::string_view text) {
    for (auto s : {DemandSector::municipal, DemandSector::native_american, DemandSector::industrial,
                   DemandSector::power_plants, DemandSector::agricultural}) {
        if (to_string(s) == text) return s;
    }
    throw ValidationError("unknown demand sector '" + std::string(text) + "'");
}

std::string WaterDemandNode::branch() const {
    if (sector == DemandSector::agricultural) return "water/demand/agriculture/" + id;
    return "water/demand/" + id;
}

double IrrigationDistrict::cropland_in(int year, int first_year) const {
    return std::max(0.0, cropland_ha * (1.0 + cropland_trend_per_year * (year - first_year)));
}

std::string_view to_string(Fuel fuel) {
    switch (fuel) {
        case Fuel::coal: return "coal";
        case Fuel::natural_gas: return "natural_gas";
        case Fuel::uranium: return "uranium";
        case Fuel::solar: return "solar";
        case Fuel::wind: return "wind";
        case Fuel::hydro: return "hydro";
    }
    return "?";
}

Fuel parse_fuel(std::string_view text) {
    for (auto f : {Fuel::coal, Fuel::natural_gas, Fuel::uranium, Fuel::solar, Fuel::wind, Fuel::hydro}) {
        if (to_string(f) == text) return f;
    }
    throw ValidationError("unknown fuel '" + std::string(text) + "'");
}

bool is_renewable(Fuel fuel) {
    return fuel == Fuel::solar || fuel == Fuel::wind || fuel == Fuel::hydro;
}

const WaterSource* WaterSettings::find_source(std::string_view id) const {
    for (const auto& s : sources) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

const WaterDemandNode* WaterSettings::find_demand(std::string_view id) const {
    for (const auto& d : demands) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

const IrrigationDistrict* WaterSettings::find_district(std::string_view id) const {
    for (const auto& d : districts) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

const EnergySector* EnergySettings::find_sector(std::string_view id) const {
    for (const auto& s : sectors) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

const ClimateFile& StudyAreaDataset::climate(const std::string& climate_name) const {
    auto it = climates.find(climate_name);
    if (it == climates.end()) {
        throw NotFoundError(fmt::format("unknown climate file '{}'", climate_name));
    }
    return it->second;
}

const Crop* StudyAreaDataset::find_crop(std::string_view id) const {
    for (const auto& c : crops) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

const LeverDef* StudyAreaDataset::find_lever(std::string_view key) const {
    for (const auto& l : levers) {
        if (l.key == key) return &l;
    }
    return nullptr;
}

std::vector<WaterDemandNode> StudyAreaDataset::demand_nodes() const {
    std::vector<WaterDemandNode> out = water.demands;
    for (const auto& d : water.districts) {
        WaterDemandNode n;
        n.id = d.id;
        n.label = d.label;
        n.sector = DemandSector::agricultural;
        n.priority = d.priority;
        n.sources = d.sources;
        out.push_back(std::move(n));
    }
    return out;
}

BranchTree build_branch_tree(const StudyAreaDataset& ds) {
    BranchTree tree;
    const auto m3 = Unit::m3_per_month;
    const auto gwh = Unit::GWh_per_month;

    tree.add(node("water", Sector::water, "Water", {output("delivered", "Total delivered", m3)}));
    tree.add(node("water/supply", Sector::water, "Supply", {output("delivered", "Delivered", m3)}));
    for (const auto& s : ds.water.sources) {
        tree.add(node(s.branch(), Sector::water, s.label,
                      {output("delivered", "Delivered", m3), output("availability", "Availability", m3)}));
    }
    tree.add(node("water/demand", Sector::water, "Demand", demand_vars()));
    tree.add(node("water/demand/agriculture", Sector::water, "Agriculture", demand_vars()));
    for (const auto& d : ds.demand_nodes()) {
        if (d.sector == DemandSector::agricultural) continue;
        tree.add(node(d.branch(), Sector::water, d.label, demand_vars()));
    }
    for (const auto& d : ds.water.districts) {
        tree.add(node(d.branch(), Sector::water, d.label, demand_vars()));
    }
    for (const auto& d : ds.water.demands) {
        if (d.sector == DemandSector::agricultural) {
            tree.add(node(d.branch(), Sector::water, d.label, demand_vars()));
        }
    }

    tree.add(node("energy", Sector::energy, "Energy", {output("demand", "Net demand", gwh)}));
    tree.add(node("energy/demand", Sector::energy, "Demand", {output("demand", "Net demand", gwh)}));
    for (const auto& s : ds.energy.sectors) {
        tree.add(node(s.branch(), Sector::energy, s.id, {output("demand", "Demand", gwh)}));
    }
    if (tree.find("energy/demand/industrial") == nullptr) {
        tree.add(node("energy/demand/industrial", Sector::energy, "industrial", {output("demand", "Demand", gwh)}));
    }
    tree.add(node("energy/demand/industrial/water_infrastructure", Sector::energy,
                  "Water infrastructure", {output("demand", "Demand", gwh)}));
    for (const auto& s : ds.water.sources) {
        tree.add(node("energy/demand/industrial/water_infrastructure/" + s.id, Sector::energy, s.label,
                      {output("demand", "Demand", gwh)}));
    }
    tree.add(node("energy/supply", Sector::energy, "Supply",
                  {output("generation", "Generation", gwh), output("gross_demand", "Gross demand", gwh),
                   output("unserved", "Unserved", gwh),
                   output("emissions", "Emissions", Unit::tCO2_per_month),
                   output("reserve_ok", "Reserve margin met", Unit::dimensionless, VariableKind::share)}));
    tree.add(node("energy/supply/in_area", Sector::energy, "In-area plants",
                  {output("generation", "Generation", gwh), output("emissions", "Emissions", Unit::tCO2_per_month)}));
    tree.add(node("energy/supply/out_of_area", Sector::energy, "Out-of-area plants",
                  {output("generation", "Generation", gwh), output("emissions", "Emissions", Unit::tCO2_per_month)}));
    for (const auto& p : ds.energy.plants) {
        tree.add(node(p.branch(), Sector::energy, p.label,
                      {output("generation", "Generation", gwh),
                       output("emissions", "Emissions", Unit::tCO2_per_month)}));
    }

    tree.add(node("food", Sector::food, "Food", {output("production", "Production", Unit::tonne)}));
    tree.add(node("food/crops", Sector::food, "Crops",
                  {output("production", "Production", Unit::tonne),
                   output("area", "Area", Unit::ha, VariableKind::stock)}));
    for (const auto& c : ds.crops) {
        tree.add(node("food/crops/" + c.id, Sector::food, c.label,
                      {output("production", "Production", Unit::tonne),
                       output("area", "Area", Unit::ha, VariableKind::stock)}));
    }
    tree.add(node("food/districts", Sector::food, "Irrigation districts",
                  {output("production", "Production", Unit::tonne),
                   output("area", "Area", Unit::ha, VariableKind::stock)}));
    for (const auto& d : ds.water.districts) {
        std::vector<VariableDef> vars = {output("production", "Production", Unit::tonne),
                                         output("area", "Area", Unit::ha, VariableKind::stock)};
        for (const auto& c : ds.crops) {
            vars.push_back(output("production_" + c.id, c.label + " production", Unit::tonne));
            vars.push_back(output("area_" + c.id, c.label + " area", Unit::ha, VariableKind::stock));
        }
        tree.add(node("food/districts/" + d.id, Sector::food, d.label, std::move(vars)));
    }

    for (const auto& lever : ds.levers) {
        auto* n = tree.find(lever.branch);
        if (n == nullptr) {
            schema_error("levers." + lever.key + ".branch", "unknown branch '" + lever.branch + "'");
        }
        VariableDef v;
        v.key = lever.key;
        v.label = lever.label;
        v.unit = Unit::percent;
        v.kind = lever.kind;
        v.base_value = lever.base_value;
        v.series_ref = lever.series_ref;
        v.adjustable = true;
        v.default_delta_pct = 0.0;
        n->variables.push_back(std::move(v));
    }
    return tree;
}

void validate_dataset(const StudyAreaDataset& ds) {
    if (!ds.horizon.whole_years() || ds.horizon.end < ds.horizon.start) {
        schema_error("horizon", "must span whole calendar years");
    }
    if (ds.crops.size() != 6) {
        schema_error("crops", fmt::format("expected exactly 6 crops, found {}", ds.crops.size()));
    }
    std::set<std::string> crop_ids;
    for (const auto& c : ds.crops) {
        if (!crop_ids.insert(c.id).second) schema_error("crops", "duplicate crop '" + c.id + "'");
        if (!(c.base_yield_t_per_ha > 0.0)) schema_error("crops." + c.id + ".base_yield_t_per_ha", "must be > 0");
        for (double kc : c.kc) {
            if (!(kc >= 0.0) || !std::isfinite(kc)) schema_error("crops." + c.id + ".kc", "must be finite and >= 0");
        }
    }

    const auto& w = ds.water;
    if (w.sources.size() != 4) {
        schema_error("water.sources", fmt::format("expected exactly 4 supply sources, found {}", w.sources.size()));
    }
    int residuals = 0;
    std::set<std::string> source_ids;
    for (const auto& s : w.sources) {
        if (!source_ids.insert(s.id).second) schema_error("water.sources", "duplicate source '" + s.id + "'");
        if (s.kind == SourceKind::residual) ++residuals;
        if (s.kind == SourceKind::surface && s.availability_column.empty()) {
            schema_error("water.sources." + s.id + ".availability_column", "required for surface sources");
        }
        if (s.kind == SourceKind::reclaimed && (s.return_fraction < 0.0 || s.return_fraction > 1.0)) {
            schema_error("water.sources." + s.id + ".return_fraction", "must be in [0,1]");
        }
        if (s.monthly_cap_m3 && *s.monthly_cap_m3 < 0.0) {
            schema_error("water.sources." + s.id + ".monthly_cap_m3", "must be >= 0");
        }
    }
    if (residuals != 1) schema_error("water.sources", "exactly one residual (groundwater) source required");

    std::set<std::string> demand_ids;
    for (const auto& d : ds.demand_nodes()) {
        std::string field = "water.demands." + d.id;
        if (!demand_ids.insert(d.id).second) schema_error(field, "duplicate demand id");
        if (d.priority < 1) schema_error(field + ".priority", "must be >= 1");
        if (d.sources.empty()) schema_error(field + ".sources", "demand is not reachable from any source");
        std::set<std::string> seen;
        for (const auto& s : d.sources) {
            if (!source_ids.contains(s)) schema_error(field + ".sources", "unknown source '" + s + "'");
            if (!seen.insert(s).second) schema_error(field + ".sources", "source '" + s + "' repeated");
        }
        if (d.per_capita_m3_per_month < 0.0 || d.population_share < 0.0 || d.base_m3_per_month < 0.0) {
            schema_error(field, "intensities must be >= 0");
        }
    }
    for (const auto& s : w.sources) {
        for (const auto& r : s.return_from) {
            if (!demand_ids.contains(r)) {
                schema_error("water.sources." + s.id + ".return_from", "unknown demand '" + r + "'");
            }
        }
    }
    if (w.districts.empty()) schema_error("water.districts", "at least one irrigation district required");
    for (const auto& d : w.districts) {
        std::string field = "water.districts." + d.id;
        if (!(d.cropland_ha >= 0.0)) schema_error(field + ".cropland_ha", "must be >= 0");
        if (!(d.base_efficiency > 0.0 && d.base_efficiency <= 1.0)) {
            schema_error(field + ".base_efficiency", "must be in (0,1]");
        }
        for (const auto& c : d.allowed_crops) {
            if (!crop_ids.contains(c)) schema_error(field + ".allowed_crops", "unknown crop '" + c + "'");
        }
        if (d.allowed_crops.empty()) schema_error(field + ".allowed_crops", "must not be empty");
    }

    const auto& e = ds.energy;
    if (!(e.loss_fraction >= 0.0 && e.loss_fraction < 1.0)) schema_error("energy.loss_fraction", "must be in [0,1)");
    if (!(e.reserve_margin >= 0.0)) schema_error("energy.reserve_margin", "must be >= 0");
    if (!(e.load_factor > 0.0 && e.load_factor <= 1.0)) schema_error("energy.load_factor", "must be in (0,1]");
    if (e.plants.empty()) schema_error("energy.plants", "at least one plant required");
    std::set<int> ranks;
    std::set<std::string> plant_ids;
    for (const auto& p : e.plants) {
        std::string field = "energy.plants." + p.id;
        if (!plant_ids.insert(p.id).second) schema_error(field, "duplicate plant id");
        if (!(p.capacity_MW > 0.0)) schema_error(field + ".capacity_MW", "must be > 0");
        if (!(p.capacity_factor > 0.0 && p.capacity_factor <= 1.0)) {
            schema_error(field + ".capacity_factor", "must be in (0,1]");
        }
        if (!ranks.insert(p.merit_rank).second) schema_error(field + ".merit_rank", "merit ranks must be unique");
        if (p.emission_factor_t_per_GWh < 0.0) schema_error(field + ".emission_factor_t_per_GWh", "must be >= 0");
        if (is_renewable(p.fuel) && p.emission_factor_t_per_GWh != 0.0) {
            schema_error(field + ".emission_factor_t_per_GWh", "renewable plants must have zero emissions");
        }
        if (p.water_factor_m3_per_GWh < 0.0) schema_error(field + ".water_factor_m3_per_GWh", "must be >= 0");
    }
    for (const auto& s : e.sectors) {
        if (s.intensity_kwh < 0.0 || s.cooling_sensitivity_per_C < 0.0) {
            schema_error("energy.sectors." + s.id, "intensities must be >= 0");
        }
    }
    for (const auto& [src, intensity] : e.water_infrastructure_kwh_per_m3) {
        if (!source_ids.contains(src)) {
            schema_error("energy.water_infrastructure_kwh_per_m3." + src, "unknown water source");
        }
        if (!(intensity >= 0.0)) schema_error("energy.water_infrastructure_kwh_per_m3." + src, "must be >= 0");
    }

    const auto& coefs = ds.fmlm.coefficients;
    std::vector<std::string> crop_order;
    for (const auto& c : ds.crops) crop_order.push_back(c.id);
    if (coefs.crops != crop_order) schema_error("fmlm.coefficients", "crop order must match the crop catalog");
    if (coefs.betas.size() != (coefs.crops.size() - 1) * coefs.predictors.size()) {
        schema_error("fmlm.coefficients", "coefficient matrix has the wrong shape");
    }
    for (double b : coefs.betas) {
        if (!std::isfinite(b)) schema_error("fmlm.coefficients", "non-finite coefficient");
    }

    if (ds.climates.empty()) schema_error("climate_files", "at least one climate file required");
    for (const auto& [name, climate] : ds.climates) {
        std::string field = "climate_files." + name;
        if (climate.horizon != ds.horizon) {
            throw DatasetError(DatasetError::Kind::horizon, field, field + ": horizon mismatch");
        }
        auto need = [&](const std::string& column) {
            if (!climate.columns.contains(column)) schema_error(field + ":" + column, "missing column");
        };
        need("tmean_C");
        need("precip_mm");
        need("population");
        for (const auto& c : ds.crops) {
            need(ClimateFile::price_column(c.id));
            need(ClimateFile::yield_column(c.id));
        }
        for (const auto& s : w.sources) {
            if (!s.availability_column.empty()) need(s.availability_column);
        }
        for (const auto& s : e.sectors) {
            if (!s.activity_column.empty()) need(s.activity_column);
        }
        if (climate.first > YearMonth{ds.horizon.start.year - 1, 1}) {
            throw DatasetError(DatasetError::Kind::horizon, field,
                               field + ": the year before the horizon is required for lagged predictors");
        }
        for (const auto& [col, series] : climate.columns) {
            if (series.size() != static_cast<std::size_t>(ds.horizon.end.serial() - climate.first.serial() + 1)) {
                throw DatasetError(DatasetError::Kind::horizon, field + ":" + col, field + ": column length mismatch");
            }
        }
    }

    std::set<std::string> lever_keys;
    for (const auto& l : ds.levers) {
        if (!parse_lever(l.key)) schema_error("levers." + l.key, "unknown lever");
        if (!lever_keys.insert(l.key).second) schema_error("levers." + l.key, "duplicate lever");
        if (!(l.min_pct <= 0.0 && 0.0 <= l.max_pct)) schema_error("levers." + l.key, "bounds must bracket 0");
    }

    with_field("branches", [&] {
        ds.tree.validate();
        return 0;
    });
}

StudyAreaDataset load_dataset(const std::filesystem::path& dir) {
    auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) {
        throw DatasetError(DatasetError::Kind::missing_file, "manifest.json",
                           fmt::format("dataset manifest '{}' not found", manifest_path.string()));
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        schema_error("manifest.json", std::string("invalid JSON: ") + e.what());
    }

    StudyAreaDataset ds;
    ds.name = get_or<std::string>(doc, "name", "", "study-area");
    const auto& horizon = require(doc, "horizon", "");
    ds.horizon.start = with_field("horizon.start", [&] { return YearMonth::parse(get<std::string>(horizon, "start", "horizon")); });
    ds.horizon.end = with_field("horizon.end", [&] { return YearMonth::parse(get<std::string>(horizon, "end", "horizon")); });

    for (const auto& c : require_array(doc, "crops", "")) {
        Crop crop;
        crop.id = get<std::string>(c, "id", "crops");
        std::string path = "crops." + crop.id;
        crop.label = get_or<std::string>(c, "label", path, crop.id);
        crop.base_yield_t_per_ha = get<double>(c, "base_yield_t_per_ha", path);
        crop.kc = get_monthly(c, "kc", path);
        ds.crops.push_back(std::move(crop));
    }
    if (ds.crops.empty()) schema_error("crops", "at least one crop required");

    const auto& water = require(doc, "water", "");
    ds.water.latitude_deg = get<double>(water, "latitude_deg", "water");
    ds.water.diurnal_range_C = get_monthly(water, "diurnal_range_C", "water");
    ds.water.effective_precip_fraction = get<double>(water, "effective_precip_fraction", "water");
    for (const auto& s : require_array(water, "sources", "water")) {
        WaterSource src;
        src.id = get<std::string>(s, "id", "water.sources");
        std::string path = "water.sources." + src.id;
        src.label = get_or<std::string>(s, "label", path, src.id);
        src.kind = parse_source_kind(get<std::string>(s, "kind", path), path + ".kind");
        src.availability_column = get_or<std::string>(s, "availability_column", path, "");
        if (s.contains("monthly_cap_m3") && !s.at("monthly_cap_m3").is_null()) {
            src.monthly_cap_m3 = get<double>(s, "monthly_cap_m3", path);
        }
        src.return_fraction = get_or<double>(s, "return_fraction", path, 0.0);
        src.return_from = get_or<std::vector<std::string>>(s, "return_from", path, {});
        ds.water.sources.push_back(std::move(src));
    }
    for (const auto& d : require_array(water, "demands", "water")) {
        WaterDemandNode n;
        n.id = get<std::string>(d, "id", "water.demands");
        std::string path = "water.demands." + n.id;
        n.label = get_or<std::string>(d, "label", path, n.id);
        n.sector = with_field(path + ".sector", [&] { return parse_demand_sector(get<std::string>(d, "sector", path)); });
        n.priority = get<int>(d, "priority", path);
        n.sources = get<std::vector<std::string>>(d, "sources", path);
        n.per_capita_m3_per_month = get_or<double>(d, "per_capita_m3_per_month", path, 0.0);
        n.population_share = get_or<double>(d, "population_share", path, 0.0);
        n.base_m3_per_month = get_or<double>(d, "base_m3_per_month", path, 0.0);
        n.seasonal = get_monthly(d, "seasonal", path, n.seasonal);
        ds.water.demands.push_back(std::move(n));
    }
    for (const auto& d : require_array(water, "districts", "water")) {
        IrrigationDistrict n;
        n.id = get<std::string>(d, "id", "water.districts");
        std::string path = "water.districts." + n.id;
        n.label = get_or<std::string>(d, "label", path, n.id);
        n.cropland_ha = get<double>(d, "cropland_ha", path);
        n.cropland_trend_per_year = get_or<double>(d, "cropland_trend_per_year", path, 0.0);
        n.allowed_crops = get<std::vector<std::string>>(d, "allowed_crops", path);
        n.priority = get<int>(d, "priority", path);
        n.sources = get<std::vector<std::string>>(d, "sources", path);
        n.base_efficiency = get<double>(d, "base_efficiency", path);
        ds.water.districts.push_back(std::move(n));
    }

    const auto& energy = require(doc, "energy", "");
    ds.energy.loss_fraction = get<double>(energy, "loss_fraction", "energy");
    ds.energy.reserve_margin = get<double>(energy, "reserve_margin", "energy");
    ds.energy.load_factor = get_or<double>(energy, "load_factor", "energy", 0.55);
    for (const auto& s : require_array(energy, "sectors", "energy")) {
        EnergySector sec;
        sec.id = get<std::string>(s, "id", "energy.sectors");
        std::string path = "energy.sectors." + sec.id;
        sec.activity_column = get_or<std::string>(s, "activity_column", path, "");
        sec.intensity_kwh = get<double>(s, "intensity_kwh", path);
        sec.cooling_sensitivity_per_C = get_or<double>(s, "cooling_sensitivity_per_C", path, 0.0);
        sec.balance_temperature_C = get_or<double>(s, "balance_temperature_C", path, 0.0);
        ds.energy.sectors.push_back(std::move(sec));
    }
    ds.energy.water_infrastructure_kwh_per_m3 =
        get<std::map<std::string, double>>(energy, "water_infrastructure_kwh_per_m3", "energy");
    for (const auto& p : require_array(energy, "plants", "energy")) {
        PowerPlant plant;
        plant.id = get<std::string>(p, "id", "energy.plants");
        std::string path = "energy.plants." + plant.id;
        plant.label = get_or<std::string>(p, "label", path, plant.id);
        plant.in_area = get<bool>(p, "in_area", path);
        plant.fuel = with_field(path + ".fuel", [&] { return parse_fuel(get<std::string>(p, "fuel", path)); });
        plant.capacity_MW = get<double>(p, "capacity_MW", path);
        plant.capacity_factor = get_or<double>(p, "capacity_factor", path, 1.0);
        plant.merit_rank = get<int>(p, "merit_rank", path);
        plant.emission_factor_t_per_GWh = get<double>(p, "emission_factor_t_per_GWh", path);
        plant.water_factor_m3_per_GWh = get<double>(p, "water_factor_m3_per_GWh", path);
        ds.energy.plants.push_back(std::move(plant));
    }

    const auto& fm = require(doc, "fmlm", "");
    ds.fmlm.reference_temperature_C = get<double>(fm, "reference_temperature_C", "fmlm");
    ds.fmlm.reference_precip_mm = get<double>(fm, "reference_precip_mm", "fmlm");
    std::vector<std::string> crop_ids;
    for (const auto& c : ds.crops) crop_ids.push_back(c.id);
    auto predictors = fmlm::predictor_names(crop_ids);
    auto coef_path = dir / get<std::string>(fm, "coefficients", "fmlm");
    ds.fmlm.coefficients = fmlm::read_coefficients_csv(coef_path, crop_ids, predictors);
    if (fm.contains("history_panel")) {
        ds.fmlm.history = fmlm::read_panel_csv(dir / get<std::string>(fm, "history_panel", "fmlm"), crop_ids, predictors);
    }

    for (const auto& l : get_or<json>(doc, "levers", "", json::array())) {
        LeverDef lever;
        lever.key = get<std::string>(l, "key", "levers");
        std::string path = "levers." + lever.key;
        lever.branch = get<std::string>(l, "branch", path);
        lever.label = get_or<std::string>(l, "label", path, lever.key);
        lever.kind = with_field(path + ".kind", [&] { return parse_variable_kind(get<std::string>(l, "kind", path)); });
        if (l.contains("base_value") && !l.at("base_value").is_null()) lever.base_value = get<double>(l, "base_value", path);
        lever.series_ref = get_or<std::string>(l, "series_ref", path, "");
        lever.min_pct = get_or<double>(l, "min_pct", path, -100.0);
        lever.max_pct = get_or<double>(l, "max_pct", path, 100.0);
        ds.levers.push_back(std::move(lever));
    }

    const auto& climates = require(doc, "climate_files", "");
    if (!climates.is_object()) schema_error("climate_files", "expected an object");
    for (const auto& [name, rel] : climates.items()) {
        if (!rel.is_string()) schema_error("climate_files." + name, "expected a path");
        ds.climates.emplace(name, read_climate_csv(dir / rel.get<std::string>(), name, ds.horizon));
    }

    ds.tree = build_branch_tree(ds);
    validate_dataset(ds);
    return ds;
}

void save_dataset(const StudyAreaDataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "climate");
    std::filesystem::create_directories(dir / "fmlm");

    json doc;
    doc["name"] = ds.name;
    doc["horizon"] = {{"start", ds.horizon.start.to_string()}, {"end", ds.horizon.end.to_string()}};
    doc["crops"] = json::array();
    for (const auto& c : ds.crops) {
        doc["crops"].push_back({{"id", c.id}, {"label", c.label}, {"base_yield_t_per_ha", c.base_yield_t_per_ha}, {"kc", c.kc}});
    }
    json water;
    water["latitude_deg"] = ds.water.latitude_deg;
    water["diurnal_range_C"] = ds.water.diurnal_range_C;
    water["effective_precip_fraction"] = ds.water.effective_precip_fraction;
    water["sources"] = json::array();
    for (const auto& s : ds.water.sources) {
        json j = {{"id", s.id}, {"label", s.label}, {"kind", std::string(to_string(s.kind))}};
        if (!s.availability_column.empty()) j["availability_column"] = s.availability_column;
        if (s.monthly_cap_m3) j["monthly_cap_m3"] = *s.monthly_cap_m3;
        if (s.kind == SourceKind::reclaimed) {
            j["return_fraction"] = s.return_fraction;
            j["return_from"] = s.return_from;
        }
        water["sources"].push_back(std::move(j));
    }
    water["demands"] = json::array();
    for (const auto& d : ds.water.demands) {
        water["demands"].push_back({{"id", d.id},
                                    {"label", d.label},
                                    {"sector", std::string(to_string(d.sector))},
                                    {"priority", d.priority},
                                    {"sources", d.sources},
                                    {"per_capita_m3_per_month", d.per_capita_m3_per_month},
                                    {"population_share", d.population_share},
                                    {"base_m3_per_month", d.base_m3_per_month},
                                    {"seasonal", d.seasonal}});
    }
    water["districts"] = json::array();
    for (const auto& d : ds.water.districts) {
        water["districts"].push_back({{"id", d.id},
                                      {"label", d.label},
                                      {"cropland_ha", d.cropland_ha},
                                      {"cropland_trend_per_year", d.cropland_trend_per_year},
                                      {"allowed_crops", d.allowed_crops},
                                      {"priority", d.priority},
                                      {"sources", d.sources},
                                      {"base_efficiency", d.base_efficiency}});
    }
    doc["water"] = std::move(water);

    json energy;
    energy["loss_fraction"] = ds.energy.loss_fraction;
    energy["reserve_margin"] = ds.energy.reserve_margin;
    energy["load_factor"] = ds.energy.load_factor;
    energy["sectors"] = json::array();
    for (const auto& s : ds.energy.sectors) {
        energy["sectors"].push_back({{"id", s.id},
                                     {"activity_column", s.activity_column},
                                     {"intensity_kwh", s.intensity_kwh},
                                     {"cooling_sensitivity_per_C", s.cooling_sensitivity_per_C},
                                     {"balance_temperature_C", s.balance_temperature_C}});
    }
    energy["water_infrastructure_kwh_per_m3"] = ds.energy.water_infrastructure_kwh_per_m3;
    energy["plants"] = json::array();
    for (const auto& p : ds.energy.plants) {
        energy["plants"].push_back({{"id", p.id},
                                    {"label", p.label},
                                    {"in_area", p.in_area},
                                    {"fuel", std::string(to_string(p.fuel))},
                                    {"capacity_MW", p.capacity_MW},
                                    {"capacity_factor", p.capacity_factor},
                                    {"merit_rank", p.merit_rank},
                                    {"emission_factor_t_per_GWh", p.emission_factor_t_per_GWh},
                                    {"water_factor_m3_per_GWh", p.water_factor_m3_per_GWh}});
    }
    doc["energy"] = std::move(energy);

    doc["fmlm"] = {{"coefficients", "fmlm/coefficients.csv"},
                   {"reference_temperature_C", ds.fmlm.reference_temperature_C},
                   {"reference_precip_mm", ds.fmlm.reference_precip_mm}};
    fmlm::write_coefficients_csv(ds.fmlm.coefficients, dir / "fmlm/coefficients.csv");
    if (!ds.fmlm.history.rows.empty()) {
        doc["fmlm"]["history_panel"] = "fmlm/history_shares.csv";
        fmlm::write_panel_csv(ds.fmlm.history, ds.fmlm.coefficients.crops, ds.fmlm.coefficients.predictors,
                              dir / "fmlm/history_shares.csv");
    }

    doc["levers"] = json::array();
    for (const auto& l : ds.levers) {
        json j = {{"key", l.key}, {"branch", l.branch}, {"label", l.label},
                  {"kind", std::string(to_string(l.kind))}, {"min_pct", l.min_pct}, {"max_pct", l.max_pct}};
        if (l.base_value) j["base_value"] = *l.base_value;
        if (!l.series_ref.empty()) j["series_ref"] = l.series_ref;
        doc["levers"].push_back(std::move(j));
    }

    doc["climate_files"] = json::object();
    for (const auto& [name, climate] : ds.climates) {
        std::string rel = "climate/" + name + ".csv";
        doc["climate_files"][name] = rel;
        write_climate_csv(climate, dir / rel);
    }

    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error(fmt::format("cannot write '{}'", (dir / "manifest.json").string()));
    out << doc.dump(2) << '\n';
}

}  // namespace fewsim
