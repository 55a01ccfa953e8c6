#include "fewsim/indices/indices.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::indices {

namespace {

constexpr std::string_view kNames[kIndexCount] = {
    "regional_gw_reliance", "ag_gw_reliance",  "mi_surface_reliance", "district_gw_reliance",
    "district_surface_reliance", "renewable_share", "import_dependence", "ag_water_impact",
    "ag_energy_share",      "ag_emission_share",
};

double annual_total(const MonthlySeries& s, const Horizon& h, int year) {
    auto first = h.index_of({year, 1});
    double total = 0.0;
    for (std::size_t m = 0; m < 12; ++m) total += s.values[first + m];
    return total;
}

IndexValue ratio(double num, double den) {
    if (den > 0.0) return {num / den, false};
    return {0.0, true};
}

}  // namespace

std::string_view to_string(Index index) { return kNames[static_cast<std::size_t>(index)]; }

Index parse_index(std::string_view text) {
    for (std::size_t i = 0; i < kIndexCount; ++i) {
        if (kNames[i] == text) return static_cast<Index>(i);
    }
    throw ValidationError(fmt::format("unknown index '{}'", text));
}

Sector sector_of(Index index) {
    switch (index) {
        case Index::renewable_share:
        case Index::import_dependence:
            return Sector::energy;
        case Index::ag_water_impact:
        case Index::ag_energy_share:
        case Index::ag_emission_share:
            return Sector::food;
        default:
            return Sector::water;
    }
}

IndexInputs index_inputs(const ScenarioResult& result, const StudyAreaDataset& ds, int year) {
    const auto& h = result.horizon;
    if (!h.contains_year(year)) {
        throw NotFoundError(fmt::format("year {} outside {}..{}", year, h.first_year(), h.last_year()));
    }
    std::map<std::string, SourceKind> source_kind;
    for (const auto& s : ds.water.sources) source_kind[s.branch()] = s.kind;
    std::map<std::string, DemandSector> demand_sector;
    std::map<std::string, bool> is_district;
    for (const auto& d : ds.demand_nodes()) demand_sector[d.branch()] = d.sector;
    for (const auto& d : ds.water.districts) is_district[d.branch()] = true;
    std::string gw_source;
    for (const auto& s : ds.water.sources) {
        if (s.kind == SourceKind::residual) gw_source = s.id;
    }

    IndexInputs in;
    for (const auto& f : result.flows) {
        auto sk = source_kind.find(f.from);
        auto ds_it = demand_sector.find(f.to);
        if (sk == source_kind.end() || ds_it == demand_sector.end()) continue;
        const double v = annual_total(f.series, h, year);
        const bool gw = sk->second == SourceKind::residual;
        const bool surface = sk->second == SourceKind::surface;
        const auto sector = ds_it->second;
        in.delivered += v;
        in.sector_delivered[static_cast<std::size_t>(sector)] += v;
        if (gw) {
            in.gw_delivered += v;
            in.sector_gw[static_cast<std::size_t>(sector)] += v;
        }
        if (sector == DemandSector::agricultural) {
            in.ag_delivered += v;
            if (gw) in.ag_gw += v;
        }
        if (sector == DemandSector::municipal || sector == DemandSector::industrial) {
            in.mi_delivered += v;
            if (surface) in.mi_surface += v;
        }
        if (is_district.count(f.to)) {
            in.district_delivered += v;
            if (gw) in.district_gw += v;
            if (surface) in.district_surface += v;
        }
    }

    for (const auto& p : ds.energy.plants) {
        const auto* s = result.find(p.branch(), "generation");
        if (!s) continue;
        double g = annual_total(*s, h, year);
        in.generation += g;
        if (is_renewable(p.fuel)) in.renewable_generation += g;
        if (!p.in_area) in.imported_generation += g;
    }
    in.electricity_demand = annual_total(result.get("energy/demand", "demand"), h, year);
    in.emissions = annual_total(result.get("energy/supply", "emissions"), h, year);
    auto kwh = ds.energy.water_infrastructure_kwh_per_m3.find(gw_source);
    in.ag_pumping_energy = kwh == ds.energy.water_infrastructure_kwh_per_m3.end() ? 0.0 : kwh_to_gwh(in.ag_gw * kwh->second);
    return in;
}

IndexVector compute_indices(const ScenarioResult& result, const StudyAreaDataset& ds, int year) {
    const auto in = index_inputs(result, ds, year);
    IndexVector out;
    out.scenario = result.spec.name;
    out.year = year;
    out[Index::regional_gw_reliance] = ratio(in.gw_delivered, in.delivered);
    out[Index::ag_gw_reliance] = ratio(in.ag_gw, in.ag_delivered);
    out[Index::mi_surface_reliance] = ratio(in.mi_surface, in.mi_delivered);
    out[Index::district_gw_reliance] = ratio(in.district_gw, in.district_delivered);
    out[Index::district_surface_reliance] = ratio(in.district_surface, in.district_delivered);
    out[Index::renewable_share] = ratio(in.renewable_generation, in.generation);
    out[Index::import_dependence] = ratio(in.imported_generation, in.generation);
    out[Index::ag_water_impact] = ratio(in.ag_delivered, in.delivered);
    out[Index::ag_energy_share] = ratio(in.ag_pumping_energy, in.electricity_demand);
    // Emissions prorated by the agricultural energy share; undefined without emissions.
    auto share = out[Index::ag_energy_share];
    if (in.emissions > 0.0 && !share.flagged) {
        out[Index::ag_emission_share] = ratio(share.value * in.emissions, in.emissions);
    } else {
        out[Index::ag_emission_share] = {0.0, true};
    }
    return out;
}

IndexVector index_deltas(const IndexVector& scenario, const IndexVector& base) {
    if (scenario.year != base.year) {
        throw ValidationError(fmt::format("index_deltas: years differ ({} vs {})", scenario.year, base.year));
    }
    IndexVector out;
    out.scenario = scenario.scenario;
    out.year = scenario.year;
    for (std::size_t i = 0; i < kIndexCount; ++i) {
        const auto& v = scenario.values[i];
        const auto& b = base.values[i];
        out.values[i].flagged = v.flagged || b.flagged;
        out.values[i].value = out.values[i].flagged ? 0.0 : (v.value - b.value) / std::max(std::abs(b.value), 1e-9);
    }
    return out;
}

}  // namespace fewsim::indices
