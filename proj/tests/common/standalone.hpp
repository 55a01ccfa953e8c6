#pragma once

// The water side run without the coupling engine, for the decoupled-limit comparison.

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fewsim/core/dataset.hpp"
#include "fewsim/fmlm/fmlm.hpp"
#include "fewsim/water/allocation.hpp"
#include "fewsim/water/demand.hpp"

namespace standalone {

using namespace fewsim;

// Plants need no water and water needs no energy.
inline StudyAreaDataset decoupled(StudyAreaDataset ds) {
    for (auto& p : ds.energy.plants) p.water_factor_m3_per_GWh = 0.0;
    for (auto& [id, v] : ds.energy.water_infrastructure_kwh_per_m3) v = 0.0;
    return ds;
}

// Demands from the food and demand modules, then allocation, month by month.
inline std::vector<water::AllocationMatrix> water_run(const StudyAreaDataset& ds, const std::string& climate_name) {
    const auto& climate = ds.climate(climate_name);
    auto net = water::make_network(ds);
    auto nodes = ds.demand_nodes();
    std::vector<water::AllocationMatrix> out;
    std::map<std::string, std::vector<double>> areas;
    for (std::size_t t = 0; t < ds.horizon.months(); ++t) {
        YearMonth ym = ds.horizon.at(t);
        int m = ym.month - 1;
        if (ym.month == 1) {
            for (const auto& d : ds.water.districts) {
                areas[d.id] = fmlm::project_crop_areas(ds, ds.fmlm.coefficients, climate, d.id, ym.year);
            }
        }
        double pop = climate.value("population", ym);
        water::ClimateMonth cm{ym, climate.value("tmean_C", ym), climate.value("precip_mm", ym)};
        std::vector<double> demand(nodes.size(), 0.0);
        for (std::size_t d = 0; d < nodes.size(); ++d) {
            const auto& n = nodes[d];
            switch (n.sector) {
                case DemandSector::municipal:
                    demand[d] = water::municipal_demand(pop * n.population_share, n.per_capita_m3_per_month * n.seasonal[m], 0.0);
                    break;
                case DemandSector::native_american:
                    demand[d] = pop * n.population_share * n.per_capita_m3_per_month * n.seasonal[m];
                    break;
                case DemandSector::industrial:
                    demand[d] = n.base_m3_per_month * n.seasonal[m] * 1.0;
                    break;
                case DemandSector::power_plants:
                    break;
                case DemandSector::agricultural:
                    if (const auto* district = ds.water.find_district(n.id)) {
                        demand[d] = water::irrigation_demand(ds, *district, areas[n.id], cm, 0.0);
                    } else {
                        demand[d] = n.base_m3_per_month * n.seasonal[m] / 1.0;
                    }
                    break;
            }
        }
        std::vector<double> avail(ds.water.sources.size());
        for (std::size_t s = 0; s < avail.size(); ++s) {
            const auto& src = ds.water.sources[s];
            if (src.kind == SourceKind::surface) {
                avail[s] = climate.value(src.availability_column, ym) * 1.0;
            } else if (src.kind == SourceKind::residual) {
                avail[s] = src.monthly_cap_m3 ? *src.monthly_cap_m3 : std::numeric_limits<double>::infinity();
            } else {
                double base = 0.0;
                for (const auto& id : src.return_from) base += demand[*net.demand_index(id)];
                avail[s] = src.return_fraction * 1.0 * base;
            }
        }
        out.push_back(water::allocate_water(net, avail, demand, ym));
    }
    return out;
}

}  // namespace standalone
