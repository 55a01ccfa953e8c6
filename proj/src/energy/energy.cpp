#include "fewsim/energy/energy.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::energy {

std::vector<double> sector_demand(const EnergySettings& settings, const ClimateFile& climate, YearMonth month,
                                  double eue_delta_pct, std::span<const double> intensity_scale) {
    if (!intensity_scale.empty() && intensity_scale.size() != settings.sectors.size()) {
        throw ValidationError("sector_demand: one intensity scale per sector expected");
    }
    const double tmean = climate.value("tmean_C", month);
    std::vector<double> out;
    out.reserve(settings.sectors.size());
    for (std::size_t i = 0; i < settings.sectors.size(); ++i) {
        const auto& s = settings.sectors[i];
        double activity = s.activity_column.empty() ? 1.0 : climate.value(s.activity_column, month);
        double intensity = s.intensity_kwh * (intensity_scale.empty() ? 1.0 : intensity_scale[i]);
        double cooling = 1.0 + s.cooling_sensitivity_per_C * std::max(0.0, tmean - s.balance_temperature_C);
        double gwh = kwh_to_gwh(activity * intensity * cooling);
        if (s.id == "residential") gwh *= 1.0 - eue_delta_pct / 100.0;
        out.push_back(std::max(0.0, gwh));
    }
    return out;
}

WaterInfrastructureDemand water_infrastructure_demand(const water::AllocationMatrix& allocation,
                                                      const water::WaterNetwork& network,
                                                      const std::map<std::string, double>& kwh_per_m3) {
    WaterInfrastructureDemand out;
    out.by_source.assign(network.sources.size(), 0.0);
    for (std::size_t s = 0; s < network.sources.size(); ++s) {
        auto it = kwh_per_m3.find(network.sources[s].id);
        if (it == kwh_per_m3.end()) continue;
        out.by_source[s] = kwh_to_gwh(allocation.source_total(s) * it->second);
        out.total += out.by_source[s];
    }
    return out;
}

double DispatchResult::total_generation() const {
    return std::accumulate(generation.begin(), generation.end(), 0.0);
}

double monthly_capability_GWh(double capacity_MW, YearMonth month) {
    return mw_to_gwh(capacity_MW, hours_in_month(month));
}

DispatchResult dispatch(const std::vector<PowerPlant>& catalog, double net_demand_GWh, double loss_fraction,
                        double reserve_margin, double load_factor, YearMonth month,
                        std::span<const double> capacity_MW) {
    if (!(net_demand_GWh >= 0.0)) throw ValidationError("dispatch: net demand must be >= 0");
    if (!(loss_fraction >= 0.0 && loss_fraction < 1.0)) throw ValidationError("dispatch: loss fraction must be in [0,1)");
    if (!capacity_MW.empty() && capacity_MW.size() != catalog.size()) {
        throw ValidationError("dispatch: capacity override must cover every plant");
    }

    DispatchResult out;
    out.generation.assign(catalog.size(), 0.0);
    out.gross_GWh = loss_fraction == 0.0 ? net_demand_GWh : net_demand_GWh / (1.0 - loss_fraction);

    std::vector<std::size_t> order(catalog.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return catalog[a].merit_rank < catalog[b].merit_rank; });

    double remaining = out.gross_GWh;
    for (auto i : order) {
        double cap = capacity_MW.empty() ? catalog[i].capacity_MW : capacity_MW[i];
        out.capacity_MW += cap;
        if (remaining <= 0.0) continue;
        double g = std::min(monthly_capability_GWh(cap, month) * catalog[i].capacity_factor, remaining);
        out.generation[i] = g;
        remaining -= g;
    }
    out.unserved_GWh = std::max(0.0, remaining);

    const double hours = hours_in_month(month);
    out.implied_peak_MW = gwh_to_mw_average(out.gross_GWh, hours) / load_factor;
    out.reserve_ok = out.capacity_MW >= out.implied_peak_MW * (1.0 + reserve_margin);
    return out;
}

Emissions emissions(std::span<const double> generation, const std::vector<PowerPlant>& catalog) {
    if (generation.size() != catalog.size()) throw ValidationError("emissions: one generation value per plant expected");
    Emissions out;
    out.by_plant.resize(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        out.by_plant[i] = is_renewable(catalog[i].fuel) ? 0.0 : generation[i] * catalog[i].emission_factor_t_per_GWh;
        out.total += out.by_plant[i];
    }
    return out;
}

}  // namespace fewsim::energy
