#pragma once

#include <span>
#include <vector>

#include "fewsim/core/dataset.hpp"
#include "fewsim/water/allocation.hpp"

namespace fewsim::energy {

/// GWh per end-use sector (order of `settings.sectors`): activity x intensity, with a cooling
/// term above the balance temperature. Residential demand is scaled by (1 - eue/100).
/// `intensity_scale`, when non-empty, multiplies each sector's intensity.
std::vector<double> sector_demand(const EnergySettings& settings, const ClimateFile& climate, YearMonth month,
                                  double eue_delta_pct, std::span<const double> intensity_scale = {});

struct WaterInfrastructureDemand {
    std::vector<double> by_source;  // GWh, network source order
    double total = 0.0;
};

/// Sum over sources of delivered volume x per-source energy intensity (kWh/m3).
WaterInfrastructureDemand water_infrastructure_demand(const water::AllocationMatrix& allocation,
                                                      const water::WaterNetwork& network,
                                                      const std::map<std::string, double>& kwh_per_m3);

struct DispatchResult {
    std::vector<double> generation;  // GWh, catalog order
    double gross_GWh = 0.0;
    double unserved_GWh = 0.0;
    double implied_peak_MW = 0.0;
    double capacity_MW = 0.0;
    bool reserve_ok = true;

    double total_generation() const;
};

/// Monthly nameplate energy of a plant in GWh (dispatch scales it by the capacity factor).
double monthly_capability_GWh(double capacity_MW, YearMonth month);

/// Grosses net demand up for losses and fills plants in merit-rank order up to their monthly
/// capability (nameplate x capacity factor). `capacity_MW`, when non-empty, overrides each plant's capacity.
DispatchResult dispatch(const std::vector<PowerPlant>& catalog, double net_demand_GWh, double loss_fraction,
                        double reserve_margin, double load_factor, YearMonth month,
                        std::span<const double> capacity_MW = {});

struct Emissions {
    std::vector<double> by_plant;  // tCO2
    double total = 0.0;
};

Emissions emissions(std::span<const double> generation, const std::vector<PowerPlant>& catalog);

}  // namespace fewsim::energy
