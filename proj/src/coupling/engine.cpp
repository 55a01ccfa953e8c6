#include "fewsim/coupling/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/fmlm/fmlm.hpp"
#include "fewsim/water/demand.hpp"

namespace fewsim::coupling {

double link_energy_for_water(const water::AllocationMatrix& allocation, const water::WaterNetwork& network,
                             const std::map<std::string, double>& kwh_per_m3) {
    return energy::water_infrastructure_demand(allocation, network, kwh_per_m3).total;
}

double link_water_for_energy(std::span<const double> generation, const std::vector<PowerPlant>& catalog) {
    if (generation.size() != catalog.size()) {
        throw ValidationError("link_water_for_energy: one generation value per plant expected");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (generation[i] < 0.0) throw ValidationError("link_water_for_energy: generation must be >= 0");
        if (catalog[i].in_area) total += generation[i] * catalog[i].water_factor_m3_per_GWh;
    }
    return total;
}

void validate_deltas(const StudyAreaDataset& dataset, const std::map<std::string, double>& deltas) {
    for (const auto& [key, value] : deltas) {
        const auto* lever = dataset.find_lever(key);
        if (lever == nullptr) throw ValidationError(fmt::format("'{}' is not an adjustable variable", key));
        if (!std::isfinite(value) || value < lever->min_pct || value > lever->max_pct) {
            throw ValidationError(fmt::format("delta {} for '{}' outside [{}, {}]", value, key, lever->min_pct,
                                              lever->max_pct));
        }
    }
}

namespace {

using Values = std::vector<double>;

double rel_change(double now, double before) { return std::abs(now - before) / std::max(std::abs(now), 1.0); }

}  // namespace

struct CouplingEngine::Impl {
    const StudyAreaDataset& ds;
    EngineOptions opt;
    const ClimateFile& climate;
    LeverSettings levers;
    water::WaterNetwork network;
    std::vector<WaterDemandNode> demand_nodes;
    std::shared_ptr<const fmlm::Coefficients> coefs;
    std::vector<double> plant_capacity;
    std::vector<double> sector_scale;
    std::vector<double> source_scale;
    std::optional<std::size_t> power_node;
    std::vector<std::optional<std::size_t>> district_of_node;  // demand node -> district index
    std::vector<std::vector<double>> areas;                    // district x crop, current year

    CouplingState state;
    ScenarioResult result;

    // series handles
    std::vector<Values*> src_delivered, src_availability;
    std::vector<Values*> dem_demand, dem_delivered, dem_unmet;
    Values *ag_demand, *ag_delivered, *ag_unmet, *all_demand, *all_delivered, *all_unmet, *supply_delivered,
        *water_root;
    std::vector<std::vector<Values*>> delivery_flows;  // source x demand, null when not eligible
    std::vector<Values*> sector_values;
    Values* industrial = nullptr;
    std::vector<Values*> infra_by_source;
    Values *infra_total, *energy_demand, *energy_root, *generation, *gross, *unserved, *emissions_total,
        *reserve_ok, *in_gen, *in_em, *out_gen, *out_em;
    std::vector<Values*> plant_gen, plant_em;
    std::vector<std::vector<Values*>> district_area, district_prod, district_flow;  // district x crop
    std::vector<Values*> district_area_total, district_prod_total;
    std::vector<Values*> crop_area, crop_prod;
    Values *crops_area, *crops_prod, *districts_area, *districts_prod, *food_root;

    Impl(const StudyAreaDataset& dataset, ScenarioSpec spec, EngineOptions options)
        : ds(dataset), opt(std::move(options)), climate(dataset.climate(spec.climate)) {
        validate_deltas(ds, spec.deltas);
        levers = LeverSettings(spec.deltas);
        network = water::make_network(ds);
        demand_nodes = ds.demand_nodes();
        coefs = opt.coefficients ? opt.coefficients
                                 : std::make_shared<const fmlm::Coefficients>(ds.fmlm.coefficients);
        if (coefs->crops.size() != ds.crops.size()) throw ValidationError("coefficients do not match crop catalog");

        for (const auto& p : ds.energy.plants) {
            double scale = p.fuel == Fuel::solar ? levers.scale(Lever::solar_capacity) : 1.0;
            plant_capacity.push_back(p.capacity_MW * scale);
        }
        for (const auto& s : ds.energy.sectors) {
            sector_scale.push_back(s.id == "commercial" ? levers.scale(Lever::commercial_energy_intensity) : 1.0);
        }
        for (const auto& s : ds.water.sources) {
            double scale = 1.0;
            if (s.id == "CAP") scale = levers.scale(Lever::cap_availability);
            if (s.id == "SRP") scale = levers.scale(Lever::srp_availability);
            if (s.kind == SourceKind::reclaimed) scale = levers.scale(Lever::wwtp_reuse);
            source_scale.push_back(scale);
        }
        for (std::size_t d = 0; d < demand_nodes.size(); ++d) {
            if (demand_nodes[d].sector == DemandSector::power_plants && !power_node) power_node = d;
            std::optional<std::size_t> district;
            for (std::size_t k = 0; k < ds.water.districts.size(); ++k) {
                if (demand_nodes[d].sector == DemandSector::agricultural && ds.water.districts[k].id == demand_nodes[d].id) {
                    district = k;
                }
            }
            district_of_node.push_back(district);
        }

        result.spec = std::move(spec);
        result.horizon = ds.horizon;
        state.cursor = ds.horizon.start;
        register_series();
    }

    Values* add(const std::string& branch, const std::string& variable, Unit unit) {
        auto& slot = result.series[branch][variable];
        slot = make_series(ds.horizon, unit);
        return &slot.values;
    }

    void register_series() {
        const auto m3 = Unit::m3_per_month;
        const auto gwh = Unit::GWh_per_month;
        const auto tco2 = Unit::tCO2_per_month;
        for (const auto& s : ds.water.sources) {
            src_delivered.push_back(add(s.branch(), "delivered", m3));
            src_availability.push_back(add(s.branch(), "availability", m3));
        }
        for (const auto& d : demand_nodes) {
            dem_demand.push_back(add(d.branch(), "demand", m3));
            dem_delivered.push_back(add(d.branch(), "delivered", m3));
            dem_unmet.push_back(add(d.branch(), "unmet", m3));
        }
        ag_demand = add("water/demand/agriculture", "demand", m3);
        ag_delivered = add("water/demand/agriculture", "delivered", m3);
        ag_unmet = add("water/demand/agriculture", "unmet", m3);
        all_demand = add("water/demand", "demand", m3);
        all_delivered = add("water/demand", "delivered", m3);
        all_unmet = add("water/demand", "unmet", m3);
        supply_delivered = add("water/supply", "delivered", m3);
        water_root = add("water", "delivered", m3);

        // Flows are stored in a vector; reserve so handles stay valid.
        std::size_t flow_count = 0;
        for (const auto& d : network.demands) flow_count += d.preference.size();
        flow_count += ds.water.districts.size() * ds.crops.size();
        result.flows.reserve(flow_count);
        delivery_flows.assign(network.sources.size(), std::vector<Values*>(network.demands.size(), nullptr));
        for (std::size_t d = 0; d < network.demands.size(); ++d) {
            for (auto s : network.demands[d].preference) {
                result.flows.push_back({ds.water.sources[s].branch(), demand_nodes[d].branch(), make_series(ds.horizon, m3)});
                delivery_flows[s][d] = &result.flows.back().series.values;
            }
        }

        for (const auto& s : ds.energy.sectors) {
            sector_values.push_back(add(s.branch(), "demand", gwh));
            if (s.id == "industrial") industrial = sector_values.back();
        }
        if (industrial == nullptr) industrial = add("energy/demand/industrial", "demand", gwh);
        for (const auto& s : ds.water.sources) {
            infra_by_source.push_back(add("energy/demand/industrial/water_infrastructure/" + s.id, "demand", gwh));
        }
        infra_total = add("energy/demand/industrial/water_infrastructure", "demand", gwh);
        energy_demand = add("energy/demand", "demand", gwh);
        energy_root = add("energy", "demand", gwh);
        generation = add("energy/supply", "generation", gwh);
        gross = add("energy/supply", "gross_demand", gwh);
        unserved = add("energy/supply", "unserved", gwh);
        emissions_total = add("energy/supply", "emissions", tco2);
        reserve_ok = add("energy/supply", "reserve_ok", Unit::dimensionless);
        in_gen = add("energy/supply/in_area", "generation", gwh);
        in_em = add("energy/supply/in_area", "emissions", tco2);
        out_gen = add("energy/supply/out_of_area", "generation", gwh);
        out_em = add("energy/supply/out_of_area", "emissions", tco2);
        for (const auto& p : ds.energy.plants) {
            plant_gen.push_back(add(p.branch(), "generation", gwh));
            plant_em.push_back(add(p.branch(), "emissions", tco2));
        }

        for (const auto& d : ds.water.districts) {
            std::string branch = "food/districts/" + d.id;
            std::vector<Values*> a, p, f;
            for (const auto& c : ds.crops) {
                a.push_back(add(branch, "area_" + c.id, Unit::ha));
                p.push_back(add(branch, "production_" + c.id, Unit::tonne));
                result.flows.push_back({d.branch(), "food/crops/" + c.id, make_series(ds.horizon, m3)});
                f.push_back(&result.flows.back().series.values);
            }
            district_area.push_back(std::move(a));
            district_prod.push_back(std::move(p));
            district_flow.push_back(std::move(f));
            district_area_total.push_back(add(branch, "area", Unit::ha));
            district_prod_total.push_back(add(branch, "production", Unit::tonne));
        }
        for (const auto& c : ds.crops) {
            crop_area.push_back(add("food/crops/" + c.id, "area", Unit::ha));
            crop_prod.push_back(add("food/crops/" + c.id, "production", Unit::tonne));
        }
        crops_area = add("food/crops", "area", Unit::ha);
        crops_prod = add("food/crops", "production", Unit::tonne);
        districts_area = add("food/districts", "area", Unit::ha);
        districts_prod = add("food/districts", "production", Unit::tonne);
        food_root = add("food", "production", Unit::tonne);
    }

    void refresh_areas(int year) {
        areas.clear();
        const double scale = levers.scale(Lever::cropland_area);
        for (const auto& d : ds.water.districts) {
            areas.push_back(fmlm::project_crop_areas(ds, *coefs, climate, d.id, year, scale));
        }
    }

    MonthReport step() {
        if (state.month_index >= ds.horizon.months()) throw Error("coupling engine: horizon already complete");
        const YearMonth ym = state.cursor;
        const std::size_t t = state.month_index;
        const int m = ym.month - 1;
        if (t == 0 || ym.month == 1) refresh_areas(ym.year);

        const std::size_t ns = network.sources.size();
        const std::size_t nd = network.demands.size();
        const double population = climate.value("population", ym);
        const water::ClimateMonth cm{ym, climate.value("tmean_C", ym), climate.value("precip_mm", ym)};
        const double ie = levers.delta_pct(Lever::irrigation_ie);

        std::vector<double> demands(nd, 0.0);
        std::vector<std::vector<double>> crop_gross(ds.water.districts.size());
        for (std::size_t d = 0; d < nd; ++d) {
            const auto& node = demand_nodes[d];
            switch (node.sector) {
                case DemandSector::municipal:
                    demands[d] = water::municipal_demand(population * node.population_share,
                                                         node.per_capita_m3_per_month * node.seasonal[m],
                                                         levers.delta_pct(Lever::municipal_wue));
                    break;
                case DemandSector::native_american:
                    demands[d] = population * node.population_share * node.per_capita_m3_per_month * node.seasonal[m];
                    break;
                case DemandSector::industrial:
                    demands[d] = node.base_m3_per_month * node.seasonal[m] * levers.scale(Lever::industrial_water_use);
                    break;
                case DemandSector::power_plants:
                    break;  // set from the coupling link below
                case DemandSector::agricultural:
                    if (auto k = district_of_node[d]) {
                        crop_gross[*k] = water::irrigation_by_crop(ds, ds.water.districts[*k], areas[*k], cm, ie);
                        double total = 0.0;
                        for (double v : crop_gross[*k]) total += v;
                        demands[d] = total;
                    } else {
                        demands[d] = node.base_m3_per_month * node.seasonal[m] / levers.irrigation_divisor();
                    }
                    break;
            }
        }

        std::vector<double> availability(ns, 0.0);
        auto fill_availability = [&] {
            for (std::size_t s = 0; s < ns; ++s) {
                const auto& src = ds.water.sources[s];
                switch (src.kind) {
                    case SourceKind::surface:
                        availability[s] = climate.value(src.availability_column, ym) * source_scale[s];
                        break;
                    case SourceKind::residual:
                        availability[s] = src.monthly_cap_m3 ? *src.monthly_cap_m3
                                                             : std::numeric_limits<double>::infinity();
                        break;
                    case SourceKind::reclaimed: {
                        double base = 0.0;
                        for (const auto& id : src.return_from) base += demands[*network.demand_index(id)];
                        availability[s] = src.return_fraction * source_scale[s] * base;
                        break;
                    }
                }
            }
        };

        const auto sectors = energy::sector_demand(ds.energy, climate, ym, levers.delta_pct(Lever::household_eue),
                                                   sector_scale);
        double sector_total = 0.0;
        for (double v : sectors) sector_total += v;

        MonthReport report;
        report.month = ym;
        double link1_in = state.water_energy_GWh;
        double link2_in = state.power_water_m3;
        double link1 = 0.0, link2 = 0.0;
        energy::WaterInfrastructureDemand infra;
        for (int k = 1;; ++k) {
            if (power_node) demands[*power_node] = link2_in;
            fill_availability();
            report.allocation = water::allocate_water(network, availability, demands, ym);
            infra = energy::water_infrastructure_demand(report.allocation, network,
                                                        ds.energy.water_infrastructure_kwh_per_m3);
            link1 = infra.total;
            report.dispatch = energy::dispatch(ds.energy.plants, sector_total + link1, ds.energy.loss_fraction,
                                               ds.energy.reserve_margin, ds.energy.load_factor, ym, plant_capacity);
            link2 = link_water_for_energy(report.dispatch.generation, ds.energy.plants);
            report.iterations = k;
            report.residual = std::max(rel_change(link1, link1_in), rel_change(link2, link2_in));
            if (opt.single_pass) break;
            if (report.residual < opt.tolerance) break;
            if (k >= opt.max_iterations) {
                report.converged = false;
                break;
            }
            link1_in = link1;
            link2_in = link2;
        }

        commit(t, m, report, infra, sectors, crop_gross);

        result.iterations.push_back(report.iterations);
        if (!opt.single_pass) result.max_residual = std::max(result.max_residual, report.residual);
        if (!report.converged) {
            result.warning = true;
            result.warnings.push_back(fmt::format("{}: coupling did not converge in {} iterations (residual {:.3g})",
                                                  ym.to_string(), report.iterations, report.residual));
        }
        state.water_energy_GWh = link1;
        state.power_water_m3 = link2;
        state.cursor = ym.plus_months(1);
        ++state.month_index;
        return report;
    }

    void commit(std::size_t t, int m, const MonthReport& report, const energy::WaterInfrastructureDemand& infra,
                const std::vector<double>& sectors, const std::vector<std::vector<double>>& crop_gross) {
        const auto& alloc = report.allocation;
        const std::size_t ns = network.sources.size();
        const std::size_t nd = network.demands.size();

        double total_delivered = 0.0, total_demand = 0.0, total_unmet = 0.0;
        double agd = 0.0, agv = 0.0, agu = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            double delivered = alloc.source_total(s);
            (*src_delivered[s])[t] = delivered;
            (*src_availability[s])[t] = std::isfinite(alloc.availability[s]) ? alloc.availability[s] : delivered;
            total_delivered += delivered;
            for (std::size_t d = 0; d < nd; ++d) {
                if (delivery_flows[s][d]) (*delivery_flows[s][d])[t] = alloc.at(s, d);
            }
        }
        for (std::size_t d = 0; d < nd; ++d) {
            double delivered = alloc.delivered_to(d);
            (*dem_demand[d])[t] = alloc.demand[d];
            (*dem_delivered[d])[t] = delivered;
            (*dem_unmet[d])[t] = alloc.unmet[d];
            total_demand += alloc.demand[d];
            total_unmet += alloc.unmet[d];
            if (demand_nodes[d].sector == DemandSector::agricultural) {
                agd += alloc.demand[d];
                agv += delivered;
                agu += alloc.unmet[d];
            }
        }
        (*ag_demand)[t] = agd;
        (*ag_delivered)[t] = agv;
        (*ag_unmet)[t] = agu;
        (*all_demand)[t] = total_demand;
        (*all_delivered)[t] = total_delivered;
        (*all_unmet)[t] = total_unmet;
        (*supply_delivered)[t] = total_delivered;
        (*water_root)[t] = total_delivered;

        double net = 0.0;
        for (std::size_t i = 0; i < sectors.size(); ++i) {
            double v = sectors[i];
            if (sector_values[i] == industrial) v += infra.total;
            (*sector_values[i])[t] = v;
        }
        if (std::find(sector_values.begin(), sector_values.end(), industrial) == sector_values.end()) {
            (*industrial)[t] = infra.total;
        }
        for (double v : sectors) net += v;
        net += infra.total;
        for (std::size_t s = 0; s < ns; ++s) (*infra_by_source[s])[t] = infra.by_source[s];
        (*infra_total)[t] = infra.total;
        (*energy_demand)[t] = net;
        (*energy_root)[t] = net;

        const auto& disp = report.dispatch;
        const auto em = energy::emissions(disp.generation, ds.energy.plants);
        double gin = 0.0, gout = 0.0, ein = 0.0, eout = 0.0;
        for (std::size_t p = 0; p < ds.energy.plants.size(); ++p) {
            (*plant_gen[p])[t] = disp.generation[p];
            (*plant_em[p])[t] = em.by_plant[p];
            if (ds.energy.plants[p].in_area) {
                gin += disp.generation[p];
                ein += em.by_plant[p];
            } else {
                gout += disp.generation[p];
                eout += em.by_plant[p];
            }
        }
        (*generation)[t] = disp.total_generation();
        (*gross)[t] = disp.gross_GWh;
        (*unserved)[t] = disp.unserved_GWh;
        (*emissions_total)[t] = em.total;
        (*reserve_ok)[t] = disp.reserve_ok ? 1.0 : 0.0;
        (*in_gen)[t] = gin;
        (*in_em)[t] = ein;
        (*out_gen)[t] = gout;
        (*out_em)[t] = eout;

        std::vector<double> crop_area_sum(ds.crops.size(), 0.0), crop_prod_sum(ds.crops.size(), 0.0);
        double area_all = 0.0, prod_all = 0.0;
        for (std::size_t k = 0; k < ds.water.districts.size(); ++k) {
            std::size_t d = *network.demand_index(ds.water.districts[k].id);
            double demand = alloc.demand[d];
            double deficit = demand > 0.0 ? alloc.unmet[d] / demand : 0.0;
            double delivered = alloc.delivered_to(d);
            double area_total = 0.0, prod_total = 0.0;
            for (std::size_t c = 0; c < ds.crops.size(); ++c) {
                const auto& crop = ds.crops[c];
                double area = areas[k][c];
                double yield_index = climate.value(ClimateFile::yield_column(crop.id), report.month);
                double production = water::monthly_crop_production(area, crop.base_yield_t_per_ha, yield_index, deficit);
                (*district_area[k][c])[t] = area;
                (*district_prod[k][c])[t] = production;
                (*district_flow[k][c])[t] = demand > 0.0 ? delivered * (crop_gross[k][c] / demand) : 0.0;
                area_total += area;
                prod_total += production;
                crop_area_sum[c] += area;
                crop_prod_sum[c] += production;
            }
            (*district_area_total[k])[t] = area_total;
            (*district_prod_total[k])[t] = prod_total;
            area_all += area_total;
            prod_all += prod_total;
        }
        for (std::size_t c = 0; c < ds.crops.size(); ++c) {
            (*crop_area[c])[t] = crop_area_sum[c];
            (*crop_prod[c])[t] = crop_prod_sum[c];
        }
        (*crops_area)[t] = area_all;
        (*crops_prod)[t] = prod_all;
        (*districts_area)[t] = area_all;
        (*districts_prod)[t] = prod_all;
        (*food_root)[t] = prod_all;
        (void)m;
    }
};

CouplingEngine::CouplingEngine(const StudyAreaDataset& dataset, ScenarioSpec spec, EngineOptions options)
    : impl_(std::make_unique<Impl>(dataset, std::move(spec), std::move(options))) {}

CouplingEngine::~CouplingEngine() = default;
CouplingEngine::CouplingEngine(CouplingEngine&&) noexcept = default;

bool CouplingEngine::done() const { return impl_->state.month_index >= impl_->ds.horizon.months(); }

const CouplingState& CouplingEngine::state() const { return impl_->state; }

MonthReport CouplingEngine::step() { return impl_->step(); }

ScenarioResult CouplingEngine::finish() {
    while (!done()) impl_->step();
    // Flows hold raw pointers into the result; move it out only once the run is complete.
    return std::move(impl_->result);
}

ScenarioResult run_scenario(const StudyAreaDataset& dataset, const ScenarioSpec& spec, const EngineOptions& options) {
    CouplingEngine engine(dataset, spec, options);
    return engine.finish();
}

}  // namespace fewsim::coupling
