#include "fewsim/water/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::water {

double municipal_demand(double population, double per_capita_m3_per_month, double wue_delta_pct) {
    return population * per_capita_m3_per_month * (1.0 - wue_delta_pct / 100.0);
}

double extraterrestrial_radiation(double latitude_deg, int day_of_year) {
    constexpr double kSolarConstant = 0.0820;  // MJ m-2 min-1
    const double phi = latitude_deg * std::numbers::pi / 180.0;
    const double angle = 2.0 * std::numbers::pi * day_of_year / 365.0;
    const double dr = 1.0 + 0.033 * std::cos(angle);
    const double delta = 0.409 * std::sin(angle - 1.39);
    const double ws = std::acos(std::clamp(-std::tan(phi) * std::tan(delta), -1.0, 1.0));
    return 24.0 * 60.0 / std::numbers::pi * kSolarConstant * dr *
           (ws * std::sin(phi) * std::sin(delta) + std::cos(phi) * std::cos(delta) * std::sin(ws));
}

double hargreaves_et0(double tmean_C, double diurnal_range_C, double ra_MJ_m2_day) {
    // 0.408 converts MJ m-2 day-1 to mm day-1 of evaporated water.
    double et0 = 0.0023 * 0.408 * ra_MJ_m2_day * std::max(0.0, tmean_C + 17.8) *
                 std::sqrt(std::max(0.0, diurnal_range_C));
    return std::max(0.0, et0);
}

double monthly_et0_mm(double tmean_C, double diurnal_range_C, double latitude_deg, YearMonth ym) {
    int doy = 15;
    for (int m = 1; m < ym.month; ++m) doy += days_in_month(ym.year, m);
    double ra = extraterrestrial_radiation(latitude_deg, doy);
    return hargreaves_et0(tmean_C, diurnal_range_C, ra) * days_in_month(ym.year, ym.month);
}

double net_irrigation_m3_per_ha(double kc, double et0_mm, double precip_mm, double effective_precip_fraction) {
    double net_mm = kc * et0_mm - effective_precip_fraction * precip_mm;
    return mm_over_ha_to_m3(std::max(0.0, net_mm));
}

double gross_irrigation(double area_ha, double net_m3_per_ha, double base_efficiency, double ie_delta_pct) {
    return area_ha * net_m3_per_ha / base_efficiency / (1.0 + ie_delta_pct / 100.0);
}

std::vector<double> irrigation_by_crop(const StudyAreaDataset& dataset, const IrrigationDistrict& district,
                                       std::span<const double> crop_areas, const ClimateMonth& climate,
                                       double ie_delta_pct) {
    if (crop_areas.size() != dataset.crops.size()) {
        throw NotFoundError(fmt::format("irrigation demand: {} crop areas given, {} crop coefficients known",
                                        crop_areas.size(), dataset.crops.size()));
    }
    const int m = climate.month.month - 1;
    const double et0 = monthly_et0_mm(climate.tmean_C, dataset.water.diurnal_range_C[m],
                                      dataset.water.latitude_deg, climate.month);
    std::vector<double> out(crop_areas.size(), 0.0);
    for (std::size_t c = 0; c < crop_areas.size(); ++c) {
        if (crop_areas[c] <= 0.0) continue;
        double net = net_irrigation_m3_per_ha(dataset.crops[c].kc[m], et0, climate.precip_mm,
                                              dataset.water.effective_precip_fraction);
        out[c] = gross_irrigation(crop_areas[c], net, district.base_efficiency, ie_delta_pct);
    }
    return out;
}

double irrigation_demand(const StudyAreaDataset& dataset, const IrrigationDistrict& district,
                         std::span<const double> crop_areas, const ClimateMonth& climate, double ie_delta_pct) {
    double total = 0.0;
    for (double v : irrigation_by_crop(dataset, district, crop_areas, climate, ie_delta_pct)) total += v;
    return total;
}

double monthly_crop_production(double area_ha, double base_yield_t_per_ha, double yield_index,
                               double deficit_fraction) {
    return area_ha * base_yield_t_per_ha * yield_index * (1.0 - deficit_fraction) / 12.0;
}

std::vector<double> crop_production(const StudyAreaDataset& dataset, std::span<const double> crop_areas,
                                    const std::vector<std::array<double, 12>>& yield_index,
                                    const std::array<double, 12>& deficit_fraction) {
    if (crop_areas.size() != dataset.crops.size() || yield_index.size() != dataset.crops.size()) {
        throw ValidationError("crop production: inputs do not match the crop catalog");
    }
    std::vector<double> out(crop_areas.size(), 0.0);
    for (std::size_t c = 0; c < crop_areas.size(); ++c) {
        double realized = 0.0;
        for (int m = 0; m < 12; ++m) realized += yield_index[c][m] * (1.0 - deficit_fraction[m]);
        out[c] = crop_areas[c] * dataset.crops[c].base_yield_t_per_ha * (realized / 12.0);
    }
    return out;
}

}  // namespace fewsim::water
