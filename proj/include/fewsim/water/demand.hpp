#pragma once

#include <array>
#include <span>
#include <vector>

#include "fewsim/core/dataset.hpp"

namespace fewsim::water {

/// population x intensity x (1 - wue/100)
double municipal_demand(double population, double per_capita_m3_per_month, double wue_delta_pct);

// MABIA-lite: FAO-56 style Kc x ET0 minus effective precipitation, ET0 by Hargreaves.

/// Extraterrestrial radiation in MJ m-2 day-1 (FAO-56).
double extraterrestrial_radiation(double latitude_deg, int day_of_year);

/// Reference evapotranspiration in mm/day from mean temperature and diurnal range.
double hargreaves_et0(double tmean_C, double diurnal_range_C, double ra_MJ_m2_day);

/// Monthly ET0 (mm) for the middle of `ym`.
double monthly_et0_mm(double tmean_C, double diurnal_range_C, double latitude_deg, YearMonth ym);

/// max(0, kc x ET0 - effective precipitation), in m3 per hectare.
double net_irrigation_m3_per_ha(double kc, double et0_mm, double precip_mm, double effective_precip_fraction);

/// area x net / base efficiency, divided by (1 + ie/100).
double gross_irrigation(double area_ha, double net_m3_per_ha, double base_efficiency, double ie_delta_pct);

struct ClimateMonth {
    YearMonth month;
    double tmean_C = 0.0;
    double precip_mm = 0.0;
};

/// Gross irrigation demand per crop (m3) for one district-month, crop catalog order.
/// Throws NotFoundError when `crop_areas` does not line up with the crop catalog.
std::vector<double> irrigation_by_crop(const StudyAreaDataset& dataset, const IrrigationDistrict& district,
                                       std::span<const double> crop_areas, const ClimateMonth& climate,
                                       double ie_delta_pct);

/// Total of irrigation_by_crop.
double irrigation_demand(const StudyAreaDataset& dataset, const IrrigationDistrict& district,
                         std::span<const double> crop_areas, const ClimateMonth& climate, double ie_delta_pct);

/// Production (t) of one crop for one month: area x base yield x yield index / 12, scaled by
/// the delivered fraction of the district's irrigation demand.
double monthly_crop_production(double area_ha, double base_yield_t_per_ha, double yield_index,
                               double deficit_fraction);

/// Annual production per crop (t) for a district-year given the twelve monthly yield indices per
/// crop and the twelve monthly deficit fractions (unmet / demand) of the district.
std::vector<double> crop_production(const StudyAreaDataset& dataset, std::span<const double> crop_areas,
                                    const std::vector<std::array<double, 12>>& yield_index,
                                    const std::array<double, 12>& deficit_fraction);

}  // namespace fewsim::water
