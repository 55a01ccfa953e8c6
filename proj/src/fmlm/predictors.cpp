#include <fmt/core.h>

#include "fewsim/core/dataset.hpp"
#include "fewsim/core/errors.hpp"
#include "fewsim/fmlm/fmlm.hpp"

namespace fewsim::fmlm {

std::vector<std::string> predictor_names(const std::vector<std::string>& crops) {
    std::vector<std::string> names = {"intercept"};
    for (const auto& c : crops) names.push_back("lag_price_" + c);
    for (const auto& c : crops) names.push_back("lag_yield_" + c);
    names.emplace_back("tmean_anomaly_C");
    names.emplace_back("precip_anomaly_100mm");
    return names;
}

std::vector<double> predictors_for_year(const ClimateFile& climate, const std::vector<std::string>& crops,
                                        int year, double reference_temperature_C, double reference_precip_mm) {
    std::vector<double> x = {1.0};
    for (const auto& c : crops) x.push_back(climate.annual_mean(ClimateFile::price_column(c), year - 1));
    for (const auto& c : crops) x.push_back(climate.annual_mean(ClimateFile::yield_column(c), year - 1));
    x.push_back(climate.annual_mean("tmean_C", year) - reference_temperature_C);
    x.push_back((climate.annual_sum("precip_mm", year) - reference_precip_mm) / 100.0);
    return x;
}

std::vector<double> project_crop_areas(const StudyAreaDataset& dataset, const Coefficients& coefs,
                                       const ClimateFile& climate, const std::string& district, int year,
                                       double cropland_scale) {
    const auto* d = dataset.water.find_district(district);
    if (d == nullptr) throw NotFoundError(fmt::format("unknown irrigation district '{}'", district));
    if (!dataset.horizon.contains_year(year)) {
        throw ValidationError(fmt::format("year {} outside the simulation horizon", year));
    }
    auto x = predictors_for_year(climate, coefs.crops, year, dataset.fmlm.reference_temperature_C,
                                 dataset.fmlm.reference_precip_mm);
    auto shares = mask_shares(predict(coefs, x), coefs.crops, d->allowed_crops);
    double total = d->cropland_in(year, dataset.horizon.first_year()) * cropland_scale;
    return allocate_areas(shares, total);
}

}  // namespace fewsim::fmlm
