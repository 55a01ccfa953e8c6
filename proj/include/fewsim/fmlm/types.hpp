#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fewsim::fmlm {

/// Coefficients of a fractional multinomial logit. The first crop is the base category
/// with implicit all-zero coefficients; `betas` holds the other J-1 rows over K predictors.
struct Coefficients {
    std::vector<std::string> crops;
    std::vector<std::string> predictors;
    std::vector<double> betas;  // row-major (J-1) x K

    bool operator==(const Coefficients&) const = default;

    std::size_t num_crops() const { return crops.size(); }
    std::size_t num_predictors() const { return predictors.size(); }
    double& beta(std::size_t crop_row, std::size_t k) { return betas[crop_row * predictors.size() + k]; }
    double beta(std::size_t crop_row, std::size_t k) const {
        return betas[crop_row * predictors.size() + k];
    }

    static Coefficients zeros(std::vector<std::string> crops, std::vector<std::string> predictors) {
        Coefficients c{std::move(crops), std::move(predictors), {}};
        c.betas.assign((c.crops.size() - 1) * c.predictors.size(), 0.0);
        return c;
    }
};

struct PanelRow {
    std::string district;
    int year = 0;
    std::vector<double> predictors;  // K
    std::vector<double> shares;      // J, non-negative, sums to 1

    bool operator==(const PanelRow&) const = default;
};

/// Observed crop-share panel used for fitting.
struct SharePanel {
    std::vector<PanelRow> rows;

    bool operator==(const SharePanel&) const = default;
};

}  // namespace fewsim::fmlm
