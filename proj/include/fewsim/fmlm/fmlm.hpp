#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fewsim/fmlm/types.hpp"

namespace fewsim {
struct StudyAreaDataset;
struct ClimateFile;
}  // namespace fewsim

namespace fewsim::fmlm {

/// Crop shares for predictor vector `x`: share_j proportional to exp(beta_j . x), base beta = 0.
/// Throws ValidationError on a dimension mismatch.
std::vector<double> predict(const Coefficients& coefs, std::span<const double> x);
void predict_into(const Coefficients& coefs, std::span<const double> x, std::span<double> shares);

/// Multinomial quasi-log-likelihood  sum_i sum_j y_ij log p_ij.
double log_likelihood(const Coefficients& coefs, const SharePanel& panel);

/// Analytic gradient of log_likelihood with respect to `coefs.betas` (same layout).
std::vector<double> gradient(const Coefficients& coefs, const SharePanel& panel);

struct FitOptions {
    int max_iterations = 5000;
    /// Stop when the infinity norm of the (per-row averaged) projected gradient falls below this.
    double gradient_tolerance = 1e-8;
    /// Box on standardized coefficients; only binds for degenerate crops.
    double clip = 50.0;
};

struct FitResult {
    Coefficients coefficients;
    double log_likelihood = 0.0;
    /// Infinity norm of the averaged gradient at the returned coefficients (raw predictor scale).
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Set when a crop share is identically 0 or 1 across the panel; its coefficients are clipped.
    bool degenerate = false;
    std::vector<std::string> degenerate_crops;
    /// Quasi-log-likelihood after each accepted step, starting at the zero initialisation.
    std::vector<double> history;
};

/// Quasi-maximum-likelihood fit by full-batch gradient ascent with backtracking line search,
/// starting from zero. Predictors are standardized internally; the returned coefficients are on
/// the original scale. Throws ValidationError for malformed or degenerate-design panels.
FitResult fit(const SharePanel& panel, std::vector<std::string> crops, std::vector<std::string> predictors,
              const FitOptions& options = {});

/// {intercept, lagged price index per crop, lagged yield index per crop, temperature, precipitation}
std::vector<std::string> predictor_names(const std::vector<std::string>& crops);

/// Predictor vector for `year` from a climate file (needs year-1 for the lags).
std::vector<double> predictors_for_year(const ClimateFile& climate, const std::vector<std::string>& crops,
                                        int year, double reference_temperature_C, double reference_precip_mm);

/// area_j = share_j x total; shares must sum to 1.
std::vector<double> allocate_areas(std::span<const double> shares, double total_ha);

/// Zeroes crops outside `allowed` and renormalizes. All-zero input stays all-zero.
std::vector<double> mask_shares(std::span<const double> shares, const std::vector<std::string>& crops,
                                const std::vector<std::string>& allowed);

/// Per-crop area (ha, crop catalog order) for one irrigation district and year.
/// Throws NotFoundError for an unknown district and ValidationError for a year outside the horizon.
std::vector<double> project_crop_areas(const StudyAreaDataset& dataset, const Coefficients& coefs,
                                       const ClimateFile& climate, const std::string& district, int year,
                                       double cropland_scale = 1.0);

// CSV interchange. Coefficients: `crop,predictor,beta`, base-category rows omitted.
Coefficients read_coefficients_csv(const std::filesystem::path& path, const std::vector<std::string>& crops,
                                   const std::vector<std::string>& predictors);
void write_coefficients_csv(const Coefficients& coefs, const std::filesystem::path& path);

// Panel: `district,year,x_<predictor>...,s_<crop>...`
SharePanel read_panel_csv(const std::filesystem::path& path, const std::vector<std::string>& crops,
                          const std::vector<std::string>& predictors);
void write_panel_csv(const SharePanel& panel, const std::vector<std::string>& crops,
                     const std::vector<std::string>& predictors, const std::filesystem::path& path);

}  // namespace fewsim::fmlm
