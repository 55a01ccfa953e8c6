#include "fewsim/fmlm/fmlm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/kernels/kernels.hpp"

namespace fewsim::fmlm {

namespace {

void softmax_with_base(std::span<const double> eta, std::span<double> shares) {
    // eta holds the J-1 non-base linear predictors; the base is 0.
    double peak = 0.0;
    for (double e : eta) peak = std::max(peak, e);
    double base = std::exp(-peak);
    double total = base;
    for (std::size_t j = 0; j < eta.size(); ++j) {
        shares[j + 1] = std::exp(eta[j] - peak);
        total += shares[j + 1];
    }
    shares[0] = base / total;
    for (std::size_t j = 1; j < shares.size(); ++j) shares[j] /= total;
}

/// Dense design and response matrices for a panel.
struct Design {
    std::size_t n = 0, k = 0, j = 0;
    std::vector<double> x;  // n x k
    std::vector<double> y;  // n x j
};

Design make_design(const SharePanel& panel, std::size_t k, std::size_t j) {
    Design d{panel.rows.size(), k, j, {}, {}};
    d.x.reserve(d.n * k);
    d.y.reserve(d.n * j);
    for (const auto& row : panel.rows) {
        d.x.insert(d.x.end(), row.predictors.begin(), row.predictors.end());
        d.y.insert(d.y.end(), row.shares.begin(), row.shares.end());
    }
    return d;
}

/// Mean log-likelihood and its gradient for (J-1) x K coefficients `theta`.
struct Evaluator {
    const Design& d;
    std::vector<double> eta;     // n x (J-1), column-blocked by crop
    std::vector<double> resid;   // n
    std::vector<double> shares;  // J scratch
    std::vector<double> eta_row; // J-1 scratch

    explicit Evaluator(const Design& design)
        : d(design), eta(design.n * (design.j - 1)), resid(design.n), shares(design.j), eta_row(design.j - 1) {}

    /// Returns sum_i sum_j y log p. Fills `grad` (sum form) when non-null.
    double operator()(std::span<const double> theta, std::vector<double>* grad) {
        const std::size_t jm1 = d.j - 1;
        for (std::size_t c = 0; c < jm1; ++c) {
            kernels::gemv(d.x, d.n, d.k, theta.subspan(c * d.k, d.k),
                          std::span<double>(eta).subspan(c * d.n, d.n));
        }
        if (grad) grad->assign(jm1 * d.k, 0.0);
        std::vector<double> residuals;
        if (grad) residuals.assign(jm1 * d.n, 0.0);

        double ll = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            for (std::size_t c = 0; c < jm1; ++c) eta_row[c] = eta[c * d.n + i];
            softmax_with_base(eta_row, shares);
            const double* y = d.y.data() + i * d.j;
            for (std::size_t c = 0; c < d.j; ++c) {
                if (y[c] > 0.0) ll += y[c] * std::log(shares[c]);
            }
            if (grad) {
                for (std::size_t c = 0; c < jm1; ++c) residuals[c * d.n + i] = y[c + 1] - shares[c + 1];
            }
        }
        if (grad) {
            for (std::size_t c = 0; c < jm1; ++c) {
                kernels::gemv_t_acc(d.x, d.n, d.k, std::span<const double>(residuals).subspan(c * d.n, d.n),
                                    std::span<double>(*grad).subspan(c * d.k, d.k));
            }
        }
        return ll;
    }
};

void check_panel(const SharePanel& panel, std::size_t k, std::size_t j) {
    for (std::size_t r = 0; r < panel.rows.size(); ++r) {
        const auto& row = panel.rows[r];
        if (row.predictors.size() != k || row.shares.size() != j) {
            throw ValidationError(fmt::format("panel row {}: expected {} predictors and {} shares", r, k, j));
        }
        double total = 0.0;
        for (double s : row.shares) {
            if (!(s >= 0.0) || !std::isfinite(s)) {
                throw ValidationError(fmt::format("panel row {}: shares must be finite and non-negative", r));
            }
            total += s;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ValidationError(fmt::format("panel row {}: shares sum to {}, not 1", r, total));
        }
        for (double x : row.predictors) {
            if (!std::isfinite(x)) throw ValidationError(fmt::format("panel row {}: non-finite predictor", r));
        }
    }
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

void predict_into(const Coefficients& coefs, std::span<const double> x, std::span<double> shares) {
    const std::size_t k = coefs.num_predictors();
    const std::size_t j = coefs.num_crops();
    if (x.size() != k || shares.size() != j || j < 1 || coefs.betas.size() != (j - 1) * k) {
        throw ValidationError(fmt::format("fmlm predict: expected {} predictors and {} crops, got {} and {}", k, j,
                                          x.size(), shares.size()));
    }
    std::vector<double> eta(j - 1);
    for (std::size_t c = 0; c + 1 < j; ++c) {
        eta[c] = kernels::dot(std::span<const double>(coefs.betas).subspan(c * k, k), x);
    }
    softmax_with_base(eta, shares);
}

std::vector<double> predict(const Coefficients& coefs, std::span<const double> x) {
    std::vector<double> shares(coefs.num_crops());
    predict_into(coefs, x, shares);
    return shares;
}

double log_likelihood(const Coefficients& coefs, const SharePanel& panel) {
    check_panel(panel, coefs.num_predictors(), coefs.num_crops());
    Design d = make_design(panel, coefs.num_predictors(), coefs.num_crops());
    Evaluator eval(d);
    return eval(coefs.betas, nullptr);
}

std::vector<double> gradient(const Coefficients& coefs, const SharePanel& panel) {
    check_panel(panel, coefs.num_predictors(), coefs.num_crops());
    Design d = make_design(panel, coefs.num_predictors(), coefs.num_crops());
    Evaluator eval(d);
    std::vector<double> g;
    eval(coefs.betas, &g);
    return g;
}

FitResult fit(const SharePanel& panel, std::vector<std::string> crops, std::vector<std::string> predictors,
              const FitOptions& options) {
    const std::size_t k = predictors.size();
    const std::size_t j = crops.size();
    if (j < 2) throw ValidationError("fmlm fit: at least two crops required");
    if (k < 1) throw ValidationError("fmlm fit: at least one predictor required");
    check_panel(panel, k, j);
    {
        std::set<std::vector<double>> distinct;
        for (const auto& row : panel.rows) distinct.insert(row.predictors);
        if (distinct.size() < 2) throw ValidationError("fmlm fit: at least two distinct predictor rows required");
    }

    Design d = make_design(panel, k, j);
    const double n = static_cast<double>(d.n);

    // Standardize columns; an all-ones column is treated as the intercept and absorbs the centering.
    std::vector<double> mean(k, 0.0), scale(k, 1.0);
    std::optional<std::size_t> intercept;
    for (std::size_t c = 0; c < k; ++c) {
        bool ones = true;
        double m = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            double v = d.x[i * k + c];
            ones = ones && v == 1.0;
            m += v;
        }
        if (ones && !intercept) {
            intercept = c;
            continue;
        }
        mean[c] = m / n;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (intercept && c == *intercept) continue;
        if (!intercept) mean[c] = 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            double v = d.x[i * k + c] - mean[c];
            ss += v * v;
        }
        double sd = std::sqrt(ss / n);
        scale[c] = sd > 0.0 ? sd : 1.0;
        for (std::size_t i = 0; i < d.n; ++i) d.x[i * k + c] = (d.x[i * k + c] - mean[c]) / scale[c];
    }

    FitResult result;
    for (std::size_t c = 1; c < j; ++c) {
        bool all_zero = true, all_one = true;
        for (std::size_t i = 0; i < d.n; ++i) {
            all_zero = all_zero && d.y[i * j + c] == 0.0;
            all_one = all_one && d.y[i * j + c] == 1.0;
        }
        if (all_zero || all_one) result.degenerate_crops.push_back(crops[c]);
    }
    {
        bool base_zero = true, base_one = true;
        for (std::size_t i = 0; i < d.n; ++i) {
            base_zero = base_zero && d.y[i * j] == 0.0;
            base_one = base_one && d.y[i * j] == 1.0;
        }
        if (base_zero || base_one) result.degenerate_crops.push_back(crops[0]);
    }
    result.degenerate = !result.degenerate_crops.empty();

    Evaluator eval(d);
    const std::size_t p = (j - 1) * k;
    std::vector<double> theta(p, 0.0), grad, trial(p), trial_grad;
    double ll = eval(theta, &grad);
    result.history.push_back(ll);

    auto project = [&](std::vector<double>& v) {
        for (double& x : v) x = std::clamp(x, -options.clip, options.clip);
    };
    auto projected_norm = [&](const std::vector<double>& th, const std::vector<double>& g) {
        double m = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            double gi = g[i] / n;
            if ((th[i] >= options.clip && gi > 0.0) || (th[i] <= -options.clip && gi < 0.0)) continue;
            m = std::max(m, std::abs(gi));
        }
        return m;
    };

    double step = 1.0;
    std::vector<double> prev_theta, prev_grad;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (projected_norm(theta, grad) < options.gradient_tolerance) {
            result.converged = true;
            break;
        }
        // Barzilai-Borwein trial step on the averaged objective, then Armijo backtracking.
        if (!prev_theta.empty()) {
            double sy = 0.0, ss = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                double s = theta[i] - prev_theta[i];
                double y = (grad[i] - prev_grad[i]) / n;
                sy += s * y;
                ss += s * s;
            }
            if (sy < 0.0 && ss > 0.0) step = std::clamp(-ss / sy, 1e-6, 1e6);
        }
        bool accepted = false;
        double trial_ll = ll;
        while (step > 1e-14) {
            for (std::size_t i = 0; i < p; ++i) trial[i] = theta[i] + step * grad[i] / n;
            project(trial);
            double ascent = 0.0;
            for (std::size_t i = 0; i < p; ++i) ascent += grad[i] / n * (trial[i] - theta[i]);
            trial_ll = eval(trial, &trial_grad);
            if (std::isfinite(trial_ll) && trial_ll / n >= ll / n + 1e-4 * ascent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no further ascent possible at machine precision
        prev_theta = theta;
        prev_grad = grad;
        theta.swap(trial);
        grad.swap(trial_grad);
        ll = trial_ll;
        result.history.push_back(ll);
    }
    if (!result.converged && projected_norm(theta, grad) < options.gradient_tolerance) result.converged = true;
    result.iterations = it;

    // Back to the raw predictor scale.
    Coefficients coefs = Coefficients::zeros(std::move(crops), std::move(predictors));
    for (std::size_t c = 0; c + 1 < j; ++c) {
        double shift = 0.0;
        for (std::size_t q = 0; q < k; ++q) {
            if (intercept && q == *intercept) continue;
            double b = theta[c * k + q] / scale[q];
            coefs.beta(c, q) = b;
            shift += b * mean[q];
        }
        if (intercept) coefs.beta(c, *intercept) = theta[c * k + *intercept] - shift;
    }
    result.coefficients = std::move(coefs);
    result.log_likelihood = ll;
    auto raw_grad = gradient(result.coefficients, panel);
    result.gradient_norm = inf_norm(raw_grad) / n;
    return result;
}

std::vector<double> allocate_areas(std::span<const double> shares, double total_ha) {
    std::vector<double> areas(shares.size());
    for (std::size_t i = 0; i < shares.size(); ++i) areas[i] = shares[i] * total_ha;
    return areas;
}

std::vector<double> mask_shares(std::span<const double> shares, const std::vector<std::string>& crops,
                                const std::vector<std::string>& allowed) {
    std::vector<double> out(shares.begin(), shares.end());
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (std::find(allowed.begin(), allowed.end(), crops[i]) == allowed.end()) out[i] = 0.0;
        total += out[i];
    }
    if (total > 0.0) {
        for (double& s : out) s /= total;
    }
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(',', pos);
        std::string cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        out.push_back(std::move(cell));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

double to_double(const std::string& text, const std::string& field) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw DatasetError(DatasetError::Kind::schema, field, field + ": '" + text + "' is not a finite number");
    }
    return v;
}

}  // namespace

Coefficients read_coefficients_csv(const std::filesystem::path& path, const std::vector<std::string>& crops,
                                   const std::vector<std::string>& predictors) {
    std::ifstream in(path);
    const std::string field = path.filename().string();
    if (!in) {
        throw DatasetError(DatasetError::Kind::missing_file, field,
                           fmt::format("coefficients file '{}' not found", path.string()));
    }
    Coefficients coefs = Coefficients::zeros(crops, predictors);
    std::string line;
    std::getline(in, line);
    if (split_csv(line) != std::vector<std::string>{"crop", "predictor", "beta"}) {
        throw DatasetError(DatasetError::Kind::schema, field, field + ": header must be crop,predictor,beta");
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv(line);
        if (cells.size() != 3) throw DatasetError(DatasetError::Kind::schema, field, field + ": expected 3 columns");
        auto crop_it = std::find(crops.begin(), crops.end(), cells[0]);
        auto pred_it = std::find(predictors.begin(), predictors.end(), cells[1]);
        if (crop_it == crops.end() || crop_it == crops.begin()) {
            throw DatasetError(DatasetError::Kind::schema, field + ":" + cells[0],
                               fmt::format("{}: '{}' is not a non-base crop", field, cells[0]));
        }
        if (pred_it == predictors.end()) {
            throw DatasetError(DatasetError::Kind::schema, field + ":" + cells[1],
                               fmt::format("{}: unknown predictor '{}'", field, cells[1]));
        }
        std::size_t row = static_cast<std::size_t>(crop_it - crops.begin()) - 1;
        std::size_t col = static_cast<std::size_t>(pred_it - predictors.begin());
        if (!seen.insert({row, col}).second) {
            throw DatasetError(DatasetError::Kind::schema, field, fmt::format("{}: duplicate {}/{}", field, cells[0], cells[1]));
        }
        coefs.beta(row, col) = to_double(cells[2], field + ":" + cells[0] + "/" + cells[1]);
    }
    if (seen.size() != coefs.betas.size()) {
        throw DatasetError(DatasetError::Kind::schema, field,
                           fmt::format("{}: expected {} coefficients, found {}", field, coefs.betas.size(), seen.size()));
    }
    return coefs;
}

void write_coefficients_csv(const Coefficients& coefs, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << "crop,predictor,beta\n";
    for (std::size_t c = 1; c < coefs.num_crops(); ++c) {
        for (std::size_t q = 0; q < coefs.num_predictors(); ++q) {
            out << coefs.crops[c] << ',' << coefs.predictors[q] << ',' << fmt::format("{}", coefs.beta(c - 1, q))
                << '\n';
        }
    }
}

SharePanel read_panel_csv(const std::filesystem::path& path, const std::vector<std::string>& crops,
                          const std::vector<std::string>& predictors) {
    std::ifstream in(path);
    const std::string field = path.filename().string();
    if (!in) {
        throw DatasetError(DatasetError::Kind::missing_file, field, fmt::format("panel file '{}' not found", path.string()));
    }
    std::string line;
    std::getline(in, line);
    auto header = split_csv(line);
    std::vector<std::string> expected = {"district", "year"};
    for (const auto& p : predictors) expected.push_back("x_" + p);
    for (const auto& c : crops) expected.push_back("s_" + c);
    if (header != expected) {
        throw DatasetError(DatasetError::Kind::schema, field, field + ": unexpected header");
    }
    SharePanel panel;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv(line);
        std::string where = fmt::format("{}:row {}", field, lineno);
        if (cells.size() != expected.size()) {
            throw DatasetError(DatasetError::Kind::schema, where, where + ": wrong number of cells");
        }
        PanelRow row;
        row.district = cells[0];
        row.year = static_cast<int>(to_double(cells[1], where));
        for (std::size_t q = 0; q < predictors.size(); ++q) row.predictors.push_back(to_double(cells[2 + q], where));
        for (std::size_t c = 0; c < crops.size(); ++c) {
            row.shares.push_back(to_double(cells[2 + predictors.size() + c], where));
        }
        panel.rows.push_back(std::move(row));
    }
    try {
        check_panel(panel, predictors.size(), crops.size());
    } catch (const ValidationError& e) {
        throw DatasetError(DatasetError::Kind::schema, field, field + ": " + e.what());
    }
    return panel;
}

void write_panel_csv(const SharePanel& panel, const std::vector<std::string>& crops,
                     const std::vector<std::string>& predictors, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << "district,year";
    for (const auto& p : predictors) out << ",x_" << p;
    for (const auto& c : crops) out << ",s_" << c;
    out << '\n';
    for (const auto& row : panel.rows) {
        out << row.district << ',' << row.year;
        for (double x : row.predictors) out << ',' << fmt::format("{}", x);
        for (double s : row.shares) out << ',' << fmt::format("{}", s);
        out << '\n';
    }
}

}  // namespace fewsim::fmlm
