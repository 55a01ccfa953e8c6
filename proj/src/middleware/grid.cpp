#include "fewsim/middleware/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::middleware {

namespace {

// Values come from lower + i*step; snapping to 1e-9 keeps 0.1*3 from printing as 0.30000000000000004.
double snap(double v) {
    double r = std::round(v * 1e9) / 1e9;
    return r == 0.0 ? 0.0 : r;
}

std::string format_delta(double v) {
    std::string sign = v < 0 ? "-" : "";
    double a = std::abs(v);
    std::string digits;
    if (a == std::floor(a)) {
        digits = fmt::format("{:02d}", static_cast<long long>(a));
    } else {
        digits = fmt::format("{}", a);
        if (a < 10) digits = "0" + digits;
        digits.replace(digits.find('.'), 1, "p");
    }
    return sign + digits;
}

}  // namespace

void VariableAdjustment::validate() const {
    if (key.empty()) throw ValidationError("adjustment: variable key is empty");
    if (!std::isfinite(lower_pct) || !std::isfinite(upper_pct) || !std::isfinite(step_pct)) {
        throw ValidationError(fmt::format("adjustment '{}': bounds and step must be finite", key));
    }
    if (!(step_pct > 0.0)) throw ValidationError(fmt::format("adjustment '{}': step must be > 0", key));
    if (lower_pct > upper_pct) throw ValidationError(fmt::format("adjustment '{}': lower bound above upper", key));
    if (lower_pct == upper_pct) return;
    if (lower_pct > 0.0 || upper_pct < 0.0) {
        throw ValidationError(fmt::format("adjustment '{}': range [{}, {}] must contain 0", key, lower_pct, upper_pct));
    }
    double n = (upper_pct - lower_pct) / step_pct;
    if (std::abs(n - std::round(n)) * step_pct > 1e-9) {
        throw ValidationError(
            fmt::format("adjustment '{}': step {} does not divide range [{}, {}]", key, step_pct, lower_pct, upper_pct));
    }
}

std::vector<double> VariableAdjustment::values() const {
    validate();
    if (lower_pct == upper_pct) return {snap(lower_pct)};
    std::set<double> out;
    long n = std::lround((upper_pct - lower_pct) / step_pct);
    for (long i = 0; i <= n; ++i) out.insert(snap(lower_pct + static_cast<double>(i) * step_pct));
    out.insert(0.0);
    return {out.begin(), out.end()};
}

bool valid_case_name(const std::string& name) {
    if (name.empty() || name.size() > 128 || name.front() == '.') return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                  c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

void CaseConfig::validate() const {
    if (!valid_case_name(case_name)) {
        throw ValidationError(fmt::format("invalid case name '{}' (letters, digits, '-', '_', '.')", case_name));
    }
    if (climate.empty()) throw ValidationError("climate file is empty");
    std::set<std::string> seen;
    for (const auto& a : adjustments) {
        a.validate();
        if (!seen.insert(a.key).second) throw ValidationError(fmt::format("variable '{}' adjusted twice", a.key));
    }
}

std::string scenario_name(const std::string& climate, const std::vector<double>& deltas) {
    bool base = true;
    for (double d : deltas) base = base && d == 0.0;
    if (base) return climate + "_base";
    std::string out = climate + "_";
    for (double d : deltas) out += format_delta(d);
    return out;
}

std::size_t grid_size(const CaseConfig& config) {
    std::size_t n = 1;
    bool has_base = true;
    for (const auto& a : config.adjustments) {
        auto v = a.values();
        n *= v.size();
        has_base = has_base && std::find(v.begin(), v.end(), 0.0) != v.end();
    }
    return has_base ? n : n + 1;
}

std::vector<ScenarioSpec> expand_scenario_grid(const CaseConfig& config) {
    config.validate();
    std::vector<std::vector<double>> sets;
    for (const auto& a : config.adjustments) sets.push_back(a.values());

    std::vector<ScenarioSpec> out;
    auto make = [&](const std::vector<double>& deltas) {
        ScenarioSpec spec;
        spec.climate = config.climate;
        spec.name = scenario_name(config.climate, deltas);
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (deltas[i] != 0.0) spec.deltas[config.adjustments[i].key] = deltas[i];
        }
        return spec;
    };

    std::vector<std::size_t> idx(sets.size(), 0);
    std::vector<double> deltas(sets.size());
    bool done = false;
    while (!done) {
        for (std::size_t i = 0; i < sets.size(); ++i) deltas[i] = sets[i][idx[i]];
        out.push_back(make(deltas));
        done = true;
        for (std::size_t k = sets.size(); k-- > 0;) {
            if (++idx[k] < sets[k].size()) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
    }

    bool has_base = false;
    for (const auto& s : out) has_base = has_base || s.deltas.empty();
    if (!has_base) out.insert(out.begin(), make(std::vector<double>(sets.size(), 0.0)));

    std::set<std::string> names;
    for (const auto& s : out) {
        if (!names.insert(s.name).second) throw ValidationError(fmt::format("scenario name '{}' is not unique", s.name));
    }
    return out;
}

}  // namespace fewsim::middleware
