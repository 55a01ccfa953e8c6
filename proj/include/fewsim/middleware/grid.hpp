#pragma once

#include <string>
#include <vector>

#include "fewsim/coupling/scenario.hpp"

namespace fewsim::middleware {

/// Sweep of one adjustable variable in percent. lower == upper is a constant override.
struct VariableAdjustment {
    std::string key;
    double lower_pct = 0.0;
    double upper_pct = 0.0;
    double step_pct = 10.0;

    bool operator==(const VariableAdjustment&) const = default;

    /// Ascending values lower, lower+step, ..., upper, plus 0 when the range brackets it.
    std::vector<double> values() const;
    /// Throws ValidationError.
    void validate() const;
};

struct CaseConfig {
    std::string case_name;
    std::string climate;
    std::vector<VariableAdjustment> adjustments;  // order fixes the scenario naming order

    bool operator==(const CaseConfig&) const = default;

    void validate() const;
};

/// Cartesian product of the adjustment values, first adjustment varying slowest. The base
/// scenario is always present exactly once (put first when a constant override excludes it).
/// Zero deltas are left out of ScenarioSpec::deltas.
std::vector<ScenarioSpec> expand_scenario_grid(const CaseConfig& config);

/// Number of scenarios expand_scenario_grid would return.
std::size_t grid_size(const CaseConfig& config);

/// "<climate>_<d1>...<dk>", each delta as a two-digit percent ("05", "10", "100"),
/// "-" before negatives and "p" for a decimal point ("02p5"). All zeros give "<climate>_base".
std::string scenario_name(const std::string& climate, const std::vector<double>& deltas);

/// Case names become directory names: letters, digits, '-', '_' and '.', not starting with '.'.
bool valid_case_name(const std::string& name);

}  // namespace fewsim::middleware
