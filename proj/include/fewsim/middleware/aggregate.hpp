#pragma once

#include <map>
#include <string>
#include <vector>

#include "fewsim/core/series.hpp"
#include "fewsim/coupling/scenario.hpp"

namespace fewsim::middleware {

struct AnnualSeries {
    int first_year = 0;
    Unit unit = Unit::dimensionless;
    std::vector<double> values;

    bool operator==(const AnnualSeries&) const = default;

    int last_year() const { return first_year + static_cast<int>(values.size()) - 1; }
    /// Throws NotFoundError outside the covered years.
    double at(int year) const;
};

using AnnualTable = std::map<std::string, std::map<std::string, AnnualSeries>>;

/// Flows are summed over the twelve months, everything else averaged.
/// Throws ValidationError unless the series covers whole calendar years.
AnnualSeries aggregate_annual(const MonthlySeries& series, VariableKind kind);

/// How monthly values of a unit combine into a year.
VariableKind kind_for_unit(Unit unit);

AnnualTable aggregate_result(const ScenarioResult& result);

}  // namespace fewsim::middleware
