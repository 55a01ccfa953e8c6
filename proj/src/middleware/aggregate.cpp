#include "fewsim/middleware/aggregate.hpp"

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/kernels/kernels.hpp"

namespace fewsim::middleware {

double AnnualSeries::at(int year) const {
    if (year < first_year || year > last_year()) {
        throw NotFoundError(fmt::format("year {} outside {}..{}", year, first_year, last_year()));
    }
    return values[static_cast<std::size_t>(year - first_year)];
}

VariableKind kind_for_unit(Unit unit) {
    switch (unit) {
        case Unit::m3_per_month:
        case Unit::GWh_per_month:
        case Unit::tonne:
        case Unit::tCO2_per_month:
            return VariableKind::flow;
        case Unit::ha:
        case Unit::persons:
            return VariableKind::stock;
        case Unit::percent:
            return VariableKind::intensity;
        case Unit::dimensionless:
            return VariableKind::share;
    }
    return VariableKind::share;
}

AnnualSeries aggregate_annual(const MonthlySeries& series, VariableKind kind) {
    if (series.start.month != 1 || series.values.size() % 12 != 0) {
        throw ValidationError(fmt::format("aggregate_annual: series from {} with {} months is not whole years",
                                          series.start.to_string(), series.values.size()));
    }
    AnnualSeries out;
    out.first_year = series.start.year;
    out.unit = series.unit;
    out.values.assign(series.values.size() / 12, 0.0);
    kernels::block_sums(series.values, 12, out.values);
    if (kind != VariableKind::flow) {
        for (auto& v : out.values) v /= 12.0;
    }
    return out;
}

AnnualTable aggregate_result(const ScenarioResult& result) {
    AnnualTable out;
    for (const auto& [branch, vars] : result.series) {
        auto& slot = out[branch];
        for (const auto& [name, s] : vars) slot[name] = aggregate_annual(s, kind_for_unit(s.unit));
    }
    return out;
}

}  // namespace fewsim::middleware
