#pragma once

#include <span>
#include <vector>

#include "fewsim/core/time.hpp"
#include "fewsim/core/units.hpp"

namespace fewsim {

/// Dense monthly time series. No gaps; values are finite.
struct MonthlySeries {
    YearMonth start;
    Unit unit = Unit::dimensionless;
    std::vector<double> values;

    bool operator==(const MonthlySeries&) const = default;

    std::size_t size() const { return values.size(); }
    YearMonth end() const { return start.plus_months(static_cast<long>(values.size()) - 1); }
    double at(YearMonth ym) const;

    /// Throws ValidationError naming `what` on non-finite (or, for flows, negative) values.
    void validate(std::string_view what, bool non_negative) const;
};

MonthlySeries make_series(const Horizon& horizon, Unit unit, double fill = 0.0);

}  // namespace fewsim
