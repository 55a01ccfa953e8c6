#include "fewsim/core/series.hpp"

#include <cmath>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim {

double MonthlySeries::at(YearMonth ym) const {
    long offset = ym.serial() - start.serial();
    if (offset < 0 || offset >= static_cast<long>(values.size())) {
        throw NotFoundError(fmt::format("month {} outside series {}..{}", ym.to_string(),
                                        start.to_string(), end().to_string()));
    }
    return values[static_cast<std::size_t>(offset)];
}

void MonthlySeries::validate(std::string_view what, bool non_negative) const {
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (!std::isfinite(v) || (non_negative && v < 0.0)) {
            throw ValidationError(fmt::format("{}: invalid value {} at {}", what, v,
                                              start.plus_months(static_cast<long>(i)).to_string()));
        }
    }
}

MonthlySeries make_series(const Horizon& horizon, Unit unit, double fill) {
    return MonthlySeries{horizon.start, unit, std::vector<double>(horizon.months(), fill)};
}

}  // namespace fewsim
