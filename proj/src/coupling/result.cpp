#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/coupling/scenario.hpp"

namespace fewsim {

const MonthlySeries* ScenarioResult::find(const std::string& branch, const std::string& variable) const {
    auto b = series.find(branch);
    if (b == series.end()) return nullptr;
    auto v = b->second.find(variable);
    return v == b->second.end() ? nullptr : &v->second;
}

const MonthlySeries& ScenarioResult::get(const std::string& branch, const std::string& variable) const {
    if (const auto* s = find(branch, variable)) return *s;
    throw NotFoundError(fmt::format("scenario '{}' has no series {}:{}", spec.name, branch, variable));
}

}  // namespace fewsim
