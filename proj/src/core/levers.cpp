#include "fewsim/core/levers.hpp"

#include <array>
#include <utility>

#include "fewsim/core/errors.hpp"

namespace fewsim {

namespace {

constexpr std::array<std::pair<Lever, std::string_view>, 10> kLevers{{
    {Lever::municipal_wue, "municipal_wue"},
    {Lever::household_eue, "household_eue"},
    {Lever::irrigation_ie, "irrigation_ie"},
    {Lever::industrial_water_use, "industrial_water_use"},
    {Lever::cap_availability, "cap_availability"},
    {Lever::srp_availability, "srp_availability"},
    {Lever::wwtp_reuse, "wwtp_reuse"},
    {Lever::commercial_energy_intensity, "commercial_energy_intensity"},
    {Lever::solar_capacity, "solar_capacity"},
    {Lever::cropland_area, "cropland_area"},
}};

}  // namespace

std::optional<Lever> parse_lever(std::string_view key) {
    for (const auto& [lever, name] : kLevers) {
        if (name == key) return lever;
    }
    return std::nullopt;
}

std::string_view to_string(Lever lever) {
    for (const auto& [l, name] : kLevers) {
        if (l == lever) return name;
    }
    return "?";
}

LeverSettings::LeverSettings(const std::map<std::string, double>& deltas) {
    for (const auto& [key, value] : deltas) {
        auto lever = parse_lever(key);
        if (!lever) throw ValidationError("unknown scenario variable '" + key + "'");
        deltas_[*lever] = value;
    }
}

double LeverSettings::delta_pct(Lever lever) const {
    auto it = deltas_.find(lever);
    return it == deltas_.end() ? 0.0 : it->second;
}

}  // namespace fewsim
