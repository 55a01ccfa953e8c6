#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fewsim {

/// Scenario levers the engine knows how to apply. Efficiency levers have their own
/// semantics; the rest scale their target by (1 + delta/100).
enum class Lever {
    municipal_wue,                // municipal demand x (1 - d/100)
    household_eue,                // residential electricity x (1 - d/100)
    irrigation_ie,                // gross irrigation / (1 + d/100)
    industrial_water_use,         // industrial water demand
    cap_availability,             // CAP monthly availability
    srp_availability,             // SRP monthly availability
    wwtp_reuse,                   // reclaimed return fraction
    commercial_energy_intensity,  // commercial kWh per person
    solar_capacity,               // capacity of solar plants
    cropland_area,                // district cropland
};

std::optional<Lever> parse_lever(std::string_view key);
std::string_view to_string(Lever lever);

/// Percent deltas resolved against the lever registry. Missing levers are 0.
class LeverSettings {
public:
    LeverSettings() = default;
    explicit LeverSettings(const std::map<std::string, double>& deltas);

    double delta_pct(Lever lever) const;
    /// (1 + d/100) for scale levers.
    double scale(Lever lever) const { return 1.0 + delta_pct(lever) / 100.0; }

    double municipal_factor() const { return 1.0 - delta_pct(Lever::municipal_wue) / 100.0; }
    double residential_factor() const { return 1.0 - delta_pct(Lever::household_eue) / 100.0; }
    double irrigation_divisor() const { return 1.0 + delta_pct(Lever::irrigation_ie) / 100.0; }

private:
    std::map<Lever, double> deltas_;
};

}  // namespace fewsim
