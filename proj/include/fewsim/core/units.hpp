#pragma once

#include <string>
#include <string_view>

namespace fewsim {

enum class Unit {
    m3_per_month,
    GWh_per_month,
    ha,
    tonne,
    percent,
    persons,
    dimensionless,
    tCO2_per_month,
};

enum class Sector { water, energy, food };

/// How a quantity aggregates over time: flows sum, everything else averages.
enum class VariableKind { flow, stock, intensity, share };

std::string_view to_string(Unit unit);
std::string_view to_string(Sector sector);
std::string_view to_string(VariableKind kind);

Unit parse_unit(std::string_view text);
Sector parse_sector(std::string_view text);
VariableKind parse_variable_kind(std::string_view text);

// Boundary conversions. Internal computation keeps volumes in m3 and energy in GWh.
constexpr double kwh_to_gwh(double kwh) { return kwh * 1e-6; }
constexpr double gwh_to_kwh(double gwh) { return gwh * 1e6; }
constexpr double mm_over_ha_to_m3(double mm) { return mm * 10.0; }
constexpr double gwh_to_mw_average(double gwh, double hours) { return gwh * 1000.0 / hours; }
constexpr double mw_to_gwh(double mw, double hours) { return mw * hours / 1000.0; }

}  // namespace fewsim
