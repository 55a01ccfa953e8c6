#include "fewsim/core/units.hpp"

#include <array>
#include <utility>

#include "fewsim/core/errors.hpp"

namespace fewsim {

namespace {

constexpr std::array<std::pair<Unit, std::string_view>, 8> kUnits{{
    {Unit::m3_per_month, "m3_per_month"},
    {Unit::GWh_per_month, "GWh_per_month"},
    {Unit::ha, "ha"},
    {Unit::tonne, "tonne"},
    {Unit::percent, "percent"},
    {Unit::persons, "persons"},
    {Unit::dimensionless, "dimensionless"},
    {Unit::tCO2_per_month, "tCO2_per_month"},
}};

constexpr std::array<std::pair<Sector, std::string_view>, 3> kSectors{{
    {Sector::water, "water"},
    {Sector::energy, "energy"},
    {Sector::food, "food"},
}};

constexpr std::array<std::pair<VariableKind, std::string_view>, 4> kKinds{{
    {VariableKind::flow, "flow"},
    {VariableKind::stock, "stock"},
    {VariableKind::intensity, "intensity"},
    {VariableKind::share, "share"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
    for (const auto& [e, name] : table) {
        if (e == value) return name;
    }
    return "?";
}

template <typename E, std::size_t N>
E parse_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view text,
           std::string_view what) {
    for (const auto& [e, name] : table) {
        if (name == text) return e;
    }
    throw ValidationError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Unit unit) { return name_of(kUnits, unit); }
std::string_view to_string(Sector sector) { return name_of(kSectors, sector); }
std::string_view to_string(VariableKind kind) { return name_of(kKinds, kind); }

Unit parse_unit(std::string_view text) { return parse_of(kUnits, text, "unit"); }
Sector parse_sector(std::string_view text) { return parse_of(kSectors, text, "sector"); }
VariableKind parse_variable_kind(std::string_view text) {
    return parse_of(kKinds, text, "variable kind");
}

}  // namespace fewsim
