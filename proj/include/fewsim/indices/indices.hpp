#pragma once

#include <array>
#include <string>
#include <string_view>

#include "fewsim/core/dataset.hpp"
#include "fewsim/coupling/scenario.hpp"

namespace fewsim::indices {

enum class Index {
    regional_gw_reliance,
    ag_gw_reliance,
    mi_surface_reliance,
    district_gw_reliance,
    district_surface_reliance,
    renewable_share,
    import_dependence,
    ag_water_impact,
    ag_energy_share,
    ag_emission_share,
};

inline constexpr std::size_t kIndexCount = 10;

std::string_view to_string(Index index);
Index parse_index(std::string_view text);
Sector sector_of(Index index);

struct IndexValue {
    double value = 0.0;
    bool flagged = false;  // 0/0: undefined for this scenario-year

    bool operator==(const IndexValue&) const = default;
};

struct IndexVector {
    std::string scenario;
    int year = 0;
    std::array<IndexValue, kIndexCount> values{};

    bool operator==(const IndexVector&) const = default;

    const IndexValue& operator[](Index i) const { return values[static_cast<std::size_t>(i)]; }
    IndexValue& operator[](Index i) { return values[static_cast<std::size_t>(i)]; }
};

/// Annual totals the index ratios are built from, exposed for auditing.
struct IndexInputs {
    double delivered = 0.0;
    double gw_delivered = 0.0;
    double ag_delivered = 0.0;
    double ag_gw = 0.0;
    double mi_delivered = 0.0;
    double mi_surface = 0.0;
    double district_delivered = 0.0;
    double district_gw = 0.0;
    double district_surface = 0.0;
    double generation = 0.0;
    double renewable_generation = 0.0;
    double imported_generation = 0.0;
    double electricity_demand = 0.0;
    double ag_pumping_energy = 0.0;
    double emissions = 0.0;
    /// Deliveries and groundwater deliveries per demand sector, for the decomposition identity.
    std::array<double, 5> sector_delivered{};
    std::array<double, 5> sector_gw{};
};

/// Throws NotFoundError when the year is outside the result's horizon.
IndexInputs index_inputs(const ScenarioResult& result, const StudyAreaDataset& dataset, int year);
IndexVector compute_indices(const ScenarioResult& result, const StudyAreaDataset& dataset, int year);

/// (v - b) / max(|b|, 1e-9) per index, flagged when either side is flagged.
/// Throws ValidationError when the years differ.
IndexVector index_deltas(const IndexVector& scenario, const IndexVector& base);

}  // namespace fewsim::indices
