#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fewsim/core/dataset.hpp"

namespace fewsim::water {

struct NetworkSource {
    std::string id;
    SourceKind kind = SourceKind::surface;
};

struct NetworkDemand {
    std::string id;
    DemandSector sector = DemandSector::municipal;
    int priority = 1;
    std::vector<std::size_t> preference;  // source indices, most preferred first
};

struct WaterNetwork {
    std::vector<NetworkSource> sources;
    std::vector<NetworkDemand> demands;

    std::optional<std::size_t> source_index(std::string_view id) const;
    std::optional<std::size_t> demand_index(std::string_view id) const;
    /// Checks priorities >= 1, non-empty preferences, valid indices and a single residual source.
    void validate() const;
};

/// Sources and demand nodes (districts included) of a dataset, in manifest order.
WaterNetwork make_network(const StudyAreaDataset& dataset);

/// Monthly deliveries: `delivered` is sources x demands, row-major by source.
struct AllocationMatrix {
    YearMonth month;
    std::size_t num_sources = 0;
    std::size_t num_demands = 0;
    std::vector<double> delivered;
    std::vector<double> unmet;
    std::vector<double> demand;
    std::vector<double> availability;  // +inf for an uncapped residual source

    double& at(std::size_t source, std::size_t demand_node) { return delivered[source * num_demands + demand_node]; }
    double at(std::size_t source, std::size_t demand_node) const {
        return delivered[source * num_demands + demand_node];
    }
    double source_total(std::size_t source) const;
    double delivered_to(std::size_t demand_node) const;
    double total_delivered() const;
    double total_unmet() const;
    double total_demand() const;
    /// Scales every delivered volume (used by linearity checks).
    AllocationMatrix scaled(double factor) const;
};

/// Greedy allocation: demands are served in ascending priority number; each draws from its
/// sources in preference order. Equal-priority demands meeting at a constrained source: those with
/// no later source left are served first, and each group splits its part in proportion to
/// remaining need. Uncapped residual availability is +inf.
/// Throws ValidationError for negative or non-finite demands.
AllocationMatrix allocate_water(const WaterNetwork& network, std::span<const double> availability,
                                std::span<const double> demands, YearMonth month = {});

}  // namespace fewsim::water
