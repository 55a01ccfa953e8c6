#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fewsim/core/branch_tree.hpp"
#include "fewsim/middleware/store.hpp"

namespace fewsim::middleware {

enum class Resolution { annual, monthly };

Resolution parse_resolution(std::string_view text);

struct TimeseriesQuery {
    std::string branch;
    std::optional<int> from_year;
    std::optional<int> to_year;
    /// When set, only flows between the branch (or its descendants) and this resource are
    /// returned. A resource is a branch path or the last segment of one ("SRP", "alfalfa").
    std::string resource;
    Resolution resolution = Resolution::annual;
};

struct NamedSeries {
    std::string name;
    Unit unit = Unit::dimensionless;
    std::vector<double> values;
};

struct TimeseriesResult {
    std::string scenario;
    std::string branch;
    Resolution resolution = Resolution::annual;
    std::vector<std::string> periods;  // "2022" or "2022-01"
    std::vector<NamedSeries> series;
};

/// Throws NotFoundError for an unknown branch or resource, ValidationError for a bad year range.
TimeseriesResult query_timeseries(const ScenarioDocument& doc, const BranchTree& tree, const TimeseriesQuery& query);

struct CompositionEntry {
    std::string branch;
    double value = 0.0;
    double fraction = 0.0;  // of the group total; 0 when the total is 0
};

struct Composition {
    std::string scenario;
    std::string branch;
    int year = 0;
    Unit unit = Unit::m3_per_month;
    std::vector<CompositionEntry> inputs;    // per source, flows entering the branch subtree
    std::vector<CompositionEntry> outputs;   // per destination, flows leaving it
    std::vector<CompositionEntry> children;  // primary output of each child branch
    std::string children_variable;
};

/// Annual totals for the Sankey views. Throws NotFoundError for an unknown branch or year.
Composition query_composition(const ScenarioDocument& doc, const BranchTree& tree, const std::string& branch,
                              int year);

/// The variable comparison views plot for a branch: its primary output when stored,
/// otherwise the first stored variable. Empty when the branch has no stored series.
std::string plotted_variable(const ScenarioDocument& doc, const BranchTree& tree, const std::string& branch);

/// True when `path` is `root` or lies below it.
bool in_subtree(std::string_view path, std::string_view root);

}  // namespace fewsim::middleware
