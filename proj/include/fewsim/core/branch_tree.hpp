#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fewsim/core/units.hpp"

namespace fewsim {

struct VariableDef {
    std::string key;
    std::string label;
    Unit unit = Unit::dimensionless;
    VariableKind kind = VariableKind::flow;
    /// Scalar base value, when the variable has one.
    std::optional<double> base_value;
    /// Name of the climate column or series the base value comes from, when it is a series.
    std::string series_ref;
    bool adjustable = false;
    double default_delta_pct = 0.0;

    bool operator==(const VariableDef&) const = default;
};

struct BranchNode {
    std::string id;  // slash-separated path, e.g. "water/demand/municipal"
    Sector sector = Sector::water;
    std::string label;
    std::vector<std::string> children;
    std::vector<VariableDef> variables;

    bool operator==(const BranchNode&) const = default;

    const VariableDef* find_variable(std::string_view key) const;
    /// First non-adjustable variable: the quantity comparison views plot for this node.
    const VariableDef* primary_output() const;
};

/// Hierarchical registry of model branches, one root per sector.
class BranchTree {
public:
    /// Adds a node and links it under its parent (which must already exist, except for roots).
    BranchNode& add(BranchNode node);

    /// Lookup by exact id; nullptr when absent.
    const BranchNode* find(std::string_view id) const;
    BranchNode* find(std::string_view id);

    /// Exact lookup that throws NotFoundError with the nearest existing ancestor as hint.
    /// The empty path yields a synthetic root whose children are the sector roots.
    BranchNode resolve(std::string_view path) const;

    /// The node carrying adjustable variable `key`, or nullptr.
    const BranchNode* owner_of(std::string_view key) const;
    std::vector<const VariableDef*> adjustable_variables() const;

    /// `id` followed by all its descendants in depth-first order.
    std::vector<const BranchNode*> subtree(std::string_view id) const;

    const std::vector<BranchNode>& nodes() const { return nodes_; }
    std::vector<std::string> roots() const;

    /// Checks unique ids, single root per sector, acyclic parent links and that every
    /// adjustable key occurs on exactly one node. Throws ValidationError.
    void validate() const;

    bool operator==(const BranchTree& other) const { return nodes_ == other.nodes_; }

    static std::string parent_of(std::string_view id);

private:
    std::vector<BranchNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace fewsim
