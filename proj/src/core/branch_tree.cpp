#include "fewsim/core/branch_tree.hpp"

#include <algorithm>
#include <set>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim {

const VariableDef* BranchNode::find_variable(std::string_view key) const {
    for (const auto& v : variables) {
        if (v.key == key) return &v;
    }
    return nullptr;
}

const VariableDef* BranchNode::primary_output() const {
    for (const auto& v : variables) {
        if (!v.adjustable) return &v;
    }
    return nullptr;
}

std::string BranchTree::parent_of(std::string_view id) {
    auto slash = id.rfind('/');
    if (slash == std::string_view::npos) return {};
    return std::string(id.substr(0, slash));
}

BranchNode& BranchTree::add(BranchNode node) {
    if (node.id.empty() || node.id.front() == '/' || node.id.back() == '/' ||
        node.id.find("//") != std::string::npos) {
        throw ValidationError(fmt::format("malformed branch id '{}'", node.id));
    }
    if (index_.contains(node.id)) {
        throw ValidationError(fmt::format("duplicate branch id '{}'", node.id));
    }
    std::string parent = parent_of(node.id);
    if (!parent.empty()) {
        auto it = index_.find(parent);
        if (it == index_.end()) {
            throw ValidationError(fmt::format("branch '{}' has no parent '{}'", node.id, parent));
        }
        auto& siblings = nodes_[it->second].children;
        if (std::find(siblings.begin(), siblings.end(), node.id) == siblings.end()) {
            siblings.push_back(node.id);
        }
    }
    index_.emplace(node.id, nodes_.size());
    nodes_.push_back(std::move(node));
    return nodes_.back();
}

const BranchNode* BranchTree::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

BranchNode* BranchTree::find(std::string_view id) {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

std::vector<std::string> BranchTree::roots() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (n.id.find('/') == std::string::npos) out.push_back(n.id);
    }
    return out;
}

BranchNode BranchTree::resolve(std::string_view path) const {
    if (path.empty()) {
        BranchNode root;
        root.label = "All sectors";
        root.children = roots();
        return root;
    }
    if (const auto* node = find(path)) return *node;

    std::string probe = parent_of(path);
    while (!probe.empty() && find(probe) == nullptr) probe = parent_of(probe);
    throw NotFoundError(fmt::format("branch '{}' not found", path), probe);
}

const BranchNode* BranchTree::owner_of(std::string_view key) const {
    for (const auto& n : nodes_) {
        const auto* v = n.find_variable(key);
        if (v != nullptr && v->adjustable) return &n;
    }
    return nullptr;
}

std::vector<const VariableDef*> BranchTree::adjustable_variables() const {
    std::vector<const VariableDef*> out;
    for (const auto& n : nodes_) {
        for (const auto& v : n.variables) {
            if (v.adjustable) out.push_back(&v);
        }
    }
    return out;
}

std::vector<const BranchNode*> BranchTree::subtree(std::string_view id) const {
    std::vector<const BranchNode*> out;
    std::vector<const BranchNode*> stack;
    if (const auto* root = find(id)) stack.push_back(root);
    while (!stack.empty()) {
        const auto* node = stack.back();
        stack.pop_back();
        out.push_back(node);
        for (auto it = node->children.rbegin(); it != node->children.rend(); ++it) {
            if (const auto* child = find(*it)) stack.push_back(child);
        }
    }
    return out;
}

void BranchTree::validate() const {
    std::set<std::string> ids;
    std::set<Sector> sectors_with_root;
    std::set<std::string> adjustable_keys;
    for (const auto& n : nodes_) {
        if (!ids.insert(n.id).second) {
            throw ValidationError(fmt::format("duplicate branch id '{}'", n.id));
        }
        std::string parent = parent_of(n.id);
        if (parent.empty()) {
            if (!sectors_with_root.insert(n.sector).second) {
                throw ValidationError(
                    fmt::format("sector '{}' has more than one root", to_string(n.sector)));
            }
            if (n.id != to_string(n.sector)) {
                throw ValidationError(fmt::format("root '{}' does not match its sector", n.id));
            }
        } else {
            const auto* p = find(parent);
            if (p == nullptr) throw ValidationError(fmt::format("orphan branch '{}'", n.id));
            if (p->sector != n.sector) {
                throw ValidationError(fmt::format("branch '{}' crosses sectors", n.id));
            }
        }
        for (const auto& child : n.children) {
            if (parent_of(child) != n.id || find(child) == nullptr) {
                throw ValidationError(fmt::format("branch '{}' lists bad child '{}'", n.id, child));
            }
        }
        std::set<std::string> local;
        for (const auto& v : n.variables) {
            if (!local.insert(v.key).second) {
                throw ValidationError(fmt::format("variable '{}' repeated on '{}'", v.key, n.id));
            }
            if (v.adjustable && !adjustable_keys.insert(v.key).second) {
                throw ValidationError(
                    fmt::format("adjustable variable '{}' appears on more than one branch", v.key));
            }
            if (v.kind == VariableKind::share && v.base_value &&
                (*v.base_value < 0.0 || *v.base_value > 1.0)) {
                throw ValidationError(fmt::format("share variable '{}' outside [0,1]", v.key));
            }
        }
    }
}

}  // namespace fewsim
