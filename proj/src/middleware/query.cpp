#include "fewsim/middleware/query.hpp"

#include <algorithm>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::middleware {

Resolution parse_resolution(std::string_view text) {
    if (text.empty() || text == "annual") return Resolution::annual;
    if (text == "monthly") return Resolution::monthly;
    throw ValidationError(fmt::format("resolution must be annual or monthly, got '{}'", text));
}

bool in_subtree(std::string_view path, std::string_view root) {
    if (root.empty()) return true;
    if (path.size() < root.size() || path.substr(0, root.size()) != root) return false;
    return path.size() == root.size() || path[root.size()] == '/';
}

namespace {

std::string_view last_segment(std::string_view path) {
    auto pos = path.rfind('/');
    return pos == std::string_view::npos ? path : path.substr(pos + 1);
}

bool matches_resource(std::string_view path, std::string_view resource) {
    return in_subtree(path, resource) || last_segment(path) == resource;
}

std::pair<int, int> year_range(const ScenarioDocument& doc, const TimeseriesQuery& q) {
    const auto& h = doc.result.horizon;
    int from = q.from_year.value_or(h.first_year());
    int to = q.to_year.value_or(h.last_year());
    if (from > to) throw ValidationError(fmt::format("from {} is after to {}", from, to));
    if (!h.contains_year(from) || !h.contains_year(to)) {
        throw NotFoundError(fmt::format("years {}..{} outside {}..{}", from, to, h.first_year(), h.last_year()));
    }
    return {from, to};
}

std::vector<double> slice_monthly(const MonthlySeries& s, const Horizon& h, int from, int to) {
    auto a = h.index_of({from, 1});
    auto b = h.index_of({to, 12}) + 1;
    return {s.values.begin() + static_cast<long>(a), s.values.begin() + static_cast<long>(b)};
}

std::vector<double> annualize(const std::vector<double>& monthly, VariableKind kind) {
    std::vector<double> out(monthly.size() / 12, 0.0);
    for (std::size_t y = 0; y < out.size(); ++y) {
        for (std::size_t m = 0; m < 12; ++m) out[y] += monthly[y * 12 + m];
        if (kind != VariableKind::flow) out[y] /= 12.0;
    }
    return out;
}

}  // namespace

TimeseriesResult query_timeseries(const ScenarioDocument& doc, const BranchTree& tree, const TimeseriesQuery& q) {
    tree.resolve(q.branch);  // throws NotFoundError with the nearest ancestor
    const auto& r = doc.result;
    auto [from, to] = year_range(doc, q);

    TimeseriesResult out;
    out.scenario = r.spec.name;
    out.branch = q.branch;
    out.resolution = q.resolution;
    for (int y = from; y <= to; ++y) {
        if (q.resolution == Resolution::annual) {
            out.periods.push_back(std::to_string(y));
        } else {
            for (int m = 1; m <= 12; ++m) out.periods.push_back(YearMonth{y, m}.to_string());
        }
    }

    if (q.resource.empty()) {
        auto it = r.series.find(q.branch);
        if (it == r.series.end()) return out;
        for (const auto& [name, s] : it->second) {
            NamedSeries ns{name, s.unit, {}};
            if (q.resolution == Resolution::monthly) {
                ns.values = slice_monthly(s, r.horizon, from, to);
            } else {
                const auto& a = doc.annual.at(q.branch).at(name);
                ns.values.assign(a.values.begin() + (from - a.first_year), a.values.begin() + (to - a.first_year) + 1);
            }
            out.series.push_back(std::move(ns));
        }
        return out;
    }

    // Flows between the branch subtree and the resource, summed per direction.
    bool known = false;
    for (const auto& n : tree.nodes()) known = known || matches_resource(n.id, q.resource);
    if (!known) throw NotFoundError(fmt::format("unknown resource '{}'", q.resource));
    std::size_t months = static_cast<std::size_t>(to - from + 1) * 12;
    std::vector<double> inflow(months, 0.0), outflow(months, 0.0);
    Unit unit = Unit::m3_per_month;
    for (const auto& f : r.flows) {
        bool from_here = in_subtree(f.from, q.branch), to_here = in_subtree(f.to, q.branch);
        std::vector<double>* target = nullptr;
        if (to_here && !from_here && matches_resource(f.from, q.resource)) target = &inflow;
        if (from_here && !to_here && matches_resource(f.to, q.resource)) target = &outflow;
        if (!target) continue;
        unit = f.series.unit;
        auto v = slice_monthly(f.series, r.horizon, from, to);
        for (std::size_t i = 0; i < months; ++i) (*target)[i] += v[i];
    }
    for (auto* part : {&inflow, &outflow}) {
        NamedSeries ns{part == &inflow ? "inflow" : "outflow", unit, *part};
        if (q.resolution == Resolution::annual) ns.values = annualize(ns.values, VariableKind::flow);
        out.series.push_back(std::move(ns));
    }
    return out;
}

std::string plotted_variable(const ScenarioDocument& doc, const BranchTree& tree, const std::string& branch) {
    auto it = doc.annual.find(branch);
    if (it == doc.annual.end() || it->second.empty()) return {};
    if (const auto* node = tree.find(branch)) {
        if (const auto* v = node->primary_output(); v && it->second.count(v->key)) return v->key;
    }
    return it->second.begin()->first;
}

Composition query_composition(const ScenarioDocument& doc, const BranchTree& tree, const std::string& branch,
                              int year) {
    const auto node = tree.resolve(branch);
    const auto& r = doc.result;
    if (!r.horizon.contains_year(year)) {
        throw NotFoundError(fmt::format("year {} outside {}..{}", year, r.horizon.first_year(), r.horizon.last_year()));
    }
    Composition out;
    out.scenario = r.spec.name;
    out.branch = branch;
    out.year = year;

    std::map<std::string, double> inputs, outputs;
    const auto first = r.horizon.index_of({year, 1});
    for (const auto& f : r.flows) {
        bool from_here = in_subtree(f.from, branch), to_here = in_subtree(f.to, branch);
        if (from_here == to_here) continue;
        double total = 0.0;
        for (std::size_t m = 0; m < 12; ++m) total += f.series.values[first + m];
        out.unit = f.series.unit;
        (to_here ? inputs[f.from] : outputs[f.to]) += total;
    }
    auto fill = [](const std::map<std::string, double>& parts, std::vector<CompositionEntry>& dst) {
        double total = 0.0;
        for (const auto& [k, v] : parts) total += v;
        for (const auto& [k, v] : parts) dst.push_back({k, v, total > 0.0 ? v / total : 0.0});
    };
    fill(inputs, out.inputs);
    fill(outputs, out.outputs);

    // Children are compared on one shared variable: the first child's plotted variable.
    std::map<std::string, double> children;
    for (const auto& child : node.children) {
        std::string var = plotted_variable(doc, tree, child);
        if (var.empty()) continue;
        if (out.children_variable.empty()) out.children_variable = var;
        if (var != out.children_variable) continue;
        children[child] = doc.annual.at(child).at(var).at(year);
    }
    fill(children, out.children);
    return out;
}

}  // namespace fewsim::middleware
