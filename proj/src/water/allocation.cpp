#include "fewsim/water/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::water {

std::optional<std::size_t> WaterNetwork::source_index(std::string_view id) const {
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (sources[i].id == id) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> WaterNetwork::demand_index(std::string_view id) const {
    for (std::size_t i = 0; i < demands.size(); ++i) {
        if (demands[i].id == id) return i;
    }
    return std::nullopt;
}

void WaterNetwork::validate() const {
    int residual = 0;
    for (const auto& s : sources) residual += s.kind == SourceKind::residual ? 1 : 0;
    if (residual > 1) throw ValidationError("network has more than one residual source");
    for (const auto& d : demands) {
        if (d.priority < 1) throw ValidationError(fmt::format("demand '{}': priority must be >= 1", d.id));
        if (d.preference.empty()) throw ValidationError(fmt::format("demand '{}' has no source", d.id));
        for (auto s : d.preference) {
            if (s >= sources.size()) throw ValidationError(fmt::format("demand '{}': bad source index", d.id));
        }
    }
}

WaterNetwork make_network(const StudyAreaDataset& dataset) {
    WaterNetwork net;
    for (const auto& s : dataset.water.sources) net.sources.push_back({s.id, s.kind});
    for (const auto& d : dataset.demand_nodes()) {
        NetworkDemand nd{d.id, d.sector, d.priority, {}};
        for (const auto& s : d.sources) nd.preference.push_back(*net.source_index(s));
        net.demands.push_back(std::move(nd));
    }
    net.validate();
    return net;
}

double AllocationMatrix::source_total(std::size_t source) const {
    double total = 0.0;
    for (std::size_t d = 0; d < num_demands; ++d) total += at(source, d);
    return total;
}

double AllocationMatrix::delivered_to(std::size_t demand_node) const {
    double total = 0.0;
    for (std::size_t s = 0; s < num_sources; ++s) total += at(s, demand_node);
    return total;
}

double AllocationMatrix::total_delivered() const {
    double total = 0.0;
    for (double v : delivered) total += v;
    return total;
}

double AllocationMatrix::total_unmet() const {
    double total = 0.0;
    for (double v : unmet) total += v;
    return total;
}

double AllocationMatrix::total_demand() const {
    double total = 0.0;
    for (double v : demand) total += v;
    return total;
}

AllocationMatrix AllocationMatrix::scaled(double factor) const {
    AllocationMatrix out = *this;
    for (double& v : out.delivered) v *= factor;
    return out;
}

AllocationMatrix allocate_water(const WaterNetwork& network, std::span<const double> availability,
                                std::span<const double> demands, YearMonth month) {
    const std::size_t ns = network.sources.size();
    const std::size_t nd = network.demands.size();
    if (availability.size() != ns || demands.size() != nd) {
        throw ValidationError("allocate_water: availability/demand sizes do not match the network");
    }
    for (std::size_t d = 0; d < nd; ++d) {
        if (!std::isfinite(demands[d]) || demands[d] < 0.0) {
            throw ValidationError(fmt::format("allocate_water: demand '{}' must be finite and >= 0",
                                              network.demands[d].id));
        }
    }

    AllocationMatrix out;
    out.month = month;
    out.num_sources = ns;
    out.num_demands = nd;
    out.delivered.assign(ns * nd, 0.0);
    out.demand.assign(demands.begin(), demands.end());
    out.availability.assign(availability.begin(), availability.end());

    std::vector<double> remaining(availability.begin(), availability.end());
    std::vector<double> need(demands.begin(), demands.end());
    std::vector<std::size_t> cursor(nd, 0);

    std::set<int> priorities;
    for (const auto& d : network.demands) priorities.insert(d.priority);

    for (int priority : priorities) {
        while (true) {
            // claimants per source for this round, in demand order
            std::map<std::size_t, std::vector<std::size_t>> claims;
            for (std::size_t d = 0; d < nd; ++d) {
                const auto& node = network.demands[d];
                if (node.priority != priority || need[d] <= 0.0 || cursor[d] >= node.preference.size()) continue;
                claims[node.preference[cursor[d]]].push_back(d);
            }
            if (claims.empty()) break;

            for (const auto& [s, claimants] : claims) {
                double total_need = 0.0;
                for (auto d : claimants) total_need += need[d];
                if (remaining[s] >= total_need) {
                    for (auto d : claimants) {
                        out.at(s, d) += need[d];
                        need[d] = 0.0;
                    }
                    remaining[s] -= total_need;
                } else {
                    // Claimants with no later source left are served first; each group splits
                    // what it gets in proportion to need.
                    std::vector<std::size_t> captive, mobile;
                    for (auto d : claimants) {
                        const auto& pref = network.demands[d].preference;
                        bool has_fallback = false;
                        for (std::size_t k = cursor[d] + 1; k < pref.size(); ++k) {
                            if (pref[k] != s && remaining[pref[k]] > 0.0) has_fallback = true;
                        }
                        (has_fallback ? mobile : captive).push_back(d);
                    }
                    double avail = std::max(0.0, remaining[s]);
                    for (const auto* group : {&captive, &mobile}) {
                        double group_need = 0.0;
                        for (auto d : *group) group_need += need[d];
                        if (group_need <= 0.0) continue;
                        const double share = std::min(avail, group_need);
                        for (auto d : *group) {
                            double given = share == group_need ? need[d] : share * (need[d] / group_need);
                            out.at(s, d) += given;
                            need[d] = share == group_need ? 0.0 : std::max(0.0, need[d] - given);
                        }
                        avail -= share;
                    }
                    for (auto d : claimants) {
                        if (need[d] > 0.0) ++cursor[d];
                    }
                    remaining[s] = 0.0;
                }
            }
        }
    }
    out.unmet = std::move(need);
    return out;
}

}  // namespace fewsim::water
