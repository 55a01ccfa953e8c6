#pragma once

// Exhaustive reference for the 2-source x 2-demand allocation problem.
//
// Objective, compared lexicographically by ascending priority level:
//   (water delivered to the level, water delivered to the level from each demand's first choice).
// The optimum is found by enumerating every integer allocation; with integer capacities and
// demands the flow polytope has integral vertices, so this is the LP optimum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "fewsim/water/allocation.hpp"

namespace oracle {

struct Instance {
    double capacity[2];               // 0: surface, 1: groundwater
    double demand[2];
    int priority[2];
    std::vector<std::size_t> pref[2];  // source indices, first choice first

    std::string describe() const {
        auto p = [](const std::vector<std::size_t>& v) {
            std::string s;
            for (auto i : v) s += i == 0 ? "S" : "G";
            return s;
        };
        return fmt::format("cap S={} G={} | d0={} p{} {} | d1={} p{} {}", capacity[0], capacity[1], demand[0],
                           priority[0], p(pref[0]), demand[1], priority[1], p(pref[1]));
    }
};

inline std::vector<double> objective(const Instance& in, const double x[2][2]) {
    std::set<int> levels(in.priority, in.priority + 2);
    std::vector<double> obj;
    for (int level : levels) {
        double total = 0.0, first = 0.0;
        for (int d = 0; d < 2; ++d) {
            if (in.priority[d] != level) continue;
            total += x[0][d] + x[1][d];
            first += x[in.pref[d][0]][d];
        }
        obj.push_back(total);
        obj.push_back(first);
    }
    return obj;
}

inline bool eligible(const Instance& in, int s, int d) {
    return std::find(in.pref[d].begin(), in.pref[d].end(), static_cast<std::size_t>(s)) != in.pref[d].end();
}

inline std::vector<double> exhaustive_optimum(const Instance& in) {
    std::vector<double> best;
    auto hi = [&](int s, int d) { return eligible(in, s, d) ? static_cast<int>(std::min(in.capacity[s], in.demand[d])) : 0; };
    for (int a = 0; a <= hi(0, 0); ++a)
        for (int b = 0; b <= hi(0, 1); ++b) {
            if (a + b > in.capacity[0]) continue;
            for (int c = 0; c <= hi(1, 0); ++c) {
                if (a + c > in.demand[0]) continue;
                for (int e = 0; e <= hi(1, 1); ++e) {
                    if (c + e > in.capacity[1] || b + e > in.demand[1]) continue;
                    const double x[2][2] = {{double(a), double(b)}, {double(c), double(e)}};
                    auto obj = objective(in, x);
                    if (best.empty() || obj > best) best = obj;
                }
            }
        }
    return best;
}

inline fewsim::water::AllocationMatrix greedy(const Instance& in) {
    fewsim::water::WaterNetwork net;
    net.sources = {{"S", fewsim::SourceKind::surface}, {"G", fewsim::SourceKind::residual}};
    for (int d = 0; d < 2; ++d) {
        net.demands.push_back({"d" + std::to_string(d), fewsim::DemandSector::municipal, in.priority[d], in.pref[d]});
    }
    std::vector<double> avail = {in.capacity[0], in.capacity[1]};
    std::vector<double> demand = {in.demand[0], in.demand[1]};
    return fewsim::water::allocate_water(net, avail, demand);
}

inline std::vector<double> greedy_objective(const Instance& in) {
    auto m = greedy(in);
    const double x[2][2] = {{m.at(0, 0), m.at(0, 1)}, {m.at(1, 0), m.at(1, 1)}};
    return objective(in, x);
}

/// Capacities x demands x priority pairs x preference lists.
inline std::vector<Instance> instance_grid() {
    const std::vector<std::vector<std::size_t>> prefs = {{0, 1}, {1, 0}, {0}, {1}};
    const std::vector<std::pair<int, int>> priorities = {{1, 1}, {1, 2}, {2, 1}};
    std::vector<Instance> out;
    for (double cs : {0.0, 2.0, 5.0, 9.0})
        for (double cg : {0.0, 3.0, 6.0, 20.0})
            for (double d0 : {0.0, 3.0, 8.0})
                for (double d1 : {0.0, 4.0, 8.0})
                    for (auto [p0, p1] : priorities)
                        for (const auto& f0 : prefs)
                            for (const auto& f1 : prefs) {
                                Instance in{{cs, cg}, {d0, d1}, {p0, p1}, {f0, f1}};
                                out.push_back(in);
                            }
    return out;
}

/// Largest componentwise gap between greedy and optimum; 0 means the greedy is optimal.
inline double gap(const Instance& in) {
    auto g = greedy_objective(in);
    auto o = exhaustive_optimum(in);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double diff = std::abs(g[i] - o[i]);
        worst = std::max(worst, diff);
        if (diff > 1e-9) break;  // later components only matter on ties
    }
    return worst;
}

}  // namespace oracle
