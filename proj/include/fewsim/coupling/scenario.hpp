#pragma once

#include <map>
#include <string>
#include <vector>

#include "fewsim/core/series.hpp"

namespace fewsim {

/// A named assignment of percent deltas to adjustable variables under one climate file.
struct ScenarioSpec {
    std::string name;
    std::string climate;
    std::map<std::string, double> deltas;

    bool operator==(const ScenarioSpec&) const = default;
};

/// A directed quantity between two branches (e.g. SRP -> municipal deliveries).
struct Flow {
    std::string from;
    std::string to;
    MonthlySeries series;

    bool operator==(const Flow&) const = default;
};

/// Simulated monthly series of one scenario, organized per branch then variable.
struct ScenarioResult {
    ScenarioSpec spec;
    Horizon horizon;
    std::map<std::string, std::map<std::string, MonthlySeries>> series;
    std::vector<Flow> flows;
    std::vector<int> iterations;  // coupling iterations per month
    double max_residual = 0.0;    // largest committed fixed-point residual
    bool warning = false;         // set when some month did not converge
    std::vector<std::string> warnings;

    bool operator==(const ScenarioResult&) const = default;

    const MonthlySeries& get(const std::string& branch, const std::string& variable) const;
    const MonthlySeries* find(const std::string& branch, const std::string& variable) const;
};

}  // namespace fewsim
