#pragma once

#include <memory>
#include <span>

#include "fewsim/core/dataset.hpp"
#include "fewsim/core/levers.hpp"
#include "fewsim/coupling/scenario.hpp"
#include "fewsim/energy/energy.hpp"
#include "fewsim/water/allocation.hpp"

namespace fewsim::coupling {

struct EngineOptions {
    /// One food -> water -> energy pass per month with the power-plant water demand lagged by a month.
    bool single_pass = false;
    int max_iterations = 10;
    double tolerance = 1e-6;
    /// Overrides the dataset's pre-fitted crop-share coefficients when set.
    std::shared_ptr<const fmlm::Coefficients> coefficients;
};

/// Energy needed to move and treat the month's deliveries (GWh).
double link_energy_for_water(const water::AllocationMatrix& allocation, const water::WaterNetwork& network,
                             const std::map<std::string, double>& kwh_per_m3);

/// Water needed by in-area plants for their generation (m3). Out-of-area plants contribute nothing.
double link_water_for_energy(std::span<const double> generation, const std::vector<PowerPlant>& catalog);

struct CouplingState {
    YearMonth cursor;
    std::size_t month_index = 0;
    double power_water_m3 = 0.0;         // last power-plant water demand
    double water_energy_GWh = 0.0;       // last water-infrastructure energy demand
};

/// Per-month diagnostics returned by CouplingEngine::step.
struct MonthReport {
    YearMonth month;
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
    water::AllocationMatrix allocation;
    energy::DispatchResult dispatch;
};

/// Runs one scenario month by month. Each month: crop areas (refreshed each January),
/// water demands, allocation, water-infrastructure energy, dispatch and emissions, then the
/// power-plant water demand fed back to the allocation until both links settle.
class CouplingEngine {
public:
    /// Throws NotFoundError for an unknown climate and ValidationError for bad deltas.
    CouplingEngine(const StudyAreaDataset& dataset, ScenarioSpec spec, EngineOptions options = {});
    ~CouplingEngine();
    CouplingEngine(CouplingEngine&&) noexcept;
    CouplingEngine& operator=(CouplingEngine&&) = delete;

    bool done() const;
    const CouplingState& state() const;
    /// Simulates and commits the month at the cursor, then advances it by one month.
    MonthReport step();
    /// Runs any remaining months and returns the complete result.
    ScenarioResult finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ScenarioResult run_scenario(const StudyAreaDataset& dataset, const ScenarioSpec& spec,
                            const EngineOptions& options = {});

/// Rejects deltas for variables the dataset does not expose or outside their bounds.
void validate_deltas(const StudyAreaDataset& dataset, const std::map<std::string, double>& deltas);

}  // namespace fewsim::coupling
