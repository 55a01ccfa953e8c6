#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fewsim/core/dataset.hpp"
#include "fewsim/coupling/engine.hpp"
#include "fewsim/middleware/store.hpp"

namespace fewsim::middleware {

struct ManagerOptions {
    std::size_t workers = 0;  // 0: std::thread::hardware_concurrency()
    coupling::EngineOptions engine;
    /// Called on the worker before each scenario runs; an exception fails that scenario.
    std::function<void(const std::string& case_name, const ScenarioSpec&)> before_run;
};

/// Owns the job queue and worker pool over a ResultStore. Thread-safe.
///
/// On construction, cases left queued or in progress by an earlier process are marked failed;
/// their stored scenario results are kept.
class CaseManager {
public:
    CaseManager(std::shared_ptr<const StudyAreaDataset> dataset, std::filesystem::path data_dir,
                ManagerOptions options = {});
    /// Lets running scenarios finish, drops queued ones and joins the workers.
    ~CaseManager();
    CaseManager(const CaseManager&) = delete;
    CaseManager& operator=(const CaseManager&) = delete;

    /// Validates, persists the case and queues its scenarios. Returns without waiting for any
    /// simulation; the record is already in_progress. Throws ConflictError for a duplicate
    /// name, ValidationError/NotFoundError for a bad config.
    JobRecord submit(const CaseConfig& config);

    /// Re-runs a case with new adjustments. Results of scenarios that left the grid are deleted,
    /// stored results with an unchanged spec are reused, the rest are queued.
    /// Throws NotFoundError for an unknown case and ConflictError while it is running.
    JobRecord edit(const std::string& case_name, const std::vector<VariableAdjustment>& adjustments);

    /// Throws NotFoundError, or ConflictError while the case is running.
    void remove(const std::string& case_name);

    JobRecord status(const std::string& case_name) const;
    CaseManifest manifest(const std::string& case_name) const;
    std::vector<std::string> cases() const;

    /// Blocks until the case has no queued or running scenarios.
    JobRecord wait(const std::string& case_name) const;
    void wait_all() const;

    /// Scenarios simulated by this manager instance (reuse excluded).
    std::size_t runs() const;

    const ResultStore& store() const;
    const StudyAreaDataset& dataset() const;
    std::size_t worker_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fewsim::middleware
