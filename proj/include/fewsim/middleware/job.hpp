#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fewsim::middleware {

enum class JobStatus { queued, in_progress, finished, failed };
enum class ScenarioStatus { pending, running, done, reused, failed };

std::string_view to_string(JobStatus status);
std::string_view to_string(ScenarioStatus status);
JobStatus parse_job_status(std::string_view text);
ScenarioStatus parse_scenario_status(std::string_view text);

struct ScenarioProgress {
    std::string name;
    ScenarioStatus status = ScenarioStatus::pending;
    std::string error;

    bool operator==(const ScenarioProgress&) const = default;
};

struct JobRecord {
    std::string case_name;
    JobStatus status = JobStatus::queued;
    std::vector<ScenarioProgress> scenarios;  // grid order
    std::string submitted_at;                 // UTC, ISO 8601
    std::string started_at;
    std::string finished_at;
    std::string error;  // first failure, "<scenario>: <message>"

    bool operator==(const JobRecord&) const = default;

    std::size_t total() const { return scenarios.size(); }
    /// Scenarios with a stored result (simulated or reused).
    std::size_t completed() const;
    std::size_t failed() const;
    bool active() const { return status == JobStatus::queued || status == JobStatus::in_progress; }
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now();

}  // namespace fewsim::middleware
