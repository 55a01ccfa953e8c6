#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fewsim/coupling/scenario.hpp"
#include "fewsim/middleware/aggregate.hpp"
#include "fewsim/middleware/grid.hpp"
#include "fewsim/middleware/job.hpp"

namespace fewsim::middleware {

struct CaseManifest {
    CaseConfig config;
    JobRecord job;
    std::size_t runs = 0;  // scenarios simulated for this case over its lifetime

    bool operator==(const CaseManifest&) const = default;
};

/// A stored scenario: the monthly result and its annual aggregation.
struct ScenarioDocument {
    ScenarioResult result;
    AnnualTable annual;

    bool operator==(const ScenarioDocument&) const = default;
};

ScenarioDocument make_document(ScenarioResult result);

/// File-backed document store:
///   <data_dir>/cases/<case>/manifest.json
///   <data_dir>/cases/<case>/scenarios/<scenario>.json
/// Files are replaced atomically (write to a temporary, then rename). Doubles are written in
/// shortest round-trip form so documents reload bit-exactly.
class ResultStore {
public:
    explicit ResultStore(std::filesystem::path data_dir);

    const std::filesystem::path& data_dir() const { return root_; }
    std::filesystem::path case_dir(const std::string& case_name) const;
    std::filesystem::path scenario_path(const std::string& case_name, const std::string& scenario) const;

    std::vector<std::string> list_cases() const;
    bool has_case(const std::string& case_name) const;
    std::optional<CaseManifest> read_manifest(const std::string& case_name) const;
    void write_manifest(const CaseManifest& manifest) const;
    void delete_case(const std::string& case_name) const;

    std::vector<std::string> list_scenarios(const std::string& case_name) const;
    bool has_scenario(const std::string& case_name, const std::string& scenario) const;
    void write_scenario(const std::string& case_name, const ScenarioDocument& doc) const;
    /// Throws NotFoundError when absent.
    ScenarioDocument read_scenario(const std::string& case_name, const std::string& scenario) const;
    void delete_scenario(const std::string& case_name, const std::string& scenario) const;

private:
    std::filesystem::path root_;
};

}  // namespace fewsim::middleware
