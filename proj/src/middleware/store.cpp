#include "fewsim/middleware/store.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/middleware/json_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fewsim {

void to_json(json& j, const ScenarioSpec& spec) {
    j = json{{"name", spec.name}, {"climate", spec.climate}, {"deltas", spec.deltas}};
}

void from_json(const json& j, ScenarioSpec& spec) {
    spec.name = j.at("name").get<std::string>();
    spec.climate = j.at("climate").get<std::string>();
    spec.deltas = j.at("deltas").get<std::map<std::string, double>>();
}

}  // namespace fewsim

namespace fewsim::middleware {

namespace {

constexpr std::string_view kJobStatus[] = {"queued", "in_progress", "finished", "failed"};
constexpr std::string_view kScenarioStatus[] = {"pending", "running", "done", "reused", "failed"};

json series_values(const std::vector<double>& v) { return json(v); }

}  // namespace

std::string_view to_string(JobStatus status) { return kJobStatus[static_cast<int>(status)]; }
std::string_view to_string(ScenarioStatus status) { return kScenarioStatus[static_cast<int>(status)]; }

JobStatus parse_job_status(std::string_view text) {
    for (int i = 0; i < 4; ++i) {
        if (kJobStatus[i] == text) return static_cast<JobStatus>(i);
    }
    throw ValidationError(fmt::format("unknown job status '{}'", text));
}

ScenarioStatus parse_scenario_status(std::string_view text) {
    for (int i = 0; i < 5; ++i) {
        if (kScenarioStatus[i] == text) return static_cast<ScenarioStatus>(i);
    }
    throw ValidationError(fmt::format("unknown scenario status '{}'", text));
}

std::size_t JobRecord::completed() const {
    return static_cast<std::size_t>(std::count_if(scenarios.begin(), scenarios.end(), [](const auto& s) {
        return s.status == ScenarioStatus::done || s.status == ScenarioStatus::reused;
    }));
}

std::size_t JobRecord::failed() const {
    return static_cast<std::size_t>(
        std::count_if(scenarios.begin(), scenarios.end(), [](const auto& s) { return s.status == ScenarioStatus::failed; }));
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void to_json(json& j, const VariableAdjustment& a) {
    j = json{{"key", a.key}, {"lower_pct", a.lower_pct}, {"upper_pct", a.upper_pct}, {"step_pct", a.step_pct}};
}

void from_json(const json& j, VariableAdjustment& a) {
    a.key = j.at("key").get<std::string>();
    a.lower_pct = j.at("lower_pct").get<double>();
    a.upper_pct = j.at("upper_pct").get<double>();
    a.step_pct = j.value("step_pct", 10.0);
}

void to_json(json& j, const CaseConfig& c) {
    j = json{{"case_name", c.case_name}, {"climate", c.climate}, {"adjustments", c.adjustments}};
}

void from_json(const json& j, CaseConfig& c) {
    c.case_name = j.at("case_name").get<std::string>();
    c.climate = j.at("climate").get<std::string>();
    c.adjustments = j.value("adjustments", std::vector<VariableAdjustment>{});
}

void to_json(json& j, const ScenarioProgress& p) {
    j = json{{"name", p.name}, {"status", to_string(p.status)}};
    if (!p.error.empty()) j["error"] = p.error;
}

void from_json(const json& j, ScenarioProgress& p) {
    p.name = j.at("name").get<std::string>();
    p.status = parse_scenario_status(j.at("status").get<std::string>());
    p.error = j.value("error", std::string{});
}

void to_json(json& j, const JobRecord& r) {
    j = json{{"case_name", r.case_name},       {"status", to_string(r.status)},
             {"completed", r.completed()},     {"failed", r.failed()},
             {"total", r.total()},             {"scenarios", r.scenarios},
             {"submitted_at", r.submitted_at}, {"started_at", r.started_at},
             {"finished_at", r.finished_at},   {"error", r.error}};
}

void from_json(const json& j, JobRecord& r) {
    r.case_name = j.at("case_name").get<std::string>();
    r.status = parse_job_status(j.at("status").get<std::string>());
    r.scenarios = j.at("scenarios").get<std::vector<ScenarioProgress>>();
    r.submitted_at = j.value("submitted_at", std::string{});
    r.started_at = j.value("started_at", std::string{});
    r.finished_at = j.value("finished_at", std::string{});
    r.error = j.value("error", std::string{});
}

void to_json(json& j, const CaseManifest& m) { j = json{{"config", m.config}, {"job", m.job}, {"runs", m.runs}}; }

void from_json(const json& j, CaseManifest& m) {
    m.config = j.at("config").get<CaseConfig>();
    m.job = j.at("job").get<JobRecord>();
    m.runs = j.value("runs", std::size_t{0});
}

json document_to_json(const ScenarioDocument& doc) {
    const auto& r = doc.result;
    json series = json::object();
    for (const auto& [branch, vars] : r.series) {
        json& b = series[branch];
        for (const auto& [name, s] : vars) {
            b[name] = json{{"start", s.start.to_string()}, {"unit", to_string(s.unit)}, {"values", series_values(s.values)}};
        }
    }
    json flows = json::array();
    for (const auto& f : r.flows) {
        flows.push_back(json{{"from", f.from},
                             {"to", f.to},
                             {"start", f.series.start.to_string()},
                             {"unit", to_string(f.series.unit)},
                             {"values", series_values(f.series.values)}});
    }
    json annual = json::object();
    for (const auto& [branch, vars] : doc.annual) {
        json& b = annual[branch];
        for (const auto& [name, s] : vars) {
            b[name] = json{{"first_year", s.first_year}, {"unit", to_string(s.unit)}, {"values", series_values(s.values)}};
        }
    }
    return json{{"spec", r.spec},
                {"horizon", {{"start", r.horizon.start.to_string()}, {"end", r.horizon.end.to_string()}}},
                {"iterations", r.iterations},
                {"max_residual", r.max_residual},
                {"warning", r.warning},
                {"warnings", r.warnings},
                {"series", std::move(series)},
                {"flows", std::move(flows)},
                {"annual", std::move(annual)}};
}

ScenarioDocument document_from_json(const json& j) {
    ScenarioDocument doc;
    auto& r = doc.result;
    r.spec = j.at("spec").get<ScenarioSpec>();
    r.horizon.start = YearMonth::parse(j.at("horizon").at("start").get<std::string>());
    r.horizon.end = YearMonth::parse(j.at("horizon").at("end").get<std::string>());
    r.iterations = j.at("iterations").get<std::vector<int>>();
    r.max_residual = j.at("max_residual").get<double>();
    r.warning = j.at("warning").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& [branch, vars] : j.at("series").items()) {
        auto& b = r.series[branch];
        for (const auto& [name, s] : vars.items()) {
            MonthlySeries m;
            m.start = YearMonth::parse(s.at("start").get<std::string>());
            m.unit = parse_unit(s.at("unit").get<std::string>());
            m.values = s.at("values").get<std::vector<double>>();
            b[name] = std::move(m);
        }
    }
    for (const auto& f : j.at("flows")) {
        Flow flow;
        flow.from = f.at("from").get<std::string>();
        flow.to = f.at("to").get<std::string>();
        flow.series.start = YearMonth::parse(f.at("start").get<std::string>());
        flow.series.unit = parse_unit(f.at("unit").get<std::string>());
        flow.series.values = f.at("values").get<std::vector<double>>();
        r.flows.push_back(std::move(flow));
    }
    for (const auto& [branch, vars] : j.at("annual").items()) {
        auto& b = doc.annual[branch];
        for (const auto& [name, s] : vars.items()) {
            AnnualSeries a;
            a.first_year = s.at("first_year").get<int>();
            a.unit = parse_unit(s.at("unit").get<std::string>());
            a.values = s.at("values").get<std::vector<double>>();
            b[name] = std::move(a);
        }
    }
    return doc;
}

ScenarioDocument make_document(ScenarioResult result) {
    ScenarioDocument doc;
    doc.annual = aggregate_result(result);
    doc.result = std::move(result);
    return doc;
}

namespace {

void atomic_write(const fs::path& path, const std::string& text) {
    static std::atomic<unsigned long> counter{0};
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += fmt::format(".tmp{}", counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
        out << text;
        if (!out.flush()) throw Error(fmt::format("write failed: {}", tmp.string()));
    }
    fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError(fmt::format("cannot read {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::exception& e) {
        throw Error(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<std::string> stems(const fs::path& dir, bool directories) {
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (directories && e.is_directory()) out.push_back(e.path().filename().string());
        if (!directories && e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

ResultStore::ResultStore(fs::path data_dir) : root_(std::move(data_dir)) { fs::create_directories(root_ / "cases"); }

fs::path ResultStore::case_dir(const std::string& case_name) const {
    if (!valid_case_name(case_name)) throw ValidationError(fmt::format("invalid case name '{}'", case_name));
    return root_ / "cases" / case_name;
}

fs::path ResultStore::scenario_path(const std::string& case_name, const std::string& scenario) const {
    if (!valid_case_name(scenario)) throw ValidationError(fmt::format("invalid scenario name '{}'", scenario));
    return case_dir(case_name) / "scenarios" / (scenario + ".json");
}

std::vector<std::string> ResultStore::list_cases() const {
    std::vector<std::string> out;
    for (auto& name : stems(root_ / "cases", true)) {
        if (valid_case_name(name) && fs::exists(root_ / "cases" / name / "manifest.json")) out.push_back(name);
    }
    return out;
}

bool ResultStore::has_case(const std::string& case_name) const {
    return valid_case_name(case_name) && fs::exists(case_dir(case_name) / "manifest.json");
}

std::optional<CaseManifest> ResultStore::read_manifest(const std::string& case_name) const {
    if (!has_case(case_name)) return std::nullopt;
    return read_json(case_dir(case_name) / "manifest.json").get<CaseManifest>();
}

void ResultStore::write_manifest(const CaseManifest& manifest) const {
    atomic_write(case_dir(manifest.config.case_name) / "manifest.json", json(manifest).dump(2));
}

void ResultStore::delete_case(const std::string& case_name) const { fs::remove_all(case_dir(case_name)); }

std::vector<std::string> ResultStore::list_scenarios(const std::string& case_name) const {
    return stems(case_dir(case_name) / "scenarios", false);
}

bool ResultStore::has_scenario(const std::string& case_name, const std::string& scenario) const {
    return valid_case_name(case_name) && valid_case_name(scenario) && fs::exists(scenario_path(case_name, scenario));
}

void ResultStore::write_scenario(const std::string& case_name, const ScenarioDocument& doc) const {
    atomic_write(scenario_path(case_name, doc.result.spec.name), document_to_json(doc).dump());
}

ScenarioDocument ResultStore::read_scenario(const std::string& case_name, const std::string& scenario) const {
    if (!has_scenario(case_name, scenario)) {
        throw NotFoundError(fmt::format("case '{}' has no stored scenario '{}'", case_name, scenario));
    }
    try {
        return document_from_json(read_json(scenario_path(case_name, scenario)));
    } catch (const json::exception& e) {
        throw Error(fmt::format("corrupt scenario document {}/{}: {}", case_name, scenario, e.what()));
    }
}

void ResultStore::delete_scenario(const std::string& case_name, const std::string& scenario) const {
    fs::remove(scenario_path(case_name, scenario));
}

}  // namespace fewsim::middleware
