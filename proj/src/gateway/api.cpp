#include "fewsim/gateway/api.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <mutex>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"
#include "fewsim/indices/indices.hpp"
#include "fewsim/middleware/json_io.hpp"
#include "fewsim/middleware/query.hpp"

namespace fewsim::gateway {

using nlohmann::json;
using namespace fewsim::middleware;

json ok_envelope(json payload) { return json{{"status", "ok"}, {"payload", std::move(payload)}}; }

json error_envelope(std::string_view code, std::string_view message, std::string_view hint) {
    json err{{"code", code}, {"message", message}};
    if (!hint.empty()) err["hint"] = hint;
    return json{{"status", "error"}, {"error", std::move(err)}};
}

const std::vector<RouteInfo>& Api::routes() {
    static const std::vector<RouteInfo> table = {
        {"GET", "/api/branches", "branch tree (optional path= for one subtree)"},
        {"GET", "/api/climate-files", "climate files and their columns"},
        {"POST", "/api/cases", "create a case and queue its scenario grid (202)"},
        {"GET", "/api/cases", "all cases with status"},
        {"GET", "/api/cases/{name}", "case config, job record and scenario specs"},
        {"PUT", "/api/cases/{name}", "replace a case's adjustments and re-run (202)"},
        {"DELETE", "/api/cases/{name}", "delete a case and its results"},
        {"GET", "/api/cases/{name}/status", "job record"},
        {"GET", "/api/scenarios/{name}/timeseries", "branch series: branch, from, to, resource, resolution, case"},
        {"GET", "/api/scenarios/{name}/composition", "per-source and per-destination totals: branch, year, case"},
        {"GET", "/api/compare", "percent differences vs base: base, scenarios, branch, year, case"},
        {"GET", "/api/compare/timeline", "yearly percent differences vs base: base, scenarios, branch, case"},
        {"GET", "/api/indices", "sustainability indices: scenarios, year, as=values|deltas, base, case"},
    };
    return table;
}

namespace {

struct Response {
    int status;
    json payload;
};

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) pos = text.size();
        if (pos > start) out.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string param(const ApiRequest& r, const std::string& key, const std::string& fallback = {}) {
    auto it = r.query.find(key);
    return it == r.query.end() ? fallback : it->second;
}

std::string required(const ApiRequest& r, const std::string& key) {
    auto v = param(r, key);
    if (v.empty()) throw ValidationError(fmt::format("query parameter '{}' is required", key));
    return v;
}

std::optional<int> int_param(const ApiRequest& r, const std::string& key) {
    auto v = param(r, key);
    if (v.empty()) return std::nullopt;
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ValidationError(fmt::format("query parameter '{}' must be an integer, got '{}'", key, v));
    }
    return out;
}

json variable_json(const VariableDef& v, const StudyAreaDataset& ds) {
    json j{{"key", v.key},
           {"label", v.label},
           {"unit", to_string(v.unit)},
           {"kind", to_string(v.kind)},
           {"adjustable", v.adjustable}};
    if (v.base_value) j["base_value"] = *v.base_value;
    if (!v.series_ref.empty()) j["series_ref"] = v.series_ref;
    if (v.adjustable) {
        if (const auto* lever = ds.find_lever(v.key)) {
            j["min_pct"] = lever->min_pct;
            j["max_pct"] = lever->max_pct;
        }
    }
    return j;
}

json node_json(const BranchNode& n, const StudyAreaDataset& ds) {
    json vars = json::array();
    for (const auto& v : n.variables) vars.push_back(variable_json(v, ds));
    return json{{"id", n.id},
                {"sector", to_string(n.sector)},
                {"label", n.label},
                {"children", n.children},
                {"variables", std::move(vars)}};
}

json timeseries_json(const TimeseriesResult& t) {
    json series = json::array();
    for (const auto& s : t.series) {
        series.push_back(json{{"name", s.name}, {"unit", to_string(s.unit)}, {"values", s.values}});
    }
    return json{{"scenario", t.scenario},
                {"branch", t.branch},
                {"resolution", t.resolution == Resolution::annual ? "annual" : "monthly"},
                {"periods", t.periods},
                {"series", std::move(series)}};
}

json entries_json(const std::vector<CompositionEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries) out.push_back(json{{"branch", e.branch}, {"value", e.value}, {"fraction", e.fraction}});
    return out;
}

json pct_diff(double value, double base) {
    if (base == 0.0) return nullptr;
    return (value - base) / std::abs(base) * 100.0;
}

json index_values_json(const indices::IndexVector& v) {
    json values = json::object(), flagged = json::object();
    for (std::size_t i = 0; i < indices::kIndexCount; ++i) {
        auto name = std::string(indices::to_string(static_cast<indices::Index>(i)));
        values[name] = v.values[i].flagged ? json(nullptr) : json(v.values[i].value);
        flagged[name] = v.values[i].flagged;
    }
    return json{{"scenario", v.scenario}, {"year", v.year}, {"values", values}, {"flagged", flagged}};
}

}  // namespace

struct Api::Impl {
    CaseManager& manager;

    struct Cached {
        std::filesystem::file_time_type mtime;
        std::shared_ptr<const ScenarioDocument> doc;
    };
    mutable std::mutex cache_mu;
    mutable std::map<std::pair<std::string, std::string>, Cached> cache;

    explicit Impl(CaseManager& m) : manager(m) {}

    const StudyAreaDataset& ds() const { return manager.dataset(); }

    // Case holding a stored result named `scenario`; `case_name` narrows the search.
    std::string locate(const std::string& scenario, const std::string& case_name) const {
        const auto& store = manager.store();
        if (!case_name.empty()) {
            if (!store.has_case(case_name)) throw NotFoundError(fmt::format("unknown case '{}'", case_name));
            if (!store.has_scenario(case_name, scenario)) {
                throw NotFoundError(fmt::format("case '{}' has no result for scenario '{}'", case_name, scenario),
                                    fmt::format("GET /api/cases/{}/status", case_name));
            }
            return case_name;
        }
        std::vector<std::string> hits;
        for (const auto& c : manager.cases()) {
            if (store.has_scenario(c, scenario)) hits.push_back(c);
        }
        if (hits.empty()) throw NotFoundError(fmt::format("no stored result for scenario '{}'", scenario));
        if (hits.size() > 1) {
            throw ConflictError(fmt::format("scenario '{}' exists in cases {}; pass case=", scenario,
                                            json(hits).dump()));
        }
        return hits.front();
    }

    std::shared_ptr<const ScenarioDocument> load(const std::string& case_name, const std::string& scenario) const {
        const auto path = manager.store().scenario_path(case_name, scenario);
        std::error_code ec;
        auto mtime = std::filesystem::last_write_time(path, ec);
        if (ec) throw NotFoundError(fmt::format("case '{}' has no result for scenario '{}'", case_name, scenario));
        {
            std::lock_guard lock(cache_mu);
            auto it = cache.find({case_name, scenario});
            if (it != cache.end() && it->second.mtime == mtime) return it->second.doc;
        }
        auto doc = std::make_shared<const ScenarioDocument>(manager.store().read_scenario(case_name, scenario));
        std::lock_guard lock(cache_mu);
        if (cache.size() > 64) cache.clear();
        cache[{case_name, scenario}] = {mtime, doc};
        return doc;
    }

    std::shared_ptr<const ScenarioDocument> scenario(const std::string& name, const std::string& case_name) const {
        return load(locate(name, case_name), name);
    }

    Response branches(const ApiRequest& r) const {
        json nodes = json::array();
        ds().tree.resolve(param(r, "path"));
        for (const auto* n : ds().tree.subtree(param(r, "path"))) nodes.push_back(node_json(*n, ds()));
        return {200, json{{"roots", ds().tree.roots()}, {"nodes", std::move(nodes)}}};
    }

    Response climate_files() const {
        json out = json::array();
        for (const auto& [name, c] : ds().climates) {
            json cols = json::array();
            for (const auto& [col, s] : c.columns) cols.push_back(col);
            out.push_back(json{{"name", name},
                               {"first", c.first.to_string()},
                               {"start", c.horizon.start.to_string()},
                               {"end", c.horizon.end.to_string()},
                               {"columns", cols}});
        }
        return {200, out};
    }

    static json parse_body(const ApiRequest& r) {
        try {
            return json::parse(r.body);
        } catch (const json::exception& e) {
            throw ValidationError(fmt::format("request body is not valid JSON: {}", e.what()));
        }
    }

    template <typename T>
    static T from_body(const json& j, const char* what) {
        try {
            return j.get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(fmt::format("invalid {}: {}", what, e.what()));
        }
    }

    static json accepted(const JobRecord& job) {
        return json{{"job", job}, {"status_url", fmt::format("/api/cases/{}/status", job.case_name)}};
    }

    Response create_case(const ApiRequest& r, ApiResponse& raw) const {
        auto config = from_body<CaseConfig>(parse_body(r), "case config");
        auto job = manager.submit(config);
        raw.headers["Location"] = fmt::format("/api/cases/{}/status", job.case_name);
        return {202, accepted(job)};
    }

    Response list_cases() const {
        json out = json::array();
        for (const auto& name : manager.cases()) {
            auto m = manager.manifest(name);
            out.push_back(json{{"case_name", name},
                               {"climate", m.config.climate},
                               {"status", to_string(m.job.status)},
                               {"completed", m.job.completed()},
                               {"total", m.job.total()}});
        }
        return {200, out};
    }

    Response get_case(const std::string& name) const {
        auto m = manager.manifest(name);
        json specs = json::array();
        for (const auto& s : expand_scenario_grid(m.config)) specs.push_back(s);
        return {200, json{{"config", m.config}, {"job", m.job}, {"runs", m.runs}, {"scenarios", specs}}};
    }

    Response edit_case(const std::string& name, const ApiRequest& r, ApiResponse& raw) const {
        auto body = parse_body(r);
        if (!body.is_object() || !body.contains("adjustments")) {
            throw ValidationError("body must be an object with an 'adjustments' array");
        }
        auto adjustments = from_body<std::vector<VariableAdjustment>>(body.at("adjustments"), "adjustments");
        auto job = manager.edit(name, adjustments);
        raw.headers["Location"] = fmt::format("/api/cases/{}/status", name);
        return {202, accepted(job)};
    }

    Response timeseries(const std::string& name, const ApiRequest& r) const {
        auto doc = scenario(name, param(r, "case"));
        TimeseriesQuery q;
        q.branch = required(r, "branch");
        q.from_year = int_param(r, "from");
        q.to_year = int_param(r, "to");
        q.resource = param(r, "resource");
        q.resolution = parse_resolution(param(r, "resolution"));
        return {200, timeseries_json(query_timeseries(*doc, ds().tree, q))};
    }

    Response composition(const std::string& name, const ApiRequest& r) const {
        auto doc = scenario(name, param(r, "case"));
        auto year = int_param(r, "year").value_or(doc->result.horizon.first_year());
        auto c = query_composition(*doc, ds().tree, required(r, "branch"), year);
        return {200, json{{"scenario", c.scenario},
                          {"branch", c.branch},
                          {"year", c.year},
                          {"unit", to_string(c.unit)},
                          {"inputs", entries_json(c.inputs)},
                          {"outputs", entries_json(c.outputs)},
                          {"children_variable", c.children_variable},
                          {"children", entries_json(c.children)}}};
    }

    std::vector<std::string> scenario_list(const ApiRequest& r) const {
        auto names = split(required(r, "scenarios"), ',');
        if (names.empty()) throw ValidationError("scenarios must name at least one scenario");
        return names;
    }

    Response compare(const ApiRequest& r) const {
        const auto case_name = param(r, "case");
        const auto base_name = required(r, "base");
        const auto branch = required(r, "branch");
        auto base = scenario(base_name, case_name);
        const auto year = int_param(r, "year").value_or(base->result.horizon.first_year());
        const auto node = ds().tree.resolve(branch);
        std::vector<std::shared_ptr<const ScenarioDocument>> docs;
        for (const auto& n : scenario_list(r)) docs.push_back(scenario(n, case_name));

        std::vector<std::string> rows_for{branch};
        rows_for.insert(rows_for.end(), node.children.begin(), node.children.end());
        json rows = json::array();
        for (const auto& b : rows_for) {
            auto var = plotted_variable(*base, ds().tree, b);
            if (var.empty()) continue;
            const auto& bs = base->annual.at(b).at(var);
            double bv = bs.at(year);
            json values = json::array();
            for (const auto& d : docs) {
                double v = d->annual.at(b).at(var).at(year);
                values.push_back(json{{"scenario", d->result.spec.name}, {"value", v}, {"pct_diff", pct_diff(v, bv)}});
            }
            rows.push_back(json{{"branch", b},
                                {"variable", var},
                                {"unit", to_string(bs.unit)},
                                {"base_value", bv},
                                {"values", std::move(values)}});
        }
        return {200, json{{"base", base_name}, {"branch", branch}, {"year", year}, {"rows", std::move(rows)}}};
    }

    Response compare_timeline(const ApiRequest& r) const {
        const auto case_name = param(r, "case");
        const auto base_name = required(r, "base");
        const auto branch = required(r, "branch");
        ds().tree.resolve(branch);
        auto base = scenario(base_name, case_name);
        auto var = plotted_variable(*base, ds().tree, branch);
        if (var.empty()) throw NotFoundError(fmt::format("branch '{}' has no stored series", branch));
        const auto& bs = base->annual.at(branch).at(var);
        json years = json::array();
        for (int y = bs.first_year; y <= bs.last_year(); ++y) years.push_back(y);
        json scenarios = json::array();
        for (const auto& n : scenario_list(r)) {
            auto d = scenario(n, case_name);
            const auto& s = d->annual.at(branch).at(var);
            json diffs = json::array();
            for (std::size_t i = 0; i < s.values.size(); ++i) diffs.push_back(pct_diff(s.values[i], bs.values[i]));
            scenarios.push_back(json{{"scenario", n}, {"values", s.values}, {"pct_diff", std::move(diffs)}});
        }
        return {200, json{{"base", base_name},
                          {"branch", branch},
                          {"variable", var},
                          {"unit", to_string(bs.unit)},
                          {"years", std::move(years)},
                          {"base_values", bs.values},
                          {"scenarios", std::move(scenarios)}}};
    }

    Response indices(const ApiRequest& r) const {
        const auto case_name = param(r, "case");
        const auto names = scenario_list(r);
        const auto as = param(r, "as", "values");
        if (as != "values" && as != "deltas") throw ValidationError("as must be values or deltas");

        std::vector<indices::IndexVector> rows;
        int year = 0;
        for (const auto& n : names) {
            auto d = scenario(n, case_name);
            year = int_param(r, "year").value_or(d->result.horizon.first_year());
            rows.push_back(indices::compute_indices(d->result, ds(), year));
        }
        json names_json = json::array();
        for (std::size_t i = 0; i < indices::kIndexCount; ++i) {
            auto idx = static_cast<indices::Index>(i);
            names_json.push_back(json{{"name", indices::to_string(idx)}, {"sector", to_string(indices::sector_of(idx))}});
        }
        json out{{"year", year}, {"as", as}, {"indices", names_json}};
        if (as == "deltas") {
            std::string base_name = param(r, "base");
            std::string base_case = case_name;
            if (base_name.empty()) {
                base_case = locate(names.front(), case_name);
                base_name = manager.manifest(base_case).config.climate + "_base";
            }
            auto b = scenario(base_name, base_case);
            auto base_vec = indices::compute_indices(b->result, ds(), year);
            out["base"] = base_name;
            out["base_values"] = index_values_json(base_vec);
            for (auto& row : rows) row = indices::index_deltas(row, base_vec);
        }
        json jr = json::array();
        for (const auto& row : rows) jr.push_back(index_values_json(row));
        out["rows"] = std::move(jr);
        return {200, out};
    }

    Response route(const ApiRequest& r, ApiResponse& raw) const {
        auto seg = split(r.path, '/');
        const auto& m = r.method;
        auto is = [&](std::initializer_list<std::string_view> parts) {
            if (seg.size() != parts.size()) return false;
            std::size_t i = 0;
            for (auto p : parts) {
                if (p != "*" && seg[i] != p) return false;
                ++i;
            }
            return true;
        };
        auto not_allowed = [&] {
            return Response{405, error_envelope("method_not_allowed", fmt::format("{} not allowed on {}", m, r.path))};
        };

        if (is({"api", "branches"})) return m == "GET" ? branches(r) : not_allowed();
        if (is({"api", "climate-files"})) return m == "GET" ? climate_files() : not_allowed();
        if (is({"api", "cases"})) {
            if (m == "GET") return list_cases();
            if (m == "POST") return create_case(r, raw);
            return not_allowed();
        }
        if (is({"api", "cases", "*"})) {
            if (m == "GET") return get_case(seg[2]);
            if (m == "PUT") return edit_case(seg[2], r, raw);
            if (m == "DELETE") {
                manager.remove(seg[2]);
                return {200, json{{"deleted", seg[2]}}};
            }
            return not_allowed();
        }
        if (is({"api", "cases", "*", "status"})) return m == "GET" ? Response{200, manager.status(seg[2])} : not_allowed();
        if (is({"api", "scenarios", "*", "timeseries"})) return m == "GET" ? timeseries(seg[2], r) : not_allowed();
        if (is({"api", "scenarios", "*", "composition"})) return m == "GET" ? composition(seg[2], r) : not_allowed();
        if (is({"api", "compare"})) return m == "GET" ? compare(r) : not_allowed();
        if (is({"api", "compare", "timeline"})) return m == "GET" ? compare_timeline(r) : not_allowed();
        if (is({"api", "indices"})) return m == "GET" ? indices(r) : not_allowed();
        throw NotFoundError(fmt::format("no route {} {}", m, r.path), "see GET /api/branches and the API reference");
    }
};

Api::Api(CaseManager& manager) : impl_(std::make_unique<Impl>(manager)) {}
Api::~Api() = default;

ApiResponse Api::handle(const ApiRequest& request) const {
    ApiResponse out;
    try {
        auto r = impl_->route(request, out);
        out.status = r.status;
        out.body = r.status < 400 ? ok_envelope(std::move(r.payload)) : std::move(r.payload);
    } catch (const NotFoundError& e) {
        out.status = 404;
        out.body = error_envelope("not_found", e.what(), e.hint());
    } catch (const ValidationError& e) {
        out.status = 400;
        out.body = error_envelope("invalid_request", e.what());
    } catch (const ConflictError& e) {
        out.status = 409;
        out.body = error_envelope("conflict", e.what());
    } catch (const std::exception& e) {
        out.status = 500;
        out.body = error_envelope("internal", e.what());
    }
    return out;
}

}  // namespace fewsim::gateway
