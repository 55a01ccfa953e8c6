#include "fewsim/gateway/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <csignal>
#include <fstream>
#include <thread>

#include <fmt/ostream.h>

#include "CLI11.hpp"

#include "fewsim/core/errors.hpp"
#include "fewsim/fmlm/fmlm.hpp"
#include "fewsim/gateway/server.hpp"
#include "fewsim/indices/indices.hpp"
#include "fewsim/middleware/case_manager.hpp"
#include "fewsim/middleware/export.hpp"

namespace fewsim::gateway {

namespace {

using namespace fewsim::middleware;

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

// key:lower:upper:step, or key:value for a constant override.
VariableAdjustment parse_adjust(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(':', start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw CLI::ValidationError("--adjust", fmt::format("'{}' is not a number in '{}'", s, text));
        }
    };
    VariableAdjustment a;
    a.key = parts[0];
    if (parts.size() == 2) {
        a.lower_pct = a.upper_pct = num(parts[1]);
        a.step_pct = 1.0;
    } else if (parts.size() == 4) {
        a.lower_pct = num(parts[1]);
        a.upper_pct = num(parts[2]);
        a.step_pct = num(parts[3]);
    } else {
        throw CLI::ValidationError("--adjust", fmt::format("expected key:lower:upper:step, got '{}'", text));
    }
    return a;
}

struct Common {
    std::string dataset = env_or("FEWSIM_DATASET", FEWSIM_DEFAULT_DATASET);
    std::string data_dir = env_or("FEWSIM_DATA_DIR", "fewsim-data");
    std::size_t workers = 0;

    void add_to(CLI::App* app, bool with_workers) {
        app->add_option("--dataset", dataset, "study-area dataset directory")->capture_default_str();
        app->add_option("--data-dir", data_dir, "result store (env FEWSIM_DATA_DIR)")->capture_default_str();
        if (with_workers) app->add_option("--workers", workers, "worker threads (0: one per core)");
    }

    std::shared_ptr<const StudyAreaDataset> load() const {
        return std::make_shared<const StudyAreaDataset>(load_dataset(dataset));
    }
};

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"fewsim: coupled food-energy-water scenario simulator"};
    app.require_subcommand(1);

    Common common;

    auto* simulate = app.add_subcommand("simulate", "run a case headless and store its results");
    CaseConfig config;
    std::vector<std::string> adjust;
    bool single_pass = false;
    simulate->add_option("--case", config.case_name, "case name")->required();
    simulate->add_option("--climate", config.climate, "climate file (ssp245, ssp585)")->required();
    simulate->add_option("--adjust", adjust, "key:lower:upper:step (repeatable, order names scenarios)");
    simulate->add_flag("--single-pass", single_pass, "lag the power-plant water link by a month");
    common.add_to(simulate, true);

    auto* exporter = app.add_subcommand("export", "write stored results or indices as CSV");
    std::string export_case, out_path;
    std::vector<std::string> export_scenarios;
    bool export_indices = false;
    exporter->add_option("--case", export_case, "case name")->required();
    exporter->add_option("--scenario", export_scenarios, "limit to these scenarios (repeatable)");
    exporter->add_flag("--indices", export_indices, "indices instead of annual results");
    exporter->add_option("--out", out_path, "output file (default stdout)");
    common.add_to(exporter, false);

    auto* fitter = app.add_subcommand("fit-fmlm", "fit crop-share coefficients to a panel");
    std::string panel_path, coef_out;
    fmlm::FitOptions fit_options;
    fitter->add_option("--panel", panel_path, "panel CSV (default: the dataset's history panel)");
    fitter->add_option("--out", coef_out, "write coefficients CSV here");
    fitter->add_option("--max-iterations", fit_options.max_iterations)->capture_default_str();
    fitter->add_option("--tolerance", fit_options.gradient_tolerance)->capture_default_str();
    common.add_to(fitter, false);

    auto* serve = app.add_subcommand("serve", "run the REST service");
    ServeConfig serve_config;
    serve->add_option("--host", serve_config.host)->capture_default_str();
    serve->add_option("--port", serve_config.port)->capture_default_str();
    serve->add_option("--ui-dir", serve_config.ui_dir, "static UI bundle served under /");
    common.add_to(serve, true);

    auto* validate = app.add_subcommand("validate-dataset", "check a dataset directory");
    std::string validate_dir;
    validate->add_option("dir", validate_dir, "dataset directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) {
            for (const auto& a : adjust) config.adjustments.push_back(parse_adjust(a));
            ManagerOptions options;
            options.workers = common.workers;
            options.engine.single_pass = single_pass;
            CaseManager manager(common.load(), common.data_dir, options);
            auto t0 = std::chrono::steady_clock::now();
            auto job = manager.submit(config);
            fmt::print(out, "case {}: {} scenarios queued on {} workers\n", job.case_name, job.total(),
                       manager.worker_count());
            job = manager.wait(job.case_name);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            fmt::print(out, "case {}: {} ({}/{} done, {} failed) in {:.2f} s\n", job.case_name, to_string(job.status),
                       job.completed(), job.total(), job.failed(), secs);
            for (const auto& s : job.scenarios) {
                if (s.status == ScenarioStatus::failed) fmt::print(err, "  {} failed: {}\n", s.name, s.error);
            }
            return job.status == JobStatus::finished ? 0 : 1;
        }

        if (*exporter) {
            ResultStore store(common.data_dir);
            if (!store.has_case(export_case)) throw NotFoundError(fmt::format("unknown case '{}'", export_case));
            auto names = export_scenarios.empty() ? store.list_scenarios(export_case) : export_scenarios;
            std::ofstream file;
            if (!out_path.empty()) {
                file.open(out_path);
                if (!file) throw Error(fmt::format("cannot write {}", out_path));
            }
            std::ostream& dst = out_path.empty() ? out : file;
            std::shared_ptr<const StudyAreaDataset> ds;
            if (export_indices) {
                ds = common.load();
                write_indices_header(dst);
            } else {
                write_results_header(dst);
            }
            for (const auto& name : names) {
                auto doc = store.read_scenario(export_case, name);
                if (export_indices) {
                    std::vector<indices::IndexVector> rows;
                    for (int y = doc.result.horizon.first_year(); y <= doc.result.horizon.last_year(); ++y) {
                        rows.push_back(indices::compute_indices(doc.result, *ds, y));
                    }
                    write_indices_csv(dst, rows);
                } else {
                    write_results_csv(dst, doc);
                }
            }
            return 0;
        }

        if (*fitter) {
            auto ds = common.load();
            std::vector<std::string> crops;
            for (const auto& c : ds->crops) crops.push_back(c.id);
            auto predictors = fmlm::predictor_names(crops);
            auto panel = panel_path.empty() ? ds->fmlm.history : fmlm::read_panel_csv(panel_path, crops, predictors);
            auto fit = fmlm::fit(panel, crops, predictors, fit_options);
            fmt::print(out, "rows {}  iterations {}  converged {}  log-likelihood {:.6f}  gradient {:.3g}\n",
                       panel.rows.size(), fit.iterations, fit.converged ? "yes" : "no", fit.log_likelihood,
                       fit.gradient_norm);
            if (fit.degenerate) {
                std::string list;
                for (const auto& c : fit.degenerate_crops) list += (list.empty() ? "" : ", ") + c;
                fmt::print(err, "warning: degenerate shares for {}; coefficients clipped\n", list);
            }
            if (!coef_out.empty()) {
                fmlm::write_coefficients_csv(fit.coefficients, coef_out);
                fmt::print(out, "coefficients written to {}\n", coef_out);
            }
            return fit.converged ? 0 : 1;
        }

        if (*serve) {
            ManagerOptions options;
            options.workers = common.workers;
            CaseManager manager(common.load(), common.data_dir, options);
            Api api(manager);
            HttpServer server(api, serve_config);
            server.start();
            fmt::print(out, "serving http://{}:{} (store {})\n", serve_config.host, server.port(), common.data_dir);
            out.flush();
            std::signal(SIGINT, [](int) { g_stop = 1; });
            std::signal(SIGTERM, [](int) { g_stop = 1; });
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
            server.stop();
            return 0;
        }

        if (*validate) {
            auto ds = load_dataset(validate_dir);
            fmt::print(out, "{}: ok ({} crops, {} demand nodes, {} plants, climates:", validate_dir, ds.crops.size(),
                       ds.demand_nodes().size(), ds.energy.plants.size());
            for (const auto& [name, c] : ds.climates) fmt::print(out, " {}", name);
            fmt::print(out, ")\n");
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return 2;
    } catch (const DatasetError& e) {
        fmt::print(err, "dataset error [{}]: {}\n", e.field(), e.what());
        return 1;
    } catch (const NotFoundError& e) {
        fmt::print(err, "error: {}{}\n", e.what(), e.hint().empty() ? "" : fmt::format(" (hint: {})", e.hint()));
        return 1;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace fewsim::gateway
