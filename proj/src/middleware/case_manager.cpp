#include "fewsim/middleware/case_manager.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim::middleware {

namespace {

struct Task {
    std::string case_name;
    std::size_t generation = 0;
    ScenarioSpec spec;
};

}  // namespace

struct CaseManager::Impl {
    std::shared_ptr<const StudyAreaDataset> dataset;
    ResultStore store;
    ManagerOptions options;

    mutable std::mutex mu;
    mutable std::condition_variable changed;
    std::condition_variable work;
    std::deque<Task> queue;
    std::map<std::string, CaseManifest> manifests;  // cases known to this process
    std::map<std::string, std::size_t> generation;  // bumped by submit/edit/remove
    std::map<std::string, std::size_t> pending;     // queued + running scenarios per case
    std::size_t runs = 0;
    bool stopping = false;
    std::vector<std::thread> workers;

    Impl(std::shared_ptr<const StudyAreaDataset> ds, std::filesystem::path dir, ManagerOptions opt)
        : dataset(std::move(ds)), store(std::move(dir)), options(std::move(opt)) {
        if (!dataset) throw ValidationError("case manager needs a dataset");
        for (const auto& name : store.list_cases()) {
            auto m = store.read_manifest(name);
            if (!m) continue;
            if (m->job.active()) {
                m->job.status = JobStatus::failed;
                m->job.error = "interrupted: the service stopped before the case finished";
                m->job.finished_at = utc_now();
                for (auto& s : m->job.scenarios) {
                    if (s.status == ScenarioStatus::pending || s.status == ScenarioStatus::running) {
                        s.status = ScenarioStatus::failed;
                        s.error = "interrupted";
                    }
                }
                store.write_manifest(*m);
            }
            manifests[name] = std::move(*m);
        }
        std::size_t n = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
        for (std::size_t i = 0; i < n; ++i) workers.emplace_back([this] { worker(); });
    }

    ~Impl() {
        {
            std::lock_guard lock(mu);
            stopping = true;
            queue.clear();
        }
        work.notify_all();
        for (auto& t : workers) t.join();
    }

    CaseManifest& known(const std::string& name) {
        auto it = manifests.find(name);
        if (it == manifests.end()) throw NotFoundError(fmt::format("unknown case '{}'", name), "GET /api/cases lists cases");
        return it->second;
    }

    void check_config(const CaseConfig& config) const {
        config.validate();
        dataset->climate(config.climate);  // NotFoundError for unknown climate files
        for (const auto& a : config.adjustments) {
            const auto* lever = dataset->find_lever(a.key);
            if (!lever) throw ValidationError(fmt::format("'{}' is not an adjustable variable", a.key));
            if (a.lower_pct < lever->min_pct || a.upper_pct > lever->max_pct) {
                throw ValidationError(fmt::format("adjustment '{}' [{}, {}] exceeds allowed [{}, {}]", a.key, a.lower_pct,
                                                  a.upper_pct, lever->min_pct, lever->max_pct));
            }
        }
    }

    // Caller holds mu. Queues `specs` for the case's current generation.
    void enqueue(CaseManifest& m, const std::vector<ScenarioSpec>& specs) {
        const auto& name = m.config.case_name;
        for (const auto& s : specs) queue.push_back({name, generation[name], s});
        pending[name] = specs.size();
        if (specs.empty()) {
            m.job.status = JobStatus::finished;
            m.job.finished_at = utc_now();
        }
        store.write_manifest(m);
        work.notify_all();
        changed.notify_all();
    }

    static ScenarioProgress* progress(CaseManifest& m, const std::string& scenario) {
        for (auto& p : m.job.scenarios) {
            if (p.name == scenario) return &p;
        }
        return nullptr;
    }

    void worker() {
        while (true) {
            Task task;
            {
                std::unique_lock lock(mu);
                work.wait(lock, [&] { return stopping || !queue.empty(); });
                if (stopping) return;
                task = std::move(queue.front());
                queue.pop_front();
                if (generation[task.case_name] != task.generation) continue;
                auto& m = manifests.at(task.case_name);
                if (auto* p = progress(m, task.spec.name)) p->status = ScenarioStatus::running;
            }

            std::string error;
            try {
                if (options.before_run) options.before_run(task.case_name, task.spec);
                auto result = coupling::run_scenario(*dataset, task.spec, options.engine);
                store.write_scenario(task.case_name, make_document(std::move(result)));
            } catch (const std::exception& e) {
                error = e.what();
                if (error.empty()) error = "scenario failed";
            }

            std::lock_guard lock(mu);
            if (generation[task.case_name] != task.generation) continue;
            auto& m = manifests.at(task.case_name);
            ++runs;
            ++m.runs;
            if (auto* p = progress(m, task.spec.name)) {
                p->status = error.empty() ? ScenarioStatus::done : ScenarioStatus::failed;
                p->error = error;
            }
            if (!error.empty() && m.job.error.empty()) m.job.error = fmt::format("{}: {}", task.spec.name, error);
            if (--pending[task.case_name] == 0) {
                m.job.status = m.job.failed() ? JobStatus::failed : JobStatus::finished;
                m.job.finished_at = utc_now();
            }
            store.write_manifest(m);
            changed.notify_all();
        }
    }
};

CaseManager::CaseManager(std::shared_ptr<const StudyAreaDataset> dataset, std::filesystem::path data_dir,
                         ManagerOptions options)
    : impl_(std::make_unique<Impl>(std::move(dataset), std::move(data_dir), std::move(options))) {}

CaseManager::~CaseManager() = default;

JobRecord CaseManager::submit(const CaseConfig& config) {
    impl_->check_config(config);
    auto specs = expand_scenario_grid(config);

    std::lock_guard lock(impl_->mu);
    if (impl_->manifests.count(config.case_name) || impl_->store.has_case(config.case_name)) {
        throw ConflictError(fmt::format("case '{}' already exists", config.case_name));
    }
    CaseManifest m;
    m.config = config;
    m.job.case_name = config.case_name;
    m.job.submitted_at = m.job.started_at = utc_now();
    m.job.status = JobStatus::in_progress;
    for (const auto& s : specs) m.job.scenarios.push_back({s.name, ScenarioStatus::pending, {}});
    auto& slot = impl_->manifests[config.case_name] = std::move(m);
    ++impl_->generation[config.case_name];
    impl_->enqueue(slot, specs);
    return slot.job;
}

JobRecord CaseManager::edit(const std::string& case_name, const std::vector<VariableAdjustment>& adjustments) {
    std::lock_guard lock(impl_->mu);
    auto& m = impl_->known(case_name);
    if (m.job.active()) throw ConflictError(fmt::format("case '{}' is still running", case_name));

    CaseConfig config = m.config;
    config.adjustments = adjustments;
    impl_->check_config(config);
    auto specs = expand_scenario_grid(config);

    // Stored specs of the previous grid, by scenario name.
    std::map<std::string, ScenarioSpec> previous;
    for (const auto& s : expand_scenario_grid(m.config)) previous[s.name] = s;
    std::map<std::string, ScenarioStatus> previous_status;
    for (const auto& p : m.job.scenarios) previous_status[p.name] = p.status;

    JobRecord job;
    job.case_name = case_name;
    job.submitted_at = job.started_at = utc_now();
    job.status = JobStatus::in_progress;
    std::vector<ScenarioSpec> to_run;
    std::map<std::string, bool> keep;
    for (const auto& s : specs) {
        auto prev = previous.find(s.name);
        auto st = previous_status.find(s.name);
        bool reusable = prev != previous.end() && prev->second == s && st != previous_status.end() &&
                        (st->second == ScenarioStatus::done || st->second == ScenarioStatus::reused) &&
                        impl_->store.has_scenario(case_name, s.name);
        keep[s.name] = reusable;
        job.scenarios.push_back({s.name, reusable ? ScenarioStatus::reused : ScenarioStatus::pending, {}});
        if (!reusable) to_run.push_back(s);
    }
    for (const auto& stored : impl_->store.list_scenarios(case_name)) {
        if (!keep[stored]) impl_->store.delete_scenario(case_name, stored);
    }

    m.config = std::move(config);
    m.job = std::move(job);
    ++impl_->generation[case_name];
    impl_->enqueue(m, to_run);
    return m.job;
}

void CaseManager::remove(const std::string& case_name) {
    std::lock_guard lock(impl_->mu);
    auto& m = impl_->known(case_name);
    if (m.job.active()) throw ConflictError(fmt::format("case '{}' is still running", case_name));
    impl_->store.delete_case(case_name);
    impl_->manifests.erase(case_name);
    ++impl_->generation[case_name];
    impl_->changed.notify_all();
}

JobRecord CaseManager::status(const std::string& case_name) const { return manifest(case_name).job; }

CaseManifest CaseManager::manifest(const std::string& case_name) const {
    std::lock_guard lock(impl_->mu);
    return impl_->known(case_name);
}

std::vector<std::string> CaseManager::cases() const {
    std::lock_guard lock(impl_->mu);
    std::vector<std::string> out;
    for (const auto& [name, m] : impl_->manifests) out.push_back(name);
    return out;
}

JobRecord CaseManager::wait(const std::string& case_name) const {
    std::unique_lock lock(impl_->mu);
    impl_->known(case_name);
    impl_->changed.wait(lock, [&] {
        auto it = impl_->manifests.find(case_name);
        return it == impl_->manifests.end() || !it->second.job.active();
    });
    return impl_->known(case_name).job;
}

void CaseManager::wait_all() const {
    std::unique_lock lock(impl_->mu);
    impl_->changed.wait(lock, [&] {
        return std::none_of(impl_->manifests.begin(), impl_->manifests.end(),
                            [](const auto& kv) { return kv.second.job.active(); });
    });
}

std::size_t CaseManager::runs() const {
    std::lock_guard lock(impl_->mu);
    return impl_->runs;
}

const ResultStore& CaseManager::store() const { return impl_->store; }
const StudyAreaDataset& CaseManager::dataset() const { return *impl_->dataset; }
std::size_t CaseManager::worker_count() const { return impl_->workers.size(); }

}  // namespace fewsim::middleware
