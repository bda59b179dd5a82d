#include "btfleet/benchmark.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace btfleet {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<TaskSpec> Suite::all_tasks() const {
    std::vector<TaskSpec> out;
    for (const auto& g : groups)
        for (const auto& t : g.tasks) out.push_back(t);
    return out;
}

namespace {

Predicate parse_goal_json(const json& gj) {
    Predicate p;
    auto label = label_from_string(gj.at("label").get<std::string>());
    if (!label) throw SchemaError("suite goal: unknown label " + gj.at("label").get<std::string>());
    p.label = *label;
    p.agent = gj.value("agent", "");
    p.subject = gj.value("subject", "");
    p.target = gj.value("target", "");
    p.desired = gj.value("desired", true);
    validate_predicate(p);
    return p;
}

}  // namespace

Suite load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open suite '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
    if (j.value("format_version", 0) != 1) throw SchemaError(path + ": unsupported format_version");
    Suite suite;
    suite.name = j.value("name", "suite");
    suite.base_dir = fs::path(path).parent_path().string();
    if (j.contains("config"))
        for (const auto& [k, v] : j.at("config").items())
            suite.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
    for (const auto& gj : j.at("groups")) {
        SuiteGroup group;
        group.id = gj.at("id").get<std::string>();
        group.scenario = gj.at("scenario").get<std::string>();
        for (const auto& tj : gj.at("tasks")) {
            TaskSpec task;
            task.id = tj.at("id").get<std::string>();
            task.group = group.id;
            task.scenario = tj.value("scenario", group.scenario);
            task.instruction = tj.value("instruction", "");
            for (const auto& goal : tj.at("goals")) task.goals.push_back(parse_goal_json(goal));
            if (task.goals.empty()) throw SchemaError(task.id + ": no goals");
            task.expected_min_steps = tj.value("expected_min_steps", 1);
            task.infeasible = tj.value("infeasible", false);
            group.tasks.push_back(std::move(task));
        }
        suite.groups.push_back(std::move(group));
    }
    return suite;
}

GroupMetrics compute_metrics(const std::vector<std::pair<bool, double>>& outcomes) {
    if (outcomes.empty()) throw EmptyOutcomes("metrics need at least one outcome");
    GroupMetrics m;
    m.n = static_cast<int>(outcomes.size());
    double tick_sum = 0.0;
    for (const auto& [success, ticks] : outcomes) {
        if (success) {
            ++m.n_success;
            tick_sum += ticks;
        }
    }
    m.sr = static_cast<double>(m.n_success) / static_cast<double>(m.n);
    if (m.n_success > 0) m.as = tick_sum / static_cast<double>(m.n_success);
    return m;
}

std::string format_percent(double sr) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << sr * 100.0;
    std::string s = os.str();
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::string format_steps(double as) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << as;
    return os.str();
}

uint64_t trial_seed(uint64_t base_seed, const std::string& task_id, int trial) {
    return derive_seed(base_seed, task_id + "#trial" + std::to_string(trial));
}

std::unique_ptr<PlannerPort> make_planner(const std::string& name, uint64_t seed,
                                          const BenchmarkOptions& options,
                                          std::shared_ptr<LlmClient> client) {
    if (name == "oracle") return std::make_unique<OraclePlanner>();
    if (name == "mcts")
        return std::make_unique<MctsPlanner>(options.mcts_budget, options.mcts_depth, seed);
    if (name == "llm") {
        if (!client) throw ConfigError("llm planner needs a model client");
        return std::make_unique<LlmPlanner>(client);
    }
    if (name == "llm-mcts") {
        if (!client) throw ConfigError("llm-mcts planner needs a model client");
        return std::make_unique<LlmMctsPlanner>(options.mcts_budget, options.mcts_depth, seed, client);
    }
    throw ConfigError("unknown planner '" + name + "'");
}

namespace {

std::string resolve_path(const Suite& suite, const std::string& relative) {
    fs::path p(relative);
    if (p.is_absolute()) return relative;
    return (fs::path(suite.base_dir) / p).string();
}

struct TrialJob {
    const TaskSpec* task;
    int trial;
};

TrialOutcome run_one_trial(const Suite& suite, const TaskSpec& task, int trial,
                           const std::string& planner_name, const BenchmarkOptions& options,
                           const std::shared_ptr<LlmClient>& client, const WorldState& canonical,
                           std::vector<DispatchRecord>* dispatches) {
    const uint64_t seed = trial_seed(options.base_seed, task.id, trial);
    WorldState world = randomize_initial(canonical, seed);

    std::vector<Predicate> goals = task.goals;
    if (planner_name == "llm" && client && !task.instruction.empty())
        goals = llm_goal_decomposition(*client, task.instruction, world, task.goals);

    const std::string owner = derive_owner(world, goals);
    auto trees = build_mission_trees(world, goals, owner);
    auto planner = make_planner(planner_name, derive_seed(seed, "planner"), options, client);

    MissionConfig config;
    config.max_ticks = options.max_ticks;
    MissionTrace trace = run_mission(world, trees, *planner, options.max_ticks, config, dispatches);

    TrialOutcome out;
    out.group = task.group;
    out.task = task.id;
    out.trial = trial;
    out.success = trace.terminal == MissionStatus::AllGoalsMet;
    out.ticks = trace.ticks;
    out.terminal = to_string(trace.terminal);
    out.delegations = trace.delegations;
    if (options.keep_traces) out.trace_text = trace.text();
    return out;
}

BenchmarkReport assemble(const Suite& suite, const std::string& planner_name,
                         const BenchmarkOptions& options, std::vector<TrialOutcome> outcomes,
                         std::vector<DispatchRecord> dispatches) {
    std::sort(outcomes.begin(), outcomes.end(), [](const TrialOutcome& a, const TrialOutcome& b) {
        return std::tie(a.group, a.task, a.trial) < std::tie(b.group, b.task, b.trial);
    });
    BenchmarkReport report;
    report.suite = suite.name;
    report.planner = planner_name;
    report.trials = options.trials;
    report.base_seed = options.base_seed;
    report.outcomes = std::move(outcomes);
    report.dispatches = std::move(dispatches);
    report.config_digest = hex64(fnv1a64(
        suite.name + "|" + planner_name + "|" + std::to_string(options.trials) + "|" +
        std::to_string(options.base_seed) + "|" + std::to_string(options.max_ticks) + "|" +
        std::to_string(options.mcts_budget) + "|" + std::to_string(options.mcts_depth) + "|" +
        to_string(options.llm.mode)));
    for (const auto& g : suite.groups) {
        std::vector<std::pair<bool, double>> pairs;
        for (const auto& o : report.outcomes)
            if (o.group == g.id) pairs.push_back({o.success, static_cast<double>(o.ticks)});
        if (!pairs.empty()) report.group_metrics[g.id] = compute_metrics(pairs);
    }
    return report;
}

}  // namespace

BenchmarkReport run_benchmark_serial(const Suite& suite, const std::string& planner_name,
                                     const BenchmarkOptions& options) {
    if (options.trials < 1) throw ConfigError("trials must be >= 1");
    std::shared_ptr<LlmClient> client;
    if (planner_name == "llm" || planner_name == "llm-mcts")
        client = std::make_shared<LlmClient>(options.llm);

    std::map<std::string, WorldState> scenario_cache;
    for (const auto& task : suite.all_tasks())
        if (!scenario_cache.count(task.scenario))
            scenario_cache.emplace(task.scenario, load_scenario_file(resolve_path(suite, task.scenario)));

    std::vector<TrialOutcome> outcomes;
    std::vector<DispatchRecord> dispatches;
    for (const auto& task : suite.all_tasks()) {
        for (int trial = 0; trial < options.trials; ++trial) {
            std::vector<DispatchRecord> local;
            outcomes.push_back(run_one_trial(suite, task, trial, planner_name, options, client,
                                             scenario_cache.at(task.scenario),
                                             options.collect_dispatches ? &local : nullptr));
            for (auto& d : local) dispatches.push_back(std::move(d));
        }
    }
    return assemble(suite, planner_name, options, std::move(outcomes), std::move(dispatches));
}

BenchmarkReport run_benchmark(const Suite& suite, const std::string& planner_name,
                              const BenchmarkOptions& options) {
    if (options.jobs <= 1) return run_benchmark_serial(suite, planner_name, options);
    if (options.llm.mode == LlmMode::Record)
        return run_benchmark_serial(suite, planner_name, options);  // the store is append-only

    std::shared_ptr<LlmClient> client;
    if (planner_name == "llm" || planner_name == "llm-mcts")
        client = std::make_shared<LlmClient>(options.llm);

    std::map<std::string, WorldState> scenario_cache;
    for (const auto& task : suite.all_tasks())
        if (!scenario_cache.count(task.scenario))
            scenario_cache.emplace(task.scenario, load_scenario_file(resolve_path(suite, task.scenario)));

    const auto tasks = suite.all_tasks();
    std::vector<TrialJob> jobs;
    for (const auto& task : tasks)
        for (int trial = 0; trial < options.trials; ++trial) jobs.push_back({&task, trial});

    std::vector<TrialOutcome> outcomes(jobs.size());
    std::vector<std::vector<DispatchRecord>> dispatch_slots(jobs.size());
#ifdef _OPENMP
    omp_set_num_threads(options.jobs);
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < static_cast<long>(jobs.size()); ++i) {
        outcomes[static_cast<size_t>(i)] = run_one_trial(
            suite, *jobs[static_cast<size_t>(i)].task, jobs[static_cast<size_t>(i)].trial, planner_name,
            options, client, scenario_cache.at(jobs[static_cast<size_t>(i)].task->scenario),
            options.collect_dispatches ? &dispatch_slots[static_cast<size_t>(i)] : nullptr);
    }
    std::vector<DispatchRecord> dispatches;
    for (auto& slot : dispatch_slots)
        for (auto& d : slot) dispatches.push_back(std::move(d));
    return assemble(suite, planner_name, options, std::move(outcomes), std::move(dispatches));
}

std::string BenchmarkReport::to_json() const {
    json j;
    j["suite"] = suite;
    j["planner"] = planner;
    j["trials"] = trials;
    j["base_seed"] = base_seed;
    j["config_digest"] = config_digest;
    j["groups"] = json::object();
    for (const auto& [id, m] : group_metrics) {
        json gj;
        gj["n"] = m.n;
        gj["n_success"] = m.n_success;
        gj["sr"] = format_percent(m.sr);
        gj["as"] = m.as ? format_steps(*m.as) : "";
        j["groups"][id] = gj;
    }
    j["outcomes"] = json::array();
    for (const auto& o : outcomes) {
        json oj;
        oj["group"] = o.group;
        oj["task"] = o.task;
        oj["trial"] = o.trial;
        oj["success"] = o.success;
        oj["ticks"] = o.ticks;
        oj["terminal"] = o.terminal;
        oj["delegations"] = o.delegations;
        j["outcomes"].push_back(oj);
    }
    return j.dump(2) + "\n";
}

namespace {

// Per-task grid cell: mean ticks over successful trials, "x" when none.
std::string grid_cell(const std::vector<const TrialOutcome*>& trials) {
    int successes = 0;
    double sum = 0.0;
    for (const TrialOutcome* o : trials)
        if (o->success) {
            ++successes;
            sum += o->ticks;
        }
    if (successes == 0) return "x";
    const double mean = sum / successes;
    if (mean == static_cast<double>(static_cast<long>(mean)))
        return std::to_string(static_cast<long>(mean));
    std::ostringstream os;
    os.precision(1);
    os << std::fixed << mean;
    return os.str();
}

}  // namespace

std::string BenchmarkReport::to_text() const {
    std::ostringstream out;
    out << "suite " << suite << "  planner " << planner << "  trials " << trials << "  seed "
        << base_seed << "  digest " << config_digest << "\n\n";

    std::vector<std::string> group_ids;
    for (const auto& [id, m] : group_metrics) group_ids.push_back(id);

    for (const auto& gid : group_ids) {
        std::vector<std::string> task_ids;
        std::map<std::string, std::vector<const TrialOutcome*>> by_task;
        for (const auto& o : outcomes) {
            if (o.group != gid) continue;
            if (!by_task.count(o.task)) task_ids.push_back(o.task);
            by_task[o.task].push_back(&o);
        }
        out << gid << "\n";
        std::string header = "task   ";
        std::string row = planner;
        row.resize(7, ' ');
        for (const auto& tid : task_ids) {
            std::string short_id = tid.substr(tid.find('-') + 1);
            std::string cell = grid_cell(by_task[tid]);
            const size_t width = std::max(short_id.size(), cell.size()) + 1;
            short_id.resize(width, ' ');
            cell.resize(width, ' ');
            header += short_id;
            row += cell;
        }
        out << header << "\n" << row << "\n\n";
    }

    out << "summary\n";
    out << "group      SR(%)   AS\n";
    for (const auto& gid : group_ids) {
        const GroupMetrics& m = group_metrics.at(gid);
        std::string g = gid;
        g.resize(11, ' ');
        std::string sr = format_percent(m.sr);
        sr.resize(8, ' ');
        out << g << sr << (m.as ? format_steps(*m.as) : "-") << "\n";
    }
    return out.str();
}

void emit_report(const BenchmarkReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "report.json");
        if (!f) throw IoError("cannot write report.json under " + out_dir);
        f << report.to_json();
    }
    {
        std::ofstream f(fs::path(out_dir) / "report.txt");
        if (!f) throw IoError("cannot write report.txt under " + out_dir);
        f << report.to_text();
    }
    const fs::path trace_dir = fs::path(out_dir) / "traces";
    fs::create_directories(trace_dir);
    for (const auto& o : report.outcomes) {
        if (o.trace_text.empty()) continue;
        std::ofstream f(trace_dir / (o.task + "-t" + std::to_string(o.trial) + ".txt"));
        if (!f) throw IoError("cannot write traces under " + out_dir);
        f << o.trace_text;
    }
}

std::vector<TaskAudit> audit_suite(const Suite& suite, const BenchmarkOptions& options) {
    std::map<std::string, WorldState> scenario_cache;
    for (const auto& task : suite.all_tasks())
        if (!scenario_cache.count(task.scenario))
            scenario_cache.emplace(task.scenario, load_scenario_file(resolve_path(suite, task.scenario)));

    std::vector<TaskAudit> audits;
    for (const auto& task : suite.all_tasks()) {
        TaskAudit audit;
        audit.task = task.id;
        if (task.infeasible) {
            audit.feasible = false;
            audit.detail = "declared infeasible";
            audits.push_back(audit);
            continue;
        }
        const WorldState& canonical = scenario_cache.at(task.scenario);
        // Goals are achieved in order (the initial tree is a Sequence), so the
        // audit solves them sequentially over the union action space.
        auto seq_bfs_sum = [&](const WorldState& start) -> std::optional<int> {
            WorldState cur = start;
            int total = 0;
            for (const auto& goal : task.goals) {
                auto plan = bfs_shortest(cur, cur.robot_order, goal_test(goal), 25);
                if (!plan) return std::nullopt;
                total += static_cast<int>(plan->size());
                for (const auto& step : *plan) apply_action_inplace(cur, step.robot, step.action);
            }
            return total;
        };
        std::optional<int> min_steps = seq_bfs_sum(canonical);
        bool all_solvable = min_steps.has_value();
        for (int trial = 0; trial < options.trials && all_solvable; ++trial) {
            WorldState world = randomize_initial(canonical, trial_seed(options.base_seed, task.id, trial));
            auto steps = seq_bfs_sum(world);
            if (!steps) {
                all_solvable = false;
                audit.detail = "unsolvable under trial seed " + std::to_string(trial);
                break;
            }
            min_steps = std::min(*min_steps, *steps);
        }
        audit.feasible = all_solvable;
        if (all_solvable) {
            audit.min_steps = *min_steps;
            if (task.expected_min_steps > *min_steps)
                audit.detail = "declared expected_min_steps " + std::to_string(task.expected_min_steps) +
                               " exceeds audited minimum " + std::to_string(*min_steps);
        }
        audits.push_back(audit);
    }
    return audits;
}

}  // namespace btfleet
