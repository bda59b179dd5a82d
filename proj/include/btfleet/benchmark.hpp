#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btfleet/llm.hpp"
#include "btfleet/mission.hpp"
#include "btfleet/planning.hpp"

namespace btfleet {

struct TaskSpec {
    std::string id;          // e.g. G1-T07
    std::string group;
    std::string scenario;    // path, resolved against the suite file's directory
    std::string instruction;
    std::vector<Predicate> goals;  // authoritative; the instruction feeds llm mode
    int expected_min_steps = 1;
    bool infeasible = false;
};

struct SuiteGroup {
    std::string id;
    std::string scenario;
    std::vector<TaskSpec> tasks;
};

struct Suite {
    std::string name;
    std::string base_dir;
    std::map<std::string, std::string> config;
    std::vector<SuiteGroup> groups;

    std::vector<TaskSpec> all_tasks() const;
};

Suite load_suite(const std::string& path);

struct TrialOutcome {
    std::string group;
    std::string task;
    int trial = 0;
    bool success = false;
    int ticks = 0;
    std::string terminal;
    int delegations = 0;
    std::string trace_text;
};

struct GroupMetrics {
    double sr = 0.0;                // successes / outcomes
    std::optional<double> as;       // mean ticks over successes; empty when none
    int n = 0;
    int n_success = 0;
};

// SR = (sum s_i)/N; AS = (sum k_i over successes)/N_success. Throws
// EmptyOutcomes for N = 0; AS is empty when nothing succeeded.
GroupMetrics compute_metrics(const std::vector<std::pair<bool, double>>& outcomes);

std::string format_percent(double sr);  // 0.95 -> "95"
std::string format_steps(double as);    // 3.947... -> "3.95"

struct BenchmarkOptions {
    int trials = 5;
    uint64_t base_seed = 42;
    int jobs = 1;       // >1 runs trials under OpenMP
    int max_ticks = 200;
    int mcts_budget = 500;
    int mcts_depth = 20;
    LlmOptions llm;     // used by llm / llm-mcts planners
    bool keep_traces = true;
    bool collect_dispatches = false;  // record planner dispatches for audits
};

struct BenchmarkReport {
    std::string suite;
    std::string planner;
    int trials = 0;
    uint64_t base_seed = 0;
    std::string config_digest;
    std::vector<TrialOutcome> outcomes;  // ordered by (group, task, trial)
    std::map<std::string, GroupMetrics> group_metrics;
    std::vector<DispatchRecord> dispatches;

    std::string to_json() const;
    std::string to_text() const;   // grid + summary, aligned plain text
};

std::unique_ptr<PlannerPort> make_planner(const std::string& name, uint64_t seed,
                                          const BenchmarkOptions& options,
                                          std::shared_ptr<LlmClient> client);

uint64_t trial_seed(uint64_t base_seed, const std::string& task_id, int trial);

// Runs every task x trial of the suite. The parallel runner and the serial
// reference produce byte-identical reports; trials are independent given
// their derived seeds and the reduction is ordered.
BenchmarkReport run_benchmark(const Suite& suite, const std::string& planner_name,
                              const BenchmarkOptions& options);
BenchmarkReport run_benchmark_serial(const Suite& suite, const std::string& planner_name,
                                     const BenchmarkOptions& options);

// Writes report.json, report.txt and per-trial traces under out_dir.
void emit_report(const BenchmarkReport& report, const std::string& out_dir);

struct TaskAudit {
    std::string task;
    bool feasible = false;
    int min_steps = 0;   // minimum over audited worlds of the per-goal BFS sum
    std::string detail;
};

// Feasibility audit: every non-infeasible task must be solvable goal-by-goal
// by BFS over the union action space, on the canonical world and on each
// trial world derived from the options' seed.
std::vector<TaskAudit> audit_suite(const Suite& suite, const BenchmarkOptions& options);

}  // namespace btfleet
