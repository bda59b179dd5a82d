// Command-line front end: benchmark runs, suite audits, metric computation,
// transcript fixture generation.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "btfleet/benchmark.hpp"

using namespace btfleet;

namespace {

struct RunArgs {
    std::string suite_path;
    std::string planner = "oracle";
    int trials = 5;
    uint64_t seed = 42;
    std::string llm_mode = "replay";
    std::string transcripts = "fixtures/transcripts";
    std::string out_dir;
    int jobs = 1;
    int max_ticks = 200;
    int mcts_budget = 500;
    int mcts_depth = 20;
};

BenchmarkOptions to_options(const RunArgs& args) {
    BenchmarkOptions options;
    options.trials = args.trials;
    options.base_seed = args.seed;
    options.jobs = args.jobs;
    options.max_ticks = args.max_ticks;
    options.mcts_budget = args.mcts_budget;
    options.mcts_depth = args.mcts_depth;
    options.llm = LlmOptions::from_env(llm_mode_from_string(args.llm_mode), args.transcripts);
    return options;
}

int cmd_run(const RunArgs& args) {
    const Suite suite = load_suite(args.suite_path);
    const BenchmarkReport report = run_benchmark(suite, args.planner, to_options(args));
    if (!args.out_dir.empty()) emit_report(report, args.out_dir);
    std::cout << report.to_text();
    return 0;
}

int cmd_validate(const RunArgs& args) {
    const Suite suite = load_suite(args.suite_path);
    const auto audits = audit_suite(suite, to_options(args));
    bool ok = true;
    for (const auto& a : audits) {
        std::cout << a.task << " " << (a.feasible ? "feasible" : "INFEASIBLE") << " min_steps="
                  << a.min_steps;
        if (!a.detail.empty()) std::cout << " (" << a.detail << ")";
        std::cout << "\n";
        if (!a.feasible && a.detail != "declared infeasible") ok = false;
        if (a.detail.find("exceeds audited minimum") != std::string::npos) ok = false;
    }
    std::cout << (ok ? "suite ok\n" : "suite has problems\n");
    return ok ? 0 : 1;
}

int cmd_metrics(const std::string& from) {
    std::ifstream in(from);
    if (!in) throw IoError("cannot open '" + from + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j = nlohmann::json::parse(ss.str());
    const nlohmann::json outcomes_json = j.is_array() ? j : j.at("outcomes");

    std::map<std::string, std::vector<std::pair<bool, double>>> by_group;
    for (const auto& oj : outcomes_json) {
        const std::string group = oj.value("group", "all");
        by_group[group].push_back(
            {oj.at("success").get<bool>(), oj.at("ticks").get<double>()});
    }
    for (const auto& [group, outcomes] : by_group) {
        const GroupMetrics m = compute_metrics(outcomes);
        std::cout << group << " SR=" << format_percent(m.sr) << "%"
                  << " AS=" << (m.as ? format_steps(*m.as) : "-") << " n=" << m.n
                  << " n_success=" << m.n_success << "\n";
    }
    return 0;
}

int cmd_gen_fixtures(const RunArgs& args_in) {
    // Record-mode runs with the builtin responder populate the transcript
    // store through the real prompt builder and response grammar.
    RunArgs args = args_in;
    args.jobs = 1;
    args.llm_mode = "record";
    const Suite suite = load_suite(args.suite_path);
    BenchmarkOptions options = to_options(args);
    options.llm.endpoint = "builtin:oracle";
    options.keep_traces = false;
    std::cout << "recording assignment and goal transcripts...\n";
    run_benchmark(suite, "llm", options);
    std::cout << "recording prior transcripts...\n";
    run_benchmark(suite, "llm-mcts", options);
    std::cout << "transcripts written under " << options.llm.transcript_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavior-tree fleet coordinator and benchmark harness"};
    app.set_config("--config", "", "read options from a config file (flags override)");
    app.require_subcommand(1);

    RunArgs args;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--suite", args.suite_path, "suite file")->required();
        cmd->add_option("--trials", args.trials, "trials per task");
        cmd->add_option("--seed", args.seed, "base seed");
        cmd->add_option("--max-ticks", args.max_ticks, "tick budget per mission");
        cmd->add_option("--mcts-budget", args.mcts_budget, "rollouts per decision");
        cmd->add_option("--mcts-depth", args.mcts_depth, "search depth cap");
        cmd->add_option("--transcripts", args.transcripts, "transcript store directory");
    };

    CLI::App* run = app.add_subcommand("run", "run a benchmark suite");
    add_common(run);
    run->add_option("--planner", args.planner, "oracle|mcts|llm|llm-mcts");
    run->add_option("--llm-mode", args.llm_mode, "live|record|replay");
    run->add_option("--out", args.out_dir, "report/trace output directory");
    run->add_option("--jobs", args.jobs, "parallel trial workers (1 = serial)");

    CLI::App* validate = app.add_subcommand("validate", "feasibility audit for a suite");
    add_common(validate);

    std::string metrics_from;
    CLI::App* metrics = app.add_subcommand("metrics", "compute SR/AS from an outcomes file");
    metrics->add_option("--from", metrics_from, "report.json or outcome array")->required();

    CLI::App* gen = app.add_subcommand("gen-fixtures", "regenerate replay transcripts for a suite");
    add_common(gen);

    CLI::App* dump = app.add_subcommand("dump-capabilities", "print the canonical action library");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(args);
        if (validate->parsed()) return cmd_validate(args);
        if (metrics->parsed()) return cmd_metrics(metrics_from);
        if (gen->parsed()) return cmd_gen_fixtures(args);
        if (dump->parsed()) {
            std::cout << canonical_library_text();
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
