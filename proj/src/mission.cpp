#include "btfleet/mission.hpp"

#include <algorithm>

namespace btfleet {

std::string to_string(MissionStatus s) {
    switch (s) {
        case MissionStatus::AllGoalsMet: return "AllGoalsMet";
        case MissionStatus::CannotComplete: return "CannotComplete";
        case MissionStatus::TickBudgetExhausted: return "TickBudgetExhausted";
    }
    return "?";
}

std::string to_string(const TraceEntry& e) {
    return "tick=" + std::to_string(e.tick) + " robot=" + e.robot + " status=" + e.status +
           " failed=" + e.failed_predicate + " decision=" + e.decision +
           " queue_len=" + std::to_string(e.queue_len);
}

std::string MissionTrace::text() const {
    std::string out;
    for (const auto& e : entries) out += to_string(e) + "\n";
    out += "terminal=" + to_string(terminal) + " ticks=" + std::to_string(ticks) +
           " actions=" + std::to_string(actions_executed) + "\n";
    return out;
}

void FailureQueue::report(FailureRecord record) {
    for (const auto& r : records_)
        if (!r.resolved && r.robot == record.robot && r.node == record.node) return;
    records_.push_back(std::move(record));
}

FailureRecord* FailureQueue::head() {
    for (auto& r : records_)
        if (!r.resolved) return &r;
    return nullptr;
}

FailureRecord* FailureQueue::next_eligible(const std::map<std::string, int>& blockers) {
    for (auto& r : records_) {
        if (r.resolved || r.dispatched) continue;
        auto it = blockers.find(r.robot);
        if (it == blockers.end() || it->second != r.node) continue;
        return &r;
    }
    return nullptr;
}

std::vector<FailureRecord*> FailureQueue::unresolved() {
    std::vector<FailureRecord*> out;
    for (auto& r : records_)
        if (!r.resolved) out.push_back(&r);
    return out;
}

int FailureQueue::unresolved_count() const {
    int n = 0;
    for (const auto& r : records_) n += !r.resolved;
    return n;
}

int FailureQueue::unresolved_count_for(const std::string& robot) const {
    int n = 0;
    for (const auto& r : records_) n += !r.resolved && r.robot == robot;
    return n;
}

std::string derive_owner(const WorldState& world, const std::vector<Predicate>& goals) {
    if (goals.empty()) throw EmptyGoal("cannot derive an owner without goals");
    for (const auto& g : goals)
        if (!g.agent.empty()) return g.agent;
    const auto cls = class_of_label(goals.front().label);
    if (cls)
        for (const auto& id : world.robot_order)
            if (world.robots.at(id).cls == *cls) return id;
    if (world.robot_order.empty()) throw ConfigError("scenario has no robots");
    return world.robot_order.front();
}

std::map<std::string, BehaviorTree> build_mission_trees(const WorldState& world,
                                                        const std::vector<Predicate>& goals,
                                                        const std::string& owner) {
    if (!world.robots.count(owner)) throw UnknownEntity("owner robot '" + owner + "'");
    std::map<std::string, BehaviorTree> trees;
    trees.emplace(owner, build_initial_tree(goals, owner));
    int next_tree_id = 2;
    for (const auto& id : world.robot_order) {
        if (id == owner) continue;
        trees.emplace(id, build_idle_tree(id, next_tree_id++));
    }
    return trees;
}

namespace {

Observation observe_with_override(const WorldState& world, const std::string& robot,
                                  const MissionConfig& config, int tick) {
    Observation obs = config.radius_override >= -1 ? observe(world, robot, config.radius_override)
                                                   : observe(world, robot);
    obs.tick = tick;
    return obs;
}

// The one-action-per-tick effector: post-satisfied actions succeed without
// executing, the single per-robot action budget gates execution, and
// multi-tick actions report Running until their duration elapses. The
// observation is re-taken after every execution so conditions later in the
// same tick see the robot's own effects.
struct RobotExecutor {
    WorldState& world;
    const std::string robot;
    Observation& obs;
    const MissionConfig& config;
    int budget = 1;
    int* actions_executed;
    // Multi-tick progress: node id -> ticks remaining.
    std::map<int, int>& durations;
    const std::map<std::string, int>& duration_overrides;

    ActionOutcome operator()(const BTNode& node, const ActionInstance& action) {
        bool post_done = !action.post.empty();
        for (const auto& p : action.post)
            if (!holds_or_unknown_false(obs.view, p)) {
                post_done = false;
                break;
            }
        if (post_done) return {NodeStatus::Success, false};
        if (budget <= 0) return {NodeStatus::Running, false};

        // Effectors verify as facts that the action can run and deliver its
        // declared effects; a violation is an ordinary runtime Failure, not
        // an engine bug.
        if (!action_applicable(world, action)) return {NodeStatus::Failure, false};

        int total = action.duration_ticks;
        if (auto it = duration_overrides.find(action.template_name); it != duration_overrides.end())
            total = it->second;
        auto [dit, inserted] = durations.emplace(node.id, total);
        --budget;
        ++*actions_executed;
        if (--dit->second > 0) return {NodeStatus::Running, true};
        durations.erase(dit);
        try {
            apply_action_inplace(world, robot, action);
        } catch (const PreconditionViolated&) {
            return {NodeStatus::Failure, false};
        }
        const int tick_stamp = obs.tick;
        obs = config.radius_override >= -1 ? observe(world, robot, config.radius_override)
                                           : observe(world, robot);
        obs.tick = tick_stamp;
        return {NodeStatus::Success, true};
    }
};

}  // namespace

bool step_allocator(FailureQueue& queue, PlannerPort& planner, std::map<std::string, BehaviorTree>& trees,
                    const std::map<std::string, Observation>& observations, const WorldState& world,
                    const std::map<std::string, int>& blockers, int planner_depth, MissionTrace& trace,
                    int tick, std::vector<DispatchRecord>* dispatch_log) {
    FailureRecord* record = queue.next_eligible(blockers);
    if (!record) return true;

    PlannerContext ctx;
    ctx.observations = observations;
    ctx.merged = merge_observations(observations);
    ctx.world_snapshot = &world;
    ctx.max_depth = planner_depth;
    for (const auto& [id, tree] : trees) ctx.pending_counts[id] = queue.unresolved_count_for(id);

    std::optional<AssignmentDecision> decision = planner.propose(*record, ctx);

    TraceEntry entry;
    entry.tick = tick;
    entry.robot = "alex";
    entry.status = "-";
    entry.failed_predicate = to_string(record->predicate);
    entry.queue_len = queue.unresolved_count();

    if (!decision) {
        entry.decision = "none";
        trace.entries.push_back(entry);
        return false;
    }

    const WorldState& validation_view = planner.plans_on_full_world() ? world : ctx.merged;
    validate_decision(*decision, *record, validation_view);

    if (dispatch_log && !decision->actions.empty())
        dispatch_log->push_back({validation_view, decision->subtree_goal, decision->actions,
                                 decision->mode, decision->chosen_robot, decision->optimistic});

    if (decision->mode == AssignMode::Local) {
        if (!decision->actions.empty()) {
            BTNode subtree = bt_extension(decision->subtree_goal, decision->actions);
            if (!(decision->subtree_goal == record->predicate)) {
                // The plan targets a fact-equivalent goal in the robot's own
                // vocabulary; the replaced condition stays authoritative so a
                // divergence between simulation and execution re-surfaces it.
                subtree = make_fallback(
                    {make_condition(record->predicate),
                     make_sequence({std::move(subtree), make_condition(record->predicate)})});
            }
            bt_melt(trees.at(record->robot), record->node, std::move(subtree));
        }
        ++trace.local_decisions;
    } else {
        // The requester's node turns into the dedicated call-help leaf and
        // keeps being re-checked; the delegate gets the recovery subtree with
        // execution priority.
        convert_to_call_help(trees.at(record->robot), record->node);
        BTNode subtree = bt_extension(decision->subtree_goal, decision->actions);
        record->delegate_robot = decision->chosen_robot;
        record->delegate_subtree = insert_priority_subtree(trees.at(decision->chosen_robot), std::move(subtree));
        ++trace.delegations;
    }
    if (decision->rationale.find("fallback") != std::string::npos) trace.used_fallback = true;

    record->dispatched = true;
    record->decision_note = to_string(*decision);
    entry.decision = record->decision_note;
    trace.entries.push_back(entry);
    return true;
}

MissionTrace run_mission(WorldState& world, std::map<std::string, BehaviorTree>& trees,
                         PlannerPort& planner, int max_ticks, const MissionConfig& config,
                         std::vector<DispatchRecord>* dispatch_log) {
    if (max_ticks < 1) throw ConfigError("max_ticks must be >= 1");
    for (auto& [id, tree] : trees) validate_tree(tree);

    MissionTrace trace;
    FailureQueue queue;
    std::map<std::string, int> blockers;  // robot -> blocking condition node

    // Unsatisfied goal conditions seed the queue before the first tick; a dry
    // tick (actions deferred) marks each robot's initial blocking condition.
    for (auto& [robot, tree] : trees) {
        std::vector<std::pair<int, Predicate>> leaves;
        std::function<void(const BTNode&)> collect = [&](const BTNode& node) {
            if (node.kind == NodeKind::Condition && node.predicate->label != Label::AlwaysTrue)
                leaves.push_back({node.id, *node.predicate});
            for (const auto& c : node.children) collect(c);
        };
        collect(tree.root);
        const Observation obs = observe_with_override(world, robot, config, 0);
        for (const auto& [node_id, predicate] : leaves)
            if (!holds_or_unknown_false(obs.view, predicate))
                queue.report({robot, node_id, predicate, 0});
        TickResult dry = tick(tree, obs, [](const BTNode&, const ActionInstance&) {
            return ActionOutcome{NodeStatus::Running, false};
        });
        if (dry.failed_node) blockers[robot] = dry.failed_node->first;
    }

    std::map<int, int> action_progress;

    for (int tick_no = 1; tick_no <= max_ticks; ++tick_no) {
        trace.ticks = tick_no;
        run_scripted_events(world, tick_no);

        std::map<std::string, Observation> observations;
        for (const auto& id : world.robot_order)
            observations.emplace(id, observe_with_override(world, id, config, tick_no));

        if (!step_allocator(queue, planner, trees, observations, world, blockers, config.planner_depth,
                            trace, tick_no, dispatch_log)) {
            trace.terminal = MissionStatus::CannotComplete;
            return trace;
        }

        bool all_roots_success = true;
        for (const auto& robot : world.robot_order) {
            BehaviorTree& tree = trees.at(robot);
            Observation obs = observe_with_override(world, robot, config, tick_no);
            RobotExecutor executor{world, robot, obs, config, 1, &trace.actions_executed,
                                   action_progress, world.action_durations};
            TickResult result = tick(tree, obs, std::ref(executor));

            TraceEntry entry;
            entry.tick = tick_no;
            entry.robot = robot;
            entry.status = to_string(result.status);
            if (result.failed_node) entry.failed_predicate = to_string(result.failed_node->second);
            if (result.executed_action) entry.decision = "exec " + to_string(*result.executed_action);
            entry.queue_len = queue.unresolved_count();
            trace.entries.push_back(entry);

            if (result.status != NodeStatus::Success) all_roots_success = false;
            if (result.failed_node) {
                blockers[robot] = result.failed_node->first;
                queue.report({robot, result.failed_node->first, result.failed_node->second, tick_no});
            } else {
                blockers.erase(robot);
            }
        }

        // Re-check every unresolved record against its requester's fresh
        // view; resolution retires the record and, for delegations, the
        // delegate's priority subtree once its job is done.
        for (FailureRecord* record : queue.unresolved()) {
            const Observation obs = observe_with_override(world, record->robot, config, tick_no);
            if (!holds_or_unknown_false(obs.view, record->predicate)) continue;
            record->resolved = true;
            if (!record->delegate_robot.empty()) {
                remove_priority_subtree(trees.at(record->delegate_robot), record->delegate_subtree);
                TraceEntry entry;
                entry.tick = tick_no;
                entry.robot = "alex";
                entry.status = "-";
                entry.failed_predicate = to_string(record->predicate);
                entry.decision = "resolved:" + record->robot + " delegate-subtree-retired";
                entry.queue_len = queue.unresolved_count();
                trace.entries.push_back(entry);
            }
        }

        if (queue.unresolved_count() == 0 && all_roots_success) {
            trace.terminal = MissionStatus::AllGoalsMet;
            return trace;
        }
    }
    trace.terminal = MissionStatus::TickBudgetExhausted;
    return trace;
}

}  // namespace btfleet
