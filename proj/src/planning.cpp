#include "btfleet/planning.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace btfleet {

std::string to_string(AssignMode m) { return m == AssignMode::Local ? "local" : "delegated"; }

std::string to_string(const AssignmentDecision& d) {
    std::string out = to_string(d.mode) + ":" + d.chosen_robot + ":" + to_string(d.subtree_goal) + ":[";
    for (size_t i = 0; i < d.actions.size(); ++i) {
        if (i) out += " ";
        out += to_string(d.actions[i]);
    }
    out += "]";
    if (!d.rationale.empty()) out += ":" + d.rationale;
    return out;
}

Predicate resolve_goal(const Predicate& goal, const WorldState& view) {
    if (goal.label != Label::ArmContainOpen && goal.label != Label::ArmContainClose &&
        goal.label != Label::QuadContainOpen && goal.label != Label::QuadContainClose)
        return goal;
    auto it = view.objects.find(goal.subject);
    if (it == view.objects.end() || it->second.container || !it->second.in_container) return goal;
    Predicate resolved = goal;
    resolved.subject = *it->second.in_container;
    return resolved;
}

namespace {

std::vector<std::string> sorted_object_ids(const WorldState& view, bool movable_only,
                                           bool containers_only, bool surfaces_only) {
    std::vector<std::string> out;
    for (const auto& [id, o] : view.objects) {
        if (movable_only && (o.fixed || o.attached_to)) continue;
        if (containers_only && !o.container) continue;
        if (surfaces_only && !o.surface) continue;
        out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> slot_domain(const std::string& slot, const std::string& tmpl_name,
                                     const WorldState& view) {
    if (slot == "object") return sorted_object_ids(view, true, false, false);
    if (slot == "container") return sorted_object_ids(view, false, true, false);
    // The planning domain puts objects onto surfaces only; move targets may
    // be any object or location.
    if (tmpl_name == "PutOn") return sorted_object_ids(view, false, false, true);
    std::vector<std::string> out;
    for (const auto& [id, o] : view.objects) out.push_back(id);
    for (const auto& [id, loc] : view.locations) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

void complete_bindings(const ActionTemplate& tmpl, const std::string& robot, const WorldState& view,
                       std::map<std::string, std::string> partial, size_t slot_index,
                       std::vector<ActionInstance>& out) {
    if (slot_index == tmpl.slots.size()) {
        RobotClass cls = view.robots.at(robot).cls;
        out.push_back(ground(tmpl, robot, cls, partial));
        return;
    }
    const std::string& slot = tmpl.slots[slot_index];
    if (partial.count(slot)) {
        complete_bindings(tmpl, robot, view, std::move(partial), slot_index + 1, out);
        return;
    }
    for (const auto& entity : slot_domain(slot, tmpl.name, view)) {
        auto next = partial;
        next[slot] = entity;
        complete_bindings(tmpl, robot, view, std::move(next), slot_index + 1, out);
    }
}

bool structurally_valid(const ActionInstance& a, const WorldState& view) {
    for (const auto& [slot, entity] : a.bindings) {
        if (!entity_exists(view, entity)) return false;
        if (slot == "object") {
            auto it = view.objects.find(entity);
            if (it == view.objects.end() || it->second.fixed || it->second.attached_to) return false;
        }
        if (slot == "container") {
            auto it = view.objects.find(entity);
            if (it == view.objects.end() || !it->second.container) return false;
        }
        if (slot == "target" && a.template_name == "PutOn") {
            if (view.locations.count(entity)) continue;
            auto it = view.objects.find(entity);
            if (it == view.objects.end() || !it->second.surface) return false;
        }
    }
    // Self-referential moves (move to yourself) are never useful.
    if (a.bindings.count("target") && a.bindings.at("target") == a.robot) return false;
    return true;
}

}  // namespace

std::vector<ActionInstance> enumerate_groundings(const ActionTemplate& tmpl, const std::string& robot,
                                                 const WorldState& view) {
    std::vector<ActionInstance> out;
    complete_bindings(tmpl, robot, view, {}, 0, out);
    out.erase(std::remove_if(out.begin(), out.end(),
                             [&](const ActionInstance& a) { return !structurally_valid(a, view); }),
              out.end());
    return out;
}

bool action_applicable(const WorldState& view, const ActionInstance& a) {
    try {
        for (const auto& p : a.pre)
            if (!holds(view, p)) return false;
        // Effect-honesty, both ways: the action must make declared progress
        // (executors skip actions whose post already holds, so a plan step
        // that is a no-op by its own post set would never run), and applying
        // it must deliver the full declared post set (a ground move while
        // carrying can never make the no-object range condition true).
        bool progress = a.post.empty();
        for (const auto& p : a.post)
            if (!holds(view, p)) {
                progress = true;
                break;
            }
        if (!progress) return false;
        WorldState next = view;
        apply_action_inplace(next, a.robot, a);
        for (const auto& p : a.post)
            if (!holds(next, p)) return false;
    } catch (const Error&) {
        return false;
    }
    return true;
}

namespace {

// Plan validation mirrors the executor: a step whose full post set already
// holds is skipped, anything else must be applicable and must deliver its
// declared post set. `executed`, when given, receives the steps that
// actually ran.
std::optional<WorldState> simulate(const WorldState& start, const std::vector<ActionInstance>& plan,
                                   std::vector<ActionInstance>* executed = nullptr) {
    WorldState cur = start;
    for (const auto& a : plan) {
        try {
            bool post_done = !a.post.empty();
            for (const auto& p : a.post)
                if (!holds(cur, p)) {
                    post_done = false;
                    break;
                }
            if (post_done) continue;
            for (const auto& p : a.pre)
                if (!holds(cur, p)) return std::nullopt;
            apply_action_inplace(cur, a.robot, a);
            for (const auto& p : a.post)
                if (!holds(cur, p)) return std::nullopt;
        } catch (const Error&) {
            return std::nullopt;
        }
        if (executed) executed->push_back(a);
    }
    return cur;
}

// Achiever lookup for regression: executable post plus implied effects.
std::vector<const ActionTemplate*> achievers_for(const Predicate& goal, RobotClass cls) {
    std::vector<const ActionTemplate*> out;
    for (const auto& tmpl : registry_for(cls)) {
        auto matches = [&](const std::vector<PredSchema>& schemas) {
            for (const auto& s : schemas)
                if (s.label == goal.label && s.desired == goal.desired) return true;
            return false;
        };
        if (matches(tmpl.post) || matches(tmpl.post_implied)) out.push_back(&tmpl);
    }
    return out;
}

// Unify against post or post_implied (regression needs both).
std::optional<std::map<std::string, std::string>> unify_any(const ActionTemplate& tmpl,
                                                            const Predicate& goal,
                                                            const WorldState& view) {
    if (auto b = unify_goal(tmpl, goal, view)) return b;
    // post_implied entries carry no slots in the canonical library; accept
    // a bare label+desired match with empty bindings.
    for (const auto& s : tmpl.post_implied)
        if (s.label == goal.label && s.desired == goal.desired &&
            s.subject == SlotRef::None && s.target == SlotRef::None)
            return std::map<std::string, std::string>{};
    return std::nullopt;
}

struct RegressionSearch {
    const WorldState& view;
    const std::string& robot;
    RobotClass cls;
    long expansions = 0;
    long simulations = 0;
    // (pending, budget) states whose whole subtree produced no candidate at
    // all. Those dead ends are suffix-independent and safe to cache;
    // simulation-rejected candidates are not (a different suffix may pass).
    std::set<std::string> barren;
    static constexpr long kExpansionCap = 2'000'000;

    static std::string key(const std::vector<Predicate>& pending, int budget) {
        std::string k = std::to_string(budget) + "|";
        for (const auto& p : pending) k += to_string(p) + ";";
        return k;
    }

    bool pending_satisfied(const std::vector<Predicate>& pending) const {
        for (const auto& p : pending)
            if (!holds_or_unknown_false(view, p)) return false;
        return true;
    }

    // Builds the plan back to front; `suffix` holds the actions already
    // chosen, last action first.
    std::optional<std::vector<ActionInstance>> dfs(std::vector<Predicate> pending, int budget,
                                                   std::vector<ActionInstance>& suffix,
                                                   const Predicate& original_goal) {
        if (pending_satisfied(pending)) {
            ++simulations;
            std::vector<ActionInstance> plan(suffix.rbegin(), suffix.rend());
            std::vector<ActionInstance> executed;
            if (auto end = simulate(view, plan, &executed)) {
                // Steps the executor would skip never run; the plan is what
                // actually executes.
                if (holds_or_unknown_false(*end, original_goal)) return executed;
            }
            // A completed-but-rejected candidate; nothing deeper to explore
            // from an all-satisfied set (achievers must make progress).
            return std::nullopt;
        }
        if (budget == 0) return std::nullopt;
        if (++expansions > kExpansionCap) return std::nullopt;
        const std::string memo_key = key(pending, budget);
        if (barren.count(memo_key)) return std::nullopt;
        const long sims_before = simulations;

        // Branch over which pending goal the next-earlier action achieves;
        // goal order matters (a flight plan regresses the approach before
        // the takeoff).
        std::vector<const Predicate*> picks;
        for (const auto& p : pending)
            if (!holds_or_unknown_false(view, p)) picks.push_back(&p);

        for (const Predicate* pick : picks) {
            for (const ActionTemplate* tmpl : achievers_for(*pick, cls)) {
                auto partial = unify_any(*tmpl, *pick, view);
                if (!partial) continue;
                std::vector<ActionInstance> groundings;
                complete_bindings(*tmpl, robot, view, *partial, 0, groundings);
                for (auto& inst : groundings) {
                    if (!structurally_valid(inst, view)) continue;
                    if (!suffix.empty() && inst == suffix.back()) continue;
                    std::vector<Predicate> next;
                    auto provided = [&](const Predicate& p) {
                        return std::find(inst.post.begin(), inst.post.end(), p) != inst.post.end() ||
                               std::find(inst.post_implied.begin(), inst.post_implied.end(), p) !=
                                   inst.post_implied.end();
                    };
                    if (!provided(*pick)) continue;
                    for (const auto& p : pending)
                        if (!provided(p)) next.push_back(p);
                    for (const auto& p : inst.pre)
                        if (std::find(next.begin(), next.end(), p) == next.end()) next.push_back(p);
                    std::sort(next.begin(), next.end());
                    suffix.push_back(inst);
                    auto found = dfs(std::move(next), budget - 1, suffix, original_goal);
                    suffix.pop_back();
                    if (found) return found;
                }
            }
        }
        if (simulations == sims_before) barren.insert(memo_key);
        return std::nullopt;
    }
};

}  // namespace

std::optional<std::vector<ActionInstance>> backward_chain(const Predicate& goal0,
                                                          const std::string& robot,
                                                          const WorldState& view, int max_depth) {
    if (max_depth < 1) throw ConfigError("backward_chain: max_depth must be >= 1");
    auto robot_it = view.robots.find(robot);
    if (robot_it == view.robots.end()) return std::nullopt;
    const Predicate goal = resolve_goal(goal0, view);
    if (holds_or_unknown_false(view, goal)) return std::vector<ActionInstance>{};
    if (achievers_for(goal, robot_it->second.cls).empty()) return std::nullopt;

    RegressionSearch search{view, robot, robot_it->second.cls};
    for (int length = 1; length <= max_depth; ++length) {
        std::vector<ActionInstance> suffix;
        if (auto plan = search.dfs({goal}, length, suffix, goal)) return plan;
        if (search.expansions > RegressionSearch::kExpansionCap) break;
    }
    return std::nullopt;
}

std::function<bool(const WorldState&)> goal_test(const Predicate& p) {
    return [p](const WorldState& w) { return holds_or_unknown_false(w, p); };
}

// The guard a recovery subtree is built around: the goal itself when the
// final action declares it, otherwise the final action's primary effect (the
// goal was reached as a fact; the allocator keeps the original predicate
// authoritative around such extensions).
Predicate choose_subtree_goal(const std::vector<ActionInstance>& plan, const Predicate& goal) {
    const ActionInstance& last = plan.back();
    if (std::find(last.post.begin(), last.post.end(), goal) != last.post.end() ||
        std::find(last.post_implied.begin(), last.post_implied.end(), goal) !=
            last.post_implied.end())
        return goal;
    return last.post.front();
}

std::vector<ActionInstance> compress_plan(const WorldState& view, std::vector<ActionInstance> plan,
                                          const std::function<bool(const WorldState&)>& goal) {
    auto reaches_goal = [&](const std::vector<ActionInstance>& candidate) {
        auto end = simulate(view, candidate);
        return end && goal(*end);
    };
    auto without = [&](size_t i, size_t j) {
        std::vector<ActionInstance> candidate;
        for (size_t k = 0; k < plan.size(); ++k)
            if (k != i && k != j) candidate.push_back(plan[k]);
        return candidate;
    };
    bool shrunk = true;
    while (shrunk && !plan.empty()) {
        shrunk = false;
        for (size_t i = 0; i < plan.size() && !shrunk; ++i) {
            auto candidate = without(i, i);
            if (reaches_goal(candidate)) {
                plan = std::move(candidate);
                shrunk = true;
            }
        }
        // Detours that undo themselves (put down, pick back up) only vanish
        // as a pair.
        for (size_t i = 0; i < plan.size() && !shrunk; ++i) {
            for (size_t j = i + 1; j < plan.size() && !shrunk; ++j) {
                auto candidate = without(i, j);
                if (reaches_goal(candidate)) {
                    plan = std::move(candidate);
                    shrunk = true;
                }
            }
        }
    }
    return plan;
}

std::optional<std::vector<JointStep>> bfs_shortest(const WorldState& view,
                                                   const std::vector<std::string>& robots,
                                                   const std::function<bool(const WorldState&)>& goal,
                                                   int max_depth) {
    if (goal(view)) return std::vector<JointStep>{};
    struct Node {
        WorldState world;
        std::vector<JointStep> path;
    };
    std::deque<Node> frontier;
    std::set<std::string> visited{world_digest(view)};
    frontier.push_back({view, {}});
    while (!frontier.empty()) {
        Node cur = std::move(frontier.front());
        frontier.pop_front();
        if (static_cast<int>(cur.path.size()) >= max_depth) continue;
        for (const auto& robot : robots) {
            auto rit = cur.world.robots.find(robot);
            if (rit == cur.world.robots.end()) continue;
            for (const auto& tmpl : registry_for(rit->second.cls)) {
                for (const auto& inst : enumerate_groundings(tmpl, robot, cur.world)) {
                    if (!action_applicable(cur.world, inst)) continue;
                    WorldState next = cur.world;
                    try {
                        apply_action_inplace(next, robot, inst);
                    } catch (const Error&) {
                        continue;
                    }
                    if (!visited.insert(world_digest(next)).second) continue;
                    Node n{std::move(next), cur.path};
                    n.path.push_back({robot, inst});
                    if (goal(n.world)) return n.path;
                    frontier.push_back(std::move(n));
                }
            }
        }
    }
    return std::nullopt;
}

void validate_decision(const AssignmentDecision& d, const FailureRecord& failure,
                       const WorldState& view) {
    auto rit = view.robots.find(d.chosen_robot);
    if (rit == view.robots.end())
        throw PlannerContractViolation("unknown robot " + d.chosen_robot);
    if ((d.mode == AssignMode::Local) != (d.chosen_robot == failure.robot))
        throw PlannerContractViolation("mode inconsistent with chosen robot");
    for (const auto& a : d.actions) {
        if (a.robot != d.chosen_robot)
            throw PlannerContractViolation(to_string(a) + " does not belong to " + d.chosen_robot);
        if (!library().find(rit->second.cls, a.template_name))
            throw PlannerContractViolation(a.template_name + " not in the " +
                                           to_string(rit->second.cls) + " registry");
    }
    if (d.actions.empty()) {
        if (d.mode != AssignMode::Local)
            throw PlannerContractViolation("empty delegated plan");
        return;
    }
    const auto& final_action = d.actions.back();
    const bool in_post =
        std::find(final_action.post.begin(), final_action.post.end(), d.subtree_goal) !=
            final_action.post.end() ||
        std::find(final_action.post_implied.begin(), final_action.post_implied.end(),
                  d.subtree_goal) != final_action.post_implied.end();
    if (!in_post)
        throw PlannerContractViolation("final action does not achieve " + to_string(d.subtree_goal));
    if (d.optimistic) {
        if (d.actions.size() != 1)
            throw PlannerContractViolation("optimistic assignments are single-action");
    } else {
        auto end = simulate(view, d.actions);
        if (!end) throw PlannerContractViolation("plan does not replay: " + to_string(d));
        if (!holds_or_unknown_false(*end, failure.predicate))
            throw PlannerContractViolation("plan does not resolve " + to_string(failure.predicate));
    }
}

std::optional<AssignmentDecision> best_assignment(const FailureRecord& failure,
                                                  const PlannerContext& ctx) {
    const WorldState& merged = ctx.merged;
    struct Candidate {
        size_t plan_len;
        int is_peer;
        int pending;
        std::string robot;
        Predicate goal;
        std::vector<ActionInstance> plan;
    };
    std::optional<Candidate> best;
    auto better = [](const Candidate& a, const Candidate& b) {
        return std::tie(a.plan_len, a.is_peer, a.pending, a.robot) <
               std::tie(b.plan_len, b.is_peer, b.pending, b.robot);
    };
    // Single assignments cap below the global horizon; longer recoveries
    // emerge as cascades rather than one oversized plan.
    const int depth = std::min(ctx.max_depth, 8);

    std::vector<std::string> robots;
    for (const auto& [id, r] : merged.robots) robots.push_back(id);
    std::sort(robots.begin(), robots.end());

    for (const auto& robot : robots) {
        const RobotClass cls = merged.robots.at(robot).cls;
        std::vector<Label> labels;
        for (const auto& tmpl : registry_for(cls))
            for (const auto& s : tmpl.post)
                if (std::find(labels.begin(), labels.end(), s.label) == labels.end())
                    labels.push_back(s.label);
        for (const Label label : labels) {
            const LabelArity arity = arity_of(label);
            if (arity.subject && !arity.subject_optional && failure.predicate.subject.empty()) continue;
            std::vector<std::string> targets;
            if (arity.target) {
                // Candidate targets mirror the grounding domains, so every
                // candidate plan lives inside the shared search space.
                const std::string name = to_string(label);
                std::vector<std::string> domain;
                if (name.find("ObjectOnTarget") != std::string::npos) {
                    domain = sorted_object_ids(merged, false, false, true);  // surfaces
                } else if (name.find("ObjectInTarget") != std::string::npos) {
                    domain = sorted_object_ids(merged, false, true, false);  // containers
                } else {
                    for (const auto& [id, o] : merged.objects) domain.push_back(id);
                    for (const auto& [id, loc] : merged.locations) domain.push_back(id);
                    std::sort(domain.begin(), domain.end());
                }
                if (!failure.predicate.target.empty() &&
                    std::find(domain.begin(), domain.end(), failure.predicate.target) != domain.end())
                    targets.push_back(failure.predicate.target);
                for (const auto& id : domain)
                    if (id != failure.predicate.target) targets.push_back(id);
            } else {
                targets.push_back("");
            }
            for (const auto& target : targets) {
                Predicate q;
                q.label = label;
                if (arity.agent) q.agent = robot;
                if (arity.subject) q.subject = failure.predicate.subject;
                q.target = target;
                try {
                    validate_predicate(q);
                } catch (const InvalidPredicate&) {
                    continue;
                }
                if (holds_or_unknown_false(merged, q)) continue;
                auto plan = backward_chain(q, robot, merged, depth);
                if (!plan || plan->empty()) continue;
                if (best && plan->size() > best->plan_len) continue;
                auto end = simulate(merged, *plan);
                if (!end || !holds_or_unknown_false(*end, failure.predicate)) continue;
                Candidate c{plan->size(), robot == failure.robot ? 0 : 1, 0, robot,
                            choose_subtree_goal(*plan, resolve_goal(q, merged)), std::move(*plan)};
                auto pit = ctx.pending_counts.find(robot);
                c.pending = pit == ctx.pending_counts.end() ? 0 : pit->second;
                if (!best || better(c, *best)) best = std::move(c);
            }
        }
    }
    if (!best) return std::nullopt;
    AssignmentDecision d;
    d.chosen_robot = best->robot;
    d.actions = std::move(best->plan);
    d.mode = best->robot == failure.robot ? AssignMode::Local : AssignMode::Delegated;
    d.subtree_goal = best->goal;
    return d;
}

std::optional<AssignmentDecision> optimistic_assignment(const FailureRecord& failure,
                                                        const PlannerContext& ctx) {
    const WorldState& merged = ctx.merged;
    const Predicate goal = resolve_goal(failure.predicate, merged);
    const auto goal_cls = class_of_label(goal.label);
    if (!goal_cls) return std::nullopt;

    // The robot that attempts the capable action: the goal's own agent when
    // it matches the class, else the reporter, else the first classmate.
    std::string robot;
    if (!goal.agent.empty() && merged.robots.count(goal.agent) &&
        merged.robots.at(goal.agent).cls == *goal_cls)
        robot = goal.agent;
    else if (merged.robots.count(failure.robot) && merged.robots.at(failure.robot).cls == *goal_cls)
        robot = failure.robot;
    else
        for (const auto& [id, r] : merged.robots)
            if (r.cls == *goal_cls) {
                robot = id;
                break;
            }
    if (robot.empty()) return std::nullopt;

    std::optional<ActionInstance> chosen;
    int chosen_unmet = 0;
    for (const ActionTemplate* tmpl : capability_check(goal, *goal_cls, CatalogMode::Corrected)) {
        auto partial = unify_goal(*tmpl, goal, merged);
        if (!partial) continue;
        std::vector<ActionInstance> groundings;
        complete_bindings(*tmpl, robot, merged, *partial, 0, groundings);
        for (const auto& inst : groundings) {
            if (!structurally_valid(inst, merged)) continue;
            if (std::find(inst.post.begin(), inst.post.end(), goal) == inst.post.end()) continue;
            int unmet = 0;
            for (const auto& p : inst.pre)
                if (!holds_or_unknown_false(merged, p)) ++unmet;
            if (!chosen || unmet < chosen_unmet) {
                chosen = inst;
                chosen_unmet = unmet;
            }
        }
    }
    if (!chosen) return std::nullopt;
    AssignmentDecision d;
    d.chosen_robot = robot;
    d.actions = {*chosen};
    d.mode = robot == failure.robot ? AssignMode::Local : AssignMode::Delegated;
    d.subtree_goal = goal;
    d.optimistic = true;
    d.rationale = "optimistic";
    return d;
}

std::optional<AssignmentDecision> OraclePlanner::propose(const FailureRecord& failure,
                                                         const PlannerContext& ctx) {
    auto oit = ctx.observations.find(failure.robot);
    if (oit == ctx.observations.end()) return std::nullopt;
    const WorldState& view = oit->second.view;
    const Predicate goal = resolve_goal(failure.predicate, view);

    if (holds_or_unknown_false(view, goal)) {
        AssignmentDecision d;
        d.chosen_robot = failure.robot;
        d.mode = AssignMode::Local;
        d.subtree_goal = goal;
        d.rationale = "already-satisfied";
        return d;
    }
    if (auto plan = backward_chain(goal, failure.robot, view, ctx.max_depth)) {
        AssignmentDecision d;
        d.chosen_robot = failure.robot;
        d.subtree_goal = choose_subtree_goal(*plan, goal);
        d.actions = std::move(*plan);
        d.mode = AssignMode::Local;
        return d;
    }
    if (auto assigned = best_assignment(failure, ctx)) return assigned;
    return optimistic_assignment(failure, ctx);
}

}  // namespace btfleet
