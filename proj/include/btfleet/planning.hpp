#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btfleet/capability.hpp"
#include "btfleet/predicate.hpp"
#include "btfleet/world.hpp"

namespace btfleet {

// A condition that failed during execution, queued for the allocator.
struct FailureRecord {
    std::string robot;
    int node = 0;
    Predicate predicate;
    int tick = 0;
    bool resolved = false;
    bool dispatched = false;
    // Delegation bookkeeping: which tree carries the recovery subtree.
    std::string delegate_robot;
    int delegate_subtree = 0;
    std::string decision_note;
};

enum class AssignMode { Local, Delegated };
std::string to_string(AssignMode m);

// The allocator's answer for one failure: who recovers, with which action
// sequence, targeting which predicate (equal to the failed predicate for
// Local, a delegate-vocabulary predicate that entails it for Delegated).
struct AssignmentDecision {
    std::string chosen_robot;
    std::vector<ActionInstance> actions;
    AssignMode mode = AssignMode::Local;
    std::string rationale;
    Predicate subtree_goal;
    // A single capable action inserted with its unmet preconditions as
    // condition leaves; those failures recurse through the queue.
    bool optimistic = false;
};

std::string to_string(const AssignmentDecision& d);

struct PlannerContext {
    std::map<std::string, Observation> observations;
    WorldState merged;                            // union of all observations
    const WorldState* world_snapshot = nullptr;   // full state; baseline privilege
    std::map<std::string, int> pending_counts;    // unresolved failures per robot
    uint64_t seed = 0;
    int max_depth = 20;
};

struct PlannerPort {
    virtual ~PlannerPort() = default;
    virtual std::string name() const = 0;
    // nullopt only when no plan visible to this implementation exists.
    virtual std::optional<AssignmentDecision> propose(const FailureRecord& failure,
                                                      const PlannerContext& ctx) = 0;
    // Whether plans are validated against the full world instead of the
    // merged observations.
    virtual bool plans_on_full_world() const { return false; }
};

// Container goals normalize to the container entity so unification and
// extension guards line up (ContainOpen over an object inside a box becomes
// ContainOpen over the box).
Predicate resolve_goal(const Predicate& goal, const WorldState& view);

// All grounded instances of a template for one robot over the view's
// entities, deterministically ordered. Structural filters only (no
// applicability check): grab targets must be movable, containers must be
// containers, put surfaces must be surfaces or locations.
std::vector<ActionInstance> enumerate_groundings(const ActionTemplate& tmpl, const std::string& robot,
                                                 const WorldState& view);

// True when every declared precondition of `a` holds in `view`.
bool action_applicable(const WorldState& view, const ActionInstance& a);

// Goal regression over declared post sets, depth-limited, minimal-length via
// iterative deepening; every candidate is forward-simulated before being
// returned. Empty vector = goal already holds. nullopt = no plan within
// max_depth.
std::optional<std::vector<ActionInstance>> backward_chain(const Predicate& goal,
                                                          const std::string& robot,
                                                          const WorldState& view, int max_depth);

// Exhaustive breadth-first search over grounded actions, the independent
// check for backward_chain and the feasibility audit. `robots` selects the
// action space (one robot = that robot's plans; several = joint, interleaved).
struct JointStep {
    std::string robot;
    ActionInstance action;
};
std::optional<std::vector<JointStep>> bfs_shortest(const WorldState& view,
                                                   const std::vector<std::string>& robots,
                                                   const std::function<bool(const WorldState&)>& goal,
                                                   int max_depth);

// Convenience goal test: the predicate holds as a fact.
std::function<bool(const WorldState&)> goal_test(const Predicate& p);

// Greedy plan compression: repeatedly drops any action whose removal keeps
// the remainder applicable and goal-reaching. Search-derived plans carry
// wandering no-op steps that would otherwise re-trigger under memoryless
// re-ticking.
std::vector<ActionInstance> compress_plan(const WorldState& view, std::vector<ActionInstance> plan,
                                          const std::function<bool(const WorldState&)>& goal);

// Throws PlannerContractViolation when a decision breaks its invariants:
// foreign actions, unknown templates, subtree goal missing from the final
// post set, or (for multi-action / delegated plans) a simulation from `view`
// that fails or does not entail the failed predicate.
void validate_decision(const AssignmentDecision& d, const FailureRecord& failure,
                       const WorldState& view);

// The deterministic oracle: (1) a full plan by the reporting robot for the
// predicate itself, (2) the smallest full plan by any robot (the reporter
// included) for a goal in that robot's vocabulary whose simulated outcome
// makes the failed predicate true, (3) an optimistic single capable action
// by a robot of the label's class, its unmet preconditions left as condition
// leaves for the recovery cascade.
class OraclePlanner : public PlannerPort {
  public:
    std::string name() const override { return "oracle"; }
    std::optional<AssignmentDecision> propose(const FailureRecord& failure,
                                              const PlannerContext& ctx) override;
};

// Step (2): candidates ordered by (plan length, reporter-first, pending
// failures, robot id).
std::optional<AssignmentDecision> best_assignment(const FailureRecord& failure,
                                                  const PlannerContext& ctx);

// Step (3).
std::optional<AssignmentDecision> optimistic_assignment(const FailureRecord& failure,
                                                        const PlannerContext& ctx);

}  // namespace btfleet
