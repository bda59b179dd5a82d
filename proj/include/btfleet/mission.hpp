#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btfleet/planning.hpp"
#include "btfleet/tree.hpp"
#include "btfleet/world.hpp"

namespace btfleet {

enum class MissionStatus { AllGoalsMet, CannotComplete, TickBudgetExhausted };
std::string to_string(MissionStatus s);

// One trace line. Fields are the trace contract: traces are compared
// byte-wise in golden tests after seed fixing.
struct TraceEntry {
    int tick = 0;
    std::string robot;  // robot id, or "alex" for allocator entries
    std::string status;
    std::string failed_predicate;
    std::string decision;
    int queue_len = 0;
};

std::string to_string(const TraceEntry& e);

struct MissionTrace {
    std::vector<TraceEntry> entries;
    MissionStatus terminal = MissionStatus::TickBudgetExhausted;
    int ticks = 0;
    int actions_executed = 0;
    int delegations = 0;
    int local_decisions = 0;
    bool used_fallback = false;

    std::string text() const;
};

// FIFO failure queue with (robot, node) dedupe among unresolved records.
class FailureQueue {
  public:
    // Appends unless an unresolved record for the same (robot, node) exists.
    void report(FailureRecord record);
    // First unresolved record (Algorithm head), if any.
    FailureRecord* head();
    // First unresolved, undispatched record whose node is its robot's current
    // blocking condition. Dispatched records park until their predicate
    // re-checks true; records waiting behind an active recovery stay queued.
    FailureRecord* next_eligible(const std::map<std::string, int>& blockers);
    std::vector<FailureRecord*> unresolved();
    int unresolved_count() const;
    int unresolved_count_for(const std::string& robot) const;
    const std::vector<FailureRecord>& records() const { return records_; }

  private:
    std::vector<FailureRecord> records_;
};

struct MissionConfig {
    int max_ticks = 200;
    int planner_depth = 20;
    // Observation radius override: <-2 none, -1 unlimited, >=0 cells.
    int radius_override = -2;
};

// Per-mission recorder for planner/BFS cross-checks (acceptance suite).
struct DispatchRecord {
    WorldState planning_view;
    Predicate goal;
    std::vector<ActionInstance> plan;
    AssignMode mode;
    std::string robot;
    bool optimistic = false;
};

// One allocator step over the queue: dispatch the first eligible record
// through the planner and apply the resulting tree update. Returns false
// when the planner answered None (mission cannot complete).
bool step_allocator(FailureQueue& queue, PlannerPort& planner, std::map<std::string, BehaviorTree>& trees,
                    const std::map<std::string, Observation>& observations, const WorldState& world,
                    const std::map<std::string, int>& blockers, int planner_depth, MissionTrace& trace,
                    int tick, std::vector<DispatchRecord>* dispatch_log = nullptr);

// The closed loop: seed the queue with unsatisfied goal conditions, then per
// tick run the allocator, tick every robot round-robin (at most one executed
// action per robot per tick), collect new failures, and re-check dispatched
// records against the requesting robot's view.
MissionTrace run_mission(WorldState& world, std::map<std::string, BehaviorTree>& trees,
                         PlannerPort& planner, int max_ticks, const MissionConfig& config = {},
                         std::vector<DispatchRecord>* dispatch_log = nullptr);

// Builds the tree set for a task: the owner gets the goal tree (tree id 1),
// everyone else an idle placeholder.
std::map<std::string, BehaviorTree> build_mission_trees(const WorldState& world,
                                                        const std::vector<Predicate>& goals,
                                                        const std::string& owner);

// Owner = agent of the first goal carrying one; falls back to the first
// robot whose class matches the first goal's label.
std::string derive_owner(const WorldState& world, const std::vector<Predicate>& goals);

}  // namespace btfleet
