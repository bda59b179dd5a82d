#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "btfleet/planning.hpp"

namespace btfleet {

// Optional rollout bias: relative weight for an applicable action (blended
// half-and-half with the uniform policy). Nullptr = uniform rollouts.
using RolloutPrior = std::function<double(const ActionInstance&)>;

struct MctsConfig {
    int budget = 500;  // simulations per decision
    int depth = 20;    // maximum search depth (tree + rollout)
    uint64_t seed = 0;
    RolloutPrior prior;  // empty = uniform
};

// UCT over the joint grounded action space of every robot in `world`.
// Reward 1 at goal states, 0 otherwise; uniform random applicable-action
// rollouts; exploration constant sqrt(2). Returns the shortest goal-reaching
// action sequence seen across all simulations (trimmed at the step the goal
// first holds), or nullopt when no simulation reached the goal.
// Deterministic given identical (world, goal, config).
std::optional<std::vector<ActionInstance>> mcts_plan(const WorldState& world, const Predicate& goal,
                                                     const MctsConfig& config);

// Baseline planner: plans the failed predicate directly on the full world
// snapshot, accepts only single-robot goal-reaching sequences (a decision
// names one robot), no recovery cascade.
class MctsPlanner : public PlannerPort {
  public:
    MctsPlanner(int budget, int depth, uint64_t seed, RolloutPrior prior = nullptr,
                std::string planner_name = "mcts")
        : budget_(budget), depth_(depth), seed_(seed), prior_(std::move(prior)),
          name_(std::move(planner_name)) {}

    std::string name() const override { return name_; }
    bool plans_on_full_world() const override { return true; }
    std::optional<AssignmentDecision> propose(const FailureRecord& failure,
                                              const PlannerContext& ctx) override;

  private:
    int budget_;
    int depth_;
    uint64_t seed_;
    RolloutPrior prior_;
    std::string name_;
};

}  // namespace btfleet
