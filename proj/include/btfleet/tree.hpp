#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "btfleet/capability.hpp"
#include "btfleet/predicate.hpp"
#include "btfleet/world.hpp"

namespace btfleet {

enum class NodeStatus { Success, Failure, Running };
std::string to_string(NodeStatus s);

enum class NodeKind { Sequence, Fallback, Parallel, Condition, Action, CallHelp };
std::string to_string(NodeKind k);

// Tree node. Control nodes own ordered children; leaves carry a predicate
// (Condition, CallHelp) or a grounded action.
struct BTNode {
    int id = 0;
    NodeKind kind = NodeKind::Sequence;
    int threshold = 0;  // Parallel success threshold M, 1 <= M <= children
    std::optional<Predicate> predicate;
    std::optional<ActionInstance> action;
    std::vector<BTNode> children;
};

BTNode make_sequence(std::vector<BTNode> children);
BTNode make_fallback(std::vector<BTNode> children);
BTNode make_parallel(int threshold, std::vector<BTNode> children);
BTNode make_condition(Predicate p);
BTNode make_action(ActionInstance a);
BTNode make_call_help(Predicate p);

struct BehaviorTree {
    int tree_id = 1;
    std::string owner;
    BTNode root;
    int next_id = 1;

    int fresh_id() { return next_id++; }
};

struct ActionOutcome {
    NodeStatus status = NodeStatus::Success;
    bool executed = false;  // true when the effector actually ran the action
};
using Effector = std::function<ActionOutcome(const BTNode&, const ActionInstance&)>;

struct TickResult {
    NodeStatus status = NodeStatus::Success;
    std::optional<std::pair<int, Predicate>> failed_node;
    std::optional<ActionInstance> executed_action;
};

struct TickStats {
    int leaf_evaluations = 0;
    int condition_evaluations = 0;
    int action_invocations = 0;
};

// Renumbers every node of `node` with fresh ids from the tree counter.
void reindex(BehaviorTree& tree, BTNode& node);

// Throws MalformedTree on any structural violation (duplicate ids, childless
// control nodes, leaves with children, bad parallel thresholds, missing
// payloads). A tree is validated before every tick.
void validate_tree(const BehaviorTree& tree);

// One tick: depth-first, left to right. Sequence fails on the first failing
// child and runs on the first running child; Fallback is the mirror image;
// Parallel ticks every child and resolves by threshold. Condition and
// CallHelp leaves evaluate their predicate against the observation (unknown
// entities read as false); a CallHelp whose predicate is unmet reports
// Failure and surfaces the predicate. Action leaves go through the effector.
TickResult tick(BehaviorTree& tree, const Observation& obs, const Effector& effector,
                TickStats* stats = nullptr);

// Sequence of Condition leaves over the goal predicates, tree_id 1.
BehaviorTree build_initial_tree(const std::vector<Predicate>& goal_predicates, const std::string& owner);

// Idle placeholder: a single always-true condition.
BehaviorTree build_idle_tree(const std::string& owner, int tree_id);

// Recovery subtree Fallback(Condition(goal), Sequence(conditions and actions)).
// Each action contributes condition leaves for the preconditions that no
// earlier action in the chain guarantees, then its Action leaf. The last
// action's post set must contain the goal.
BTNode bt_extension(const Predicate& goal, const std::vector<ActionInstance>& actions);

// Replaces the Condition/CallHelp leaf `target_node` with `subtree` in place
// (same parent, same child position). Inserted nodes get fresh ids.
void bt_melt(BehaviorTree& tree, int target_node, BTNode subtree);

// Re-roots the tree as Sequence(subtree, old_root) so the delegated recovery
// runs first each tick. Returns the id of the inserted subtree's root.
int insert_priority_subtree(BehaviorTree& tree, BTNode subtree);

// Removes a spent priority subtree inserted by insert_priority_subtree.
void remove_priority_subtree(BehaviorTree& tree, int subtree_root_id);

// Swaps a Condition leaf to CallHelp in place, keeping its id and predicate.
void convert_to_call_help(BehaviorTree& tree, int node_id);

const BTNode* find_node(const BTNode& root, int id);
int count_nodes(const BTNode& root);

// Stable text form: one node per line, two-space indentation per depth,
// leaves annotated with their predicate or action.
std::string to_text(const BehaviorTree& tree);

}  // namespace btfleet
