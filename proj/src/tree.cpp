#include "btfleet/tree.hpp"

#include <algorithm>
#include <set>

namespace btfleet {

std::string to_string(NodeStatus s) {
    switch (s) {
        case NodeStatus::Success: return "Success";
        case NodeStatus::Failure: return "Failure";
        case NodeStatus::Running: return "Running";
    }
    return "?";
}

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Sequence: return "Sequence";
        case NodeKind::Fallback: return "Fallback";
        case NodeKind::Parallel: return "Parallel";
        case NodeKind::Condition: return "Condition";
        case NodeKind::Action: return "Action";
        case NodeKind::CallHelp: return "CallHelp";
    }
    return "?";
}

BTNode make_sequence(std::vector<BTNode> children) {
    BTNode n;
    n.kind = NodeKind::Sequence;
    n.children = std::move(children);
    return n;
}

BTNode make_fallback(std::vector<BTNode> children) {
    BTNode n;
    n.kind = NodeKind::Fallback;
    n.children = std::move(children);
    return n;
}

BTNode make_parallel(int threshold, std::vector<BTNode> children) {
    BTNode n;
    n.kind = NodeKind::Parallel;
    n.threshold = threshold;
    n.children = std::move(children);
    return n;
}

BTNode make_condition(Predicate p) {
    BTNode n;
    n.kind = NodeKind::Condition;
    n.predicate = std::move(p);
    return n;
}

BTNode make_action(ActionInstance a) {
    BTNode n;
    n.kind = NodeKind::Action;
    n.action = std::move(a);
    return n;
}

BTNode make_call_help(Predicate p) {
    BTNode n;
    n.kind = NodeKind::CallHelp;
    n.predicate = std::move(p);
    return n;
}

void reindex(BehaviorTree& tree, BTNode& node) {
    node.id = tree.fresh_id();
    for (auto& child : node.children) reindex(tree, child);
}

namespace {

bool is_leaf_kind(NodeKind k) {
    return k == NodeKind::Condition || k == NodeKind::Action || k == NodeKind::CallHelp;
}

void validate_node(const BTNode& node, std::set<int>& ids) {
    if (!ids.insert(node.id).second)
        throw MalformedTree("duplicate node id " + std::to_string(node.id));
    if (is_leaf_kind(node.kind)) {
        if (!node.children.empty()) throw MalformedTree("leaf node with children");
        if (node.kind == NodeKind::Action) {
            if (!node.action) throw MalformedTree("action leaf without an action");
        } else if (!node.predicate) {
            throw MalformedTree("condition leaf without a predicate");
        }
    } else {
        if (node.children.empty()) throw MalformedTree("control node without children");
        if (node.kind == NodeKind::Parallel &&
            (node.threshold < 1 || node.threshold > static_cast<int>(node.children.size())))
            throw MalformedTree("parallel threshold out of range");
        for (const auto& child : node.children) validate_node(child, ids);
    }
}

}  // namespace

void validate_tree(const BehaviorTree& tree) {
    std::set<int> ids;
    validate_node(tree.root, ids);
}

namespace {

struct TickContext {
    const Observation& obs;
    const Effector& effector;
    TickStats* stats;
    std::optional<ActionInstance> executed;
};

struct NodeOutcome {
    NodeStatus status = NodeStatus::Success;
    // The condition leaf whose failure blocks progress: the failing leaf
    // itself; through a Sequence, its first failing child's blocker; through
    // a Fallback, the blocker of the last alternative (recovery branches sit
    // after their guard, and the actionable condition lives inside them).
    std::optional<std::pair<int, Predicate>> blocker;
};

NodeOutcome tick_node(const BTNode& node, TickContext& ctx) {
    switch (node.kind) {
        case NodeKind::Condition:
        case NodeKind::CallHelp: {
            if (ctx.stats) {
                ++ctx.stats->leaf_evaluations;
                ++ctx.stats->condition_evaluations;
            }
            const bool ok = holds_or_unknown_false(ctx.obs.view, *node.predicate);
            if (ok) return {NodeStatus::Success, std::nullopt};
            return {NodeStatus::Failure, std::make_pair(node.id, *node.predicate)};
        }
        case NodeKind::Action: {
            if (ctx.stats) ++ctx.stats->leaf_evaluations;
            ActionOutcome out = ctx.effector(node, *node.action);
            if (out.executed) {
                if (ctx.stats) ++ctx.stats->action_invocations;
                if (!ctx.executed) ctx.executed = *node.action;
            }
            return {out.status, std::nullopt};
        }
        case NodeKind::Sequence: {
            for (const auto& child : node.children) {
                NodeOutcome o = tick_node(child, ctx);
                if (o.status != NodeStatus::Success) return o;
            }
            return {NodeStatus::Success, std::nullopt};
        }
        case NodeKind::Fallback: {
            NodeOutcome last;
            for (const auto& child : node.children) {
                last = tick_node(child, ctx);
                if (last.status != NodeStatus::Failure) return last;
            }
            return last;  // Failure, blocker of the final alternative
        }
        case NodeKind::Parallel: {
            int successes = 0, failures = 0;
            std::optional<std::pair<int, Predicate>> first_blocker;
            for (const auto& child : node.children) {
                NodeOutcome o = tick_node(child, ctx);
                if (o.status == NodeStatus::Success) ++successes;
                if (o.status == NodeStatus::Failure) {
                    ++failures;
                    if (!first_blocker) first_blocker = o.blocker;
                }
            }
            const int n = static_cast<int>(node.children.size());
            if (successes >= node.threshold) return {NodeStatus::Success, std::nullopt};
            if (failures > n - node.threshold) return {NodeStatus::Failure, first_blocker};
            return {NodeStatus::Running, std::nullopt};
        }
    }
    throw MalformedTree("unhandled node kind");
}

}  // namespace

TickResult tick(BehaviorTree& tree, const Observation& obs, const Effector& effector, TickStats* stats) {
    validate_tree(tree);
    TickContext ctx{obs, effector, stats, std::nullopt};
    NodeOutcome outcome = tick_node(tree.root, ctx);
    TickResult result;
    result.status = outcome.status;
    if (result.status == NodeStatus::Failure) result.failed_node = outcome.blocker;
    result.executed_action = ctx.executed;
    return result;
}

BehaviorTree build_initial_tree(const std::vector<Predicate>& goal_predicates, const std::string& owner) {
    if (goal_predicates.empty()) throw EmptyGoal("a task needs at least one goal predicate");
    BehaviorTree tree;
    tree.tree_id = 1;
    tree.owner = owner;
    std::vector<BTNode> leaves;
    for (const auto& goal : goal_predicates) {
        validate_predicate(goal);
        leaves.push_back(make_condition(goal));
    }
    tree.root = make_sequence(std::move(leaves));
    reindex(tree, tree.root);
    return tree;
}

BehaviorTree build_idle_tree(const std::string& owner, int tree_id) {
    BehaviorTree tree;
    tree.tree_id = tree_id;
    tree.owner = owner;
    tree.root = make_condition(pred(Label::AlwaysTrue));
    reindex(tree, tree.root);
    return tree;
}

namespace {

// One guard per action: its full post set as a conjunction. A chain step is
// "done" when its own effects hold or when any later step's effects already
// hold, so re-ticking a partially executed chain resumes at the pending step
// instead of re-running earlier ones (whose posts a later step may have
// legitimately falsified, e.g. a grab ending the in-range-without-object
// state a move established).
BTNode progress_marker(const ActionInstance& action) {
    if (action.post.size() == 1) return make_condition(action.post.front());
    std::vector<BTNode> conds;
    for (const auto& p : action.post) conds.push_back(make_condition(p));
    return make_sequence(std::move(conds));
}

}  // namespace

BTNode bt_extension(const Predicate& goal, const std::vector<ActionInstance>& actions) {
    if (actions.empty()) throw EmptyActions("extension for " + to_string(goal));
    const auto& last = actions.back();
    const bool achieved =
        std::find(last.post.begin(), last.post.end(), goal) != last.post.end() ||
        std::find(last.post_implied.begin(), last.post_implied.end(), goal) != last.post_implied.end();
    if (!achieved)
        throw GoalNotAchieved(to_string(goal) + " not in the post set of " + to_string(last));

    std::vector<BTNode> blocks;
    std::vector<Predicate> guaranteed;
    for (size_t i = 0; i < actions.size(); ++i) {
        const ActionInstance& action = actions[i];
        // Preconditions guaranteed by an earlier step stay out of the tree.
        std::vector<BTNode> body_children;
        for (const auto& p : action.pre)
            if (std::find(guaranteed.begin(), guaranteed.end(), p) == guaranteed.end())
                body_children.push_back(make_condition(p));
        body_children.push_back(make_action(action));
        BTNode body = body_children.size() == 1 ? std::move(body_children.front())
                                                : make_sequence(std::move(body_children));

        const bool last_single_goal_post = i + 1 == actions.size() && action.post.size() == 1 &&
                                           action.post.front() == goal;
        if (last_single_goal_post) {
            // The outer goal guard already covers this step.
            blocks.push_back(std::move(body));
        } else {
            std::vector<BTNode> alternatives;
            for (size_t j = i; j < actions.size(); ++j) alternatives.push_back(progress_marker(actions[j]));
            alternatives.push_back(std::move(body));
            blocks.push_back(make_fallback(std::move(alternatives)));
        }
        for (const auto& p : action.post) guaranteed.push_back(p);
        for (const auto& p : action.post_implied) guaranteed.push_back(p);
    }
    BTNode recover = blocks.size() == 1 ? std::move(blocks.front()) : make_sequence(std::move(blocks));
    return make_fallback({make_condition(goal), std::move(recover)});
}

namespace {

BTNode* find_node_mut(BTNode& root, int id) {
    if (root.id == id) return &root;
    for (auto& child : root.children)
        if (BTNode* hit = find_node_mut(child, id)) return hit;
    return nullptr;
}

}  // namespace

const BTNode* find_node(const BTNode& root, int id) {
    if (root.id == id) return &root;
    for (const auto& child : root.children)
        if (const BTNode* hit = find_node(child, id)) return hit;
    return nullptr;
}

int count_nodes(const BTNode& root) {
    int n = 1;
    for (const auto& child : root.children) n += count_nodes(child);
    return n;
}

void bt_melt(BehaviorTree& tree, int target_node, BTNode subtree) {
    BTNode* target = find_node_mut(tree.root, target_node);
    if (!target) throw NodeNotFound("node " + std::to_string(target_node));
    if (target->kind != NodeKind::Condition && target->kind != NodeKind::CallHelp)
        throw TargetNotLeaf("node " + std::to_string(target_node) + " is " + to_string(target->kind));
    reindex(tree, subtree);
    *target = std::move(subtree);
    validate_tree(tree);
}

int insert_priority_subtree(BehaviorTree& tree, BTNode subtree) {
    reindex(tree, subtree);
    const int subtree_root_id = subtree.id;
    BTNode new_root = make_sequence({});
    new_root.id = tree.fresh_id();
    new_root.children.push_back(std::move(subtree));
    new_root.children.push_back(std::move(tree.root));
    tree.root = std::move(new_root);
    validate_tree(tree);
    return subtree_root_id;
}

void remove_priority_subtree(BehaviorTree& tree, int subtree_root_id) {
    // Priority subtrees only ever sit as the first child of a root-spine
    // Sequence created by insert_priority_subtree.
    BTNode* spine = &tree.root;
    BTNode* parent = nullptr;
    while (spine->kind == NodeKind::Sequence && spine->children.size() == 2) {
        if (spine->children[0].id == subtree_root_id) {
            BTNode rest = std::move(spine->children[1]);
            if (parent == nullptr)
                tree.root = std::move(rest);
            else
                *spine = std::move(rest);
            validate_tree(tree);
            return;
        }
        parent = spine;
        spine = &spine->children[1];
    }
    throw NodeNotFound("priority subtree " + std::to_string(subtree_root_id));
}

void convert_to_call_help(BehaviorTree& tree, int node_id) {
    BTNode* target = find_node_mut(tree.root, node_id);
    if (!target) throw NodeNotFound("node " + std::to_string(node_id));
    if (target->kind == NodeKind::CallHelp) return;  // repeat escalation on the same node
    if (target->kind != NodeKind::Condition)
        throw TargetNotLeaf("node " + std::to_string(node_id) + " is " + to_string(target->kind));
    target->kind = NodeKind::CallHelp;
}

namespace {

void render(const BTNode& node, int depth, std::string& out) {
    out.append(static_cast<size_t>(depth) * 2, ' ');
    out += to_string(node.kind);
    if (node.kind == NodeKind::Parallel)
        out += "(" + std::to_string(node.threshold) + "/" + std::to_string(node.children.size()) + ")";
    out += " #" + std::to_string(node.id);
    if (node.predicate) out += " " + to_string(*node.predicate);
    if (node.action) out += " " + to_string(*node.action);
    out += "\n";
    for (const auto& child : node.children) render(child, depth + 1, out);
}

}  // namespace

std::string to_text(const BehaviorTree& tree) {
    std::string out = "tree " + std::to_string(tree.tree_id) + " owner=" + tree.owner + "\n";
    render(tree.root, 0, out);
    return out;
}

}  // namespace btfleet
