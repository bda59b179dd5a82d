#include "btfleet/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace btfleet {

namespace {

std::vector<ActionInstance> applicable_joint_actions(const WorldState& w) {
    std::vector<ActionInstance> out;
    for (const auto& robot : w.robot_order) {
        const RobotInfo& r = w.robots.at(robot);
        for (const auto& tmpl : registry_for(r.cls))
            for (auto& inst : enumerate_groundings(tmpl, robot, w))
                if (action_applicable(w, inst)) out.push_back(std::move(inst));
    }
    return out;
}

// Search states repeat heavily across simulations; keying the applicable set
// on the world digest keeps rollouts cheap.
struct ActionCache {
    std::map<std::string, std::vector<ActionInstance>> by_digest;

    const std::vector<ActionInstance>& get(const WorldState& w) {
        const std::string key = world_digest(w);
        auto it = by_digest.find(key);
        if (it == by_digest.end()) it = by_digest.emplace(key, applicable_joint_actions(w)).first;
        return it->second;
    }
};

struct TreeNode {
    WorldState world;
    std::vector<ActionInstance> actions;  // applicable here, canonical order
    std::vector<std::unique_ptr<TreeNode>> children;  // parallel to actions once expanded
    std::vector<int> visits_per_child;
    std::vector<double> value_per_child;
    int visits = 0;
    bool terminal = false;

    TreeNode(WorldState w, const std::function<bool(const WorldState&)>& goal, ActionCache& cache)
        : world(std::move(w)) {
        terminal = goal(world);
        if (!terminal) {
            actions = cache.get(world);
            children.resize(actions.size());
            visits_per_child.assign(actions.size(), 0);
            value_per_child.assign(actions.size(), 0.0);
        }
    }
};

// Bounded draw independent of std::uniform_int_distribution, which is not
// specified bit-for-bit across standard libraries.
size_t draw_index(std::mt19937_64& rng, size_t n) { return static_cast<size_t>(rng() % n); }

size_t draw_weighted(std::mt19937_64& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return draw_index(rng, weights.size());
    const double r = (static_cast<double>(rng() >> 11) / 9007199254740992.0) * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (r < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace

std::optional<std::vector<ActionInstance>> mcts_plan(const WorldState& world, const Predicate& goal,
                                                     const MctsConfig& config) {
    if (config.budget < 1 || config.depth < 1)
        throw ConfigError("mcts_plan: budget and depth must be >= 1");
    const auto reached = goal_test(goal);
    if (reached(world)) return std::vector<ActionInstance>{};

    std::mt19937_64 rng(config.seed ? config.seed : 0x9e3779b97f4a7c15ull);
    const double exploration = std::sqrt(2.0);
    ActionCache cache;
    TreeNode root(world, reached, cache);
    if (root.actions.empty()) return std::nullopt;

    std::optional<std::vector<ActionInstance>> best;

    auto consider = [&](const std::vector<ActionInstance>& path) {
        if (!best || path.size() < best->size()) best = path;
    };

    auto rollout = [&](const WorldState& from, int remaining, std::vector<ActionInstance>& path) {
        WorldState cur = from;
        while (remaining-- > 0) {
            const auto& actions = cache.get(cur);
            if (actions.empty()) return 0.0;
            size_t pick;
            if (config.prior) {
                std::vector<double> weights(actions.size());
                const double uniform = 1.0 / static_cast<double>(actions.size());
                double prior_total = 0.0;
                std::vector<double> priors(actions.size());
                for (size_t i = 0; i < actions.size(); ++i) {
                    priors[i] = std::max(0.0, config.prior(actions[i]));
                    prior_total += priors[i];
                }
                for (size_t i = 0; i < actions.size(); ++i) {
                    const double p = prior_total > 0.0 ? priors[i] / prior_total : uniform;
                    weights[i] = 0.5 * uniform + 0.5 * p;
                }
                pick = draw_weighted(rng, weights);
            } else {
                pick = draw_index(rng, actions.size());
            }
            apply_action_inplace(cur, actions[pick].robot, actions[pick]);
            path.push_back(actions[pick]);
            if (reached(cur)) return 1.0;
        }
        return 0.0;
    };

    for (int iter = 0; iter < config.budget; ++iter) {
        TreeNode* node = &root;
        std::vector<std::pair<TreeNode*, size_t>> visited;
        std::vector<ActionInstance> path;
        int depth = 0;

        // Selection: descend fully expanded nodes by UCB1.
        while (!node->terminal && depth < config.depth) {
            size_t pick = node->actions.size();
            for (size_t i = 0; i < node->actions.size(); ++i) {
                if (!node->children[i]) {
                    pick = i;  // first unexpanded child, canonical order
                    break;
                }
            }
            if (pick == node->actions.size()) {
                if (node->actions.empty()) break;
                double best_score = -1.0;
                for (size_t i = 0; i < node->actions.size(); ++i) {
                    const double mean = node->value_per_child[i] /
                                        std::max(1, node->visits_per_child[i]);
                    const double score =
                        mean + exploration * std::sqrt(std::log(std::max(1, node->visits)) /
                                                       std::max(1, node->visits_per_child[i]));
                    if (score > best_score) {
                        best_score = score;
                        pick = i;
                    }
                }
                visited.push_back({node, pick});
                path.push_back(node->actions[pick]);
                node = node->children[pick].get();
                ++depth;
                continue;
            }
            // Expansion.
            WorldState next = node->world;
            apply_action_inplace(next, node->actions[pick].robot, node->actions[pick]);
            node->children[pick] = std::make_unique<TreeNode>(std::move(next), reached, cache);
            visited.push_back({node, pick});
            path.push_back(node->actions[pick]);
            node = node->children[pick].get();
            ++depth;
            break;
        }

        double reward = 0.0;
        if (node->terminal) {
            reward = 1.0;
            consider(path);
        } else if (depth < config.depth) {
            reward = rollout(node->world, config.depth - depth, path);
            if (reward > 0.0) consider(path);
        }
        for (auto& [n, idx] : visited) {
            ++n->visits;
            ++n->visits_per_child[idx];
            n->value_per_child[idx] += reward;
        }
    }

    if (!best) return std::nullopt;
    // Trim trailing actions past the first goal-true state, then compress
    // out the wandering: the extracted plan is the useful subsequence of the
    // best simulation.
    WorldState cur = world;
    std::vector<ActionInstance> trimmed;
    for (const auto& a : *best) {
        apply_action_inplace(cur, a.robot, a);
        trimmed.push_back(a);
        if (reached(cur)) break;
    }
    return compress_plan(world, std::move(trimmed), reached);
}

std::optional<AssignmentDecision> MctsPlanner::propose(const FailureRecord& failure,
                                                       const PlannerContext& ctx) {
    if (!ctx.world_snapshot) return std::nullopt;
    if (holds_or_unknown_false(*ctx.world_snapshot, failure.predicate)) {
        AssignmentDecision d;
        d.chosen_robot = failure.robot;
        d.mode = AssignMode::Local;
        d.subtree_goal = failure.predicate;
        d.rationale = "already-satisfied";
        return d;
    }
    MctsConfig config;
    config.budget = budget_;
    config.depth = depth_;
    config.seed = derive_seed(seed_, to_string(failure.predicate) + "#" + std::to_string(failure.tick));
    config.prior = prior_;
    auto plan = mcts_plan(*ctx.world_snapshot, failure.predicate, config);
    if (!plan || plan->empty()) return std::nullopt;
    const std::string& robot = plan->front().robot;
    for (const auto& a : *plan)
        if (a.robot != robot) return std::nullopt;  // one decision, one robot
    AssignmentDecision d;
    d.chosen_robot = robot;
    d.actions = std::move(*plan);
    d.mode = robot == failure.robot ? AssignMode::Local : AssignMode::Delegated;
    // The subtree guard is the failed predicate when the final action
    // declares it, otherwise the final action's primary effect (the search
    // reached the goal as a fact; the queue re-check still monitors the
    // failed predicate itself).
    const auto& post = d.actions.back().post;
    if (std::find(post.begin(), post.end(), failure.predicate) != post.end())
        d.subtree_goal = failure.predicate;
    else
        d.subtree_goal = post.front();
    return d;
}

}  // namespace btfleet
