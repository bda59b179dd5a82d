// Independent test oracles. Everything here is deliberately written against
// the spec of the behavior, not against the engine: the brute-force tick
// evaluator knows nothing about BTNode traversal internals, and the fact
// table reads scenario structure directly.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "btfleet/predicate.hpp"
#include "btfleet/tree.hpp"
#include "btfleet/world.hpp"

namespace oracles {

using namespace btfleet;

// --- Brute-force tick evaluator ---------------------------------------------
//
// A tree over fixed leaf outcomes, evaluated by direct recursion on the
// definition: Sequence = first Failure, else first Running, else Success;
// Fallback mirrored; Parallel counts all children against its threshold.

struct FixedNode {
    enum Kind { Seq, Fb, Par, Leaf } kind = Leaf;
    int threshold = 0;
    NodeStatus outcome = NodeStatus::Success;  // leaves only
    std::vector<FixedNode> children;
};

inline NodeStatus brute_eval(const FixedNode& n) {
    switch (n.kind) {
        case FixedNode::Leaf:
            return n.outcome;
        case FixedNode::Seq: {
            for (const auto& c : n.children) {
                NodeStatus s = brute_eval(c);
                if (s == NodeStatus::Failure) return NodeStatus::Failure;
                if (s == NodeStatus::Running) return NodeStatus::Running;
            }
            return NodeStatus::Success;
        }
        case FixedNode::Fb: {
            for (const auto& c : n.children) {
                NodeStatus s = brute_eval(c);
                if (s == NodeStatus::Success) return NodeStatus::Success;
                if (s == NodeStatus::Running) return NodeStatus::Running;
            }
            return NodeStatus::Failure;
        }
        case FixedNode::Par: {
            int succ = 0, fail = 0;
            for (const auto& c : n.children) {
                NodeStatus s = brute_eval(c);
                if (s == NodeStatus::Success) ++succ;
                if (s == NodeStatus::Failure) ++fail;
            }
            if (succ >= n.threshold) return NodeStatus::Success;
            if (fail > static_cast<int>(n.children.size()) - n.threshold) return NodeStatus::Failure;
            return NodeStatus::Running;
        }
    }
    return NodeStatus::Failure;
}

// Enumerates all fixed trees up to `max_depth` with at most `max_children`
// children per control node, leaves drawn from {Success, Failure, Running}.
// The callback receives each tree; enumeration stops after `budget` trees.
inline void enumerate_fixed_trees(int max_depth, int max_children, long budget,
                                  const std::function<void(const FixedNode&)>& fn) {
    long remaining = budget;
    const NodeStatus outcomes[] = {NodeStatus::Success, NodeStatus::Failure, NodeStatus::Running};

    std::function<std::vector<FixedNode>(int)> all_of_depth = [&](int depth) {
        std::vector<FixedNode> result;
        for (NodeStatus s : outcomes) {
            FixedNode leaf;
            leaf.outcome = s;
            result.push_back(leaf);
        }
        if (depth <= 1) return result;
        std::vector<FixedNode> shallower = all_of_depth(depth - 1);
        for (int arity = 1; arity <= max_children; ++arity) {
            std::vector<size_t> pick(static_cast<size_t>(arity), 0);
            while (true) {
                std::vector<FixedNode> children;
                for (size_t i : pick) children.push_back(shallower[i]);
                for (auto kind : {FixedNode::Seq, FixedNode::Fb}) {
                    FixedNode n;
                    n.kind = kind;
                    n.children = children;
                    result.push_back(n);
                }
                for (int m = 1; m <= arity; ++m) {
                    FixedNode n;
                    n.kind = FixedNode::Par;
                    n.threshold = m;
                    n.children = children;
                    result.push_back(n);
                }
                // next combination
                int i = arity - 1;
                while (i >= 0 && pick[static_cast<size_t>(i)] + 1 == shallower.size()) {
                    pick[static_cast<size_t>(i)] = 0;
                    --i;
                }
                if (i < 0) break;
                ++pick[static_cast<size_t>(i)];
                if (static_cast<long>(result.size()) > budget) break;
            }
            if (static_cast<long>(result.size()) > budget) break;
        }
        return result;
    };

    for (const auto& tree : all_of_depth(max_depth)) {
        if (remaining-- <= 0) break;
        fn(tree);
    }
}

// Converts a fixed tree to an engine tree whose leaves are Action nodes with
// scripted outcomes (empty post sets, so the engine never skips them), and
// returns the effector that scripts them.
inline BTNode to_engine_tree(const FixedNode& n, int& counter,
                             std::map<int, NodeStatus>& script) {
    BTNode node;
    node.id = ++counter;
    switch (n.kind) {
        case FixedNode::Leaf: {
            node.kind = NodeKind::Action;
            ActionInstance a;
            a.template_name = "scripted";
            a.robot = "r";
            node.action = a;
            script[node.id] = n.outcome;
            return node;
        }
        case FixedNode::Seq: node.kind = NodeKind::Sequence; break;
        case FixedNode::Fb: node.kind = NodeKind::Fallback; break;
        case FixedNode::Par:
            node.kind = NodeKind::Parallel;
            node.threshold = n.threshold;
            break;
    }
    for (const auto& c : n.children) node.children.push_back(to_engine_tree(c, counter, script));
    return node;
}

// --- Fact table --------------------------------------------------------------
//
// Truth of every groundable predicate computed straight from scenario
// structure, with its own (duplicated on purpose) reading of the world.

using FactTable = std::set<std::string>;

inline std::string fact_key(const Predicate& p) {
    Predicate normalized = p;
    normalized.desired = true;
    return to_string(normalized);
}

// Independent truth derivation: its own location resolver, its own range and
// container logic, written against the scenario data model.
inline bool oracle_truth(const WorldState& w, const Predicate& p) {
    auto cell_of = [&](const std::string& id) -> std::string {
        std::string cur = id;
        for (int hops = 0; hops < 20; ++hops) {
            if (w.locations.count(cur)) return cur;
            if (w.robots.count(cur)) return w.robots.at(cur).at;
            const ObjectInfo& o = w.objects.at(cur);
            if (o.held_by)
                cur = *o.held_by;
            else if (o.attached_to)
                cur = *o.attached_to;
            else if (o.in_container)
                cur = *o.in_container;
            else if (o.on_surface)
                cur = *o.on_surface;
            else
                return o.at;
        }
        return "";
    };
    auto adjacent_or_same = [&](const std::string& a, const std::string& b) {
        return a == b || w.adjacency.count(make_edge(a, b)) > 0;
    };
    auto container_open_for = [&](const std::string& id) {
        // open unless the entity is, or sits in, a closed container; baskets
        // of airborne drones count as closed
        const ObjectInfo& o = w.objects.at(id);
        const ObjectInfo* c = o.container ? &o : (o.in_container ? &w.objects.at(*o.in_container) : nullptr);
        if (!c) return true;
        if (c->attached_to && w.robots.at(*c->attached_to).airborne) return false;
        return c->open;
    };
    auto container_closed_for = [&](const std::string& id) {
        const ObjectInfo& o = w.objects.at(id);
        const ObjectInfo* c = o.container ? &o : (o.in_container ? &w.objects.at(*o.in_container) : nullptr);
        if (!c) return false;
        if (c->attached_to && w.robots.at(*c->attached_to).airborne) return true;
        return !c->open;
    };
    auto basket_contents = [&](const std::string& drone) {
        std::vector<std::string> out;
        const auto& basket = w.robots.at(drone).basket;
        if (!basket) return out;
        for (const auto& [id, o] : w.objects)
            if (o.in_container && *o.in_container == *basket) out.push_back(id);
        return out;
    };
    auto quad_path_exists = [&](const std::string& from, const std::string& goal_cell) {
        std::vector<std::string> stack{from};
        std::set<std::string> seen{from};
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            if (adjacent_or_same(cur, goal_cell)) return true;
            for (const auto& e : w.adjacency) {
                if (w.blocked.count(e)) continue;
                std::string next;
                if (e.first == cur) next = e.second;
                else if (e.second == cur) next = e.first;
                else continue;
                if (seen.insert(next).second) stack.push_back(next);
            }
        }
        return false;
    };
    auto segment_clear = [&](const std::string& a_cell, const std::string& b_cell) {
        const LocationInfo& a = w.locations.at(a_cell);
        const LocationInfo& b = w.locations.at(b_cell);
        // walk the integer segment, checking every lattice point
        int x = a.x, y = a.y;
        const int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
        const int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
        int err = dx + dy;
        while (true) {
            for (const auto& [id, loc] : w.locations)
                if (loc.no_fly && loc.x == x && loc.y == y) return false;
            if (x == b.x && y == b.y) return true;
            const int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x += sx; }
            if (e2 <= dx) { err += dx; y += sy; }
        }
    };

    const std::string name = to_string(p.label);
    const RobotInfo* r = p.agent.empty() ? nullptr : &w.robots.at(p.agent);
    const bool holding = r && r->holding.has_value();

    if (name == "ArmObjectFreeGrab?" || name == "QuadObjectFreeGrab?") return !holding;
    if (name == "ArmContainClose?" || name == "QuadContainClose?") return container_closed_for(p.subject);
    if (name == "ArmContainOpen?" || name == "QuadContainOpen?") return container_open_for(p.subject);
    if (name == "ArmObjectInRange?") {
        const ObjectInfo& o = w.objects.at(p.subject);
        if (o.held_by && *o.held_by != p.agent) return false;
        const std::string cell = cell_of(p.subject);
        for (const auto& reach : r->reach)
            if (reach == cell) return true;
        return false;
    }
    if (name == "ArmObjectInGrab?" || name == "QuadObjectInGrab?") {
        const auto& held = w.objects.at(p.subject).held_by;
        return held && *held == p.agent;
    }
    if (name == "ArmObjectInTarget?" || name == "QuadObjectInTarget?") {
        const auto& in = w.objects.at(p.subject).in_container;
        return in && *in == p.target;
    }
    if (name == "ArmObjectOnTarget?" || name == "QuadObjectOnTarget?") {
        const ObjectInfo& o = w.objects.at(p.subject);
        if (w.locations.count(p.target))
            return o.at == p.target && !o.held_by && !o.in_container && !o.on_surface && !o.attached_to;
        return o.on_surface && *o.on_surface == p.target;
    }
    if (name == "QuadFreePath?") return quad_path_exists(r->at, cell_of(p.target));
    if (name == "QuadInRangeNoObject?") return adjacent_or_same(r->at, cell_of(p.target)) && !holding;
    if (name == "QuadInRangeWithObject?") return adjacent_or_same(r->at, cell_of(p.target)) && holding;
    if (name == "QuadCanGetObject?") {
        const ObjectInfo& o = w.objects.at(p.subject);
        if (o.held_by && *o.held_by != p.agent) return false;
        if (!o.in_container) return true;
        const ObjectInfo& c = w.objects.at(*o.in_container);
        if (c.attached_to && w.robots.at(*c.attached_to).airborne) return false;
        return c.open;
    }
    if (name == "DroneObjectInBasket?") {
        auto contents = basket_contents(p.agent);
        if (p.subject.empty()) return !contents.empty();
        for (const auto& id : contents)
            if (id == p.subject) return true;
        return false;
    }
    if (name == "DroneOnGround?") return !r->airborne;
    if (name == "DroneInAirWithObject?") return r->airborne && !basket_contents(p.agent).empty();
    if (name == "DroneInAirNoObject?") return r->airborne && basket_contents(p.agent).empty();
    if (name == "DroneInRangeWithObject?")
        return r->at == cell_of(p.target) && !basket_contents(p.agent).empty();
    if (name == "DroneInRangeNoObject?")
        return r->at == cell_of(p.target) && basket_contents(p.agent).empty();
    if (name == "DroneAtTargetWithObject?")
        return r->at == cell_of(p.target) && !r->airborne && !basket_contents(p.agent).empty();
    if (name == "DroneAtTargetNoObject?")
        return r->at == cell_of(p.target) && !r->airborne && basket_contents(p.agent).empty();
    if (name == "DronePathFree?") return segment_clear(r->at, cell_of(p.target));
    if (name == "AlwaysTrue?") return true;
    throw std::runtime_error("oracle_truth: unhandled " + name);
}

// All predicates over the world's entities that are well-formed, one per
// grounding, desired=true.
inline std::vector<Predicate> groundable_predicates(const WorldState& w);

inline FactTable build_fact_table(const WorldState& w);

inline std::vector<Predicate> groundable_predicates(const WorldState& w) {
    std::vector<Predicate> out;
    std::vector<std::string> entities;
    for (const auto& [id, o] : w.objects) entities.push_back(id);
    std::vector<std::string> targets = entities;
    for (const auto& [id, l] : w.locations) targets.push_back(id);
    for (const Label label : all_labels()) {
        if (label == Label::AlwaysTrue) continue;
        const LabelArity arity = arity_of(label);
        const auto cls = class_of_label(label);
        for (const auto& [rid, r] : w.robots) {
            if (cls && r.cls != *cls) continue;
            std::vector<std::string> subjects =
                arity.subject ? entities : std::vector<std::string>{""};
            for (const auto& subject : subjects) {
                std::vector<std::string> tgts = arity.target ? targets : std::vector<std::string>{""};
                for (const auto& target : tgts) {
                    Predicate p;
                    p.label = label;
                    if (arity.agent) p.agent = rid;
                    p.subject = subject;
                    p.target = target;
                    try {
                        validate_predicate(p);
                    } catch (const InvalidPredicate&) {
                        continue;
                    }
                    out.push_back(p);
                }
            }
        }
    }
    return out;
}

inline FactTable build_fact_table(const WorldState& w) {
    FactTable t;
    for (const auto& p : groundable_predicates(w))
        if (oracle_truth(w, p)) t.insert(fact_key(p));
    return t;
}

}  // namespace oracles
