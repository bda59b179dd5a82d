#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "btfleet/capability.hpp"
#include "btfleet/predicate.hpp"

namespace btfleet {

struct LocationInfo {
    std::string id;
    int x = 0;
    int y = 0;
    bool no_fly = false;
};

// An object occupies exactly one placement: loose at a cell, held by a robot,
// inside a container, on a surface, or attached to a robot (drone baskets).
struct ObjectInfo {
    std::string id;
    std::string at;
    bool container = false;
    bool surface = false;
    bool fixed = false;  // not grabbable, not randomized
    bool open = false;
    std::optional<std::string> held_by;
    std::optional<std::string> in_container;
    std::optional<std::string> on_surface;
    std::optional<std::string> attached_to;
};

struct RobotInfo {
    std::string id;
    RobotClass cls = RobotClass::Quadruped;
    std::string at;
    std::optional<std::string> holding;
    bool airborne = false;
    int sense_radius = 3;                // -1 = unlimited
    std::vector<std::string> reach;      // arm only: reachable cells
    std::optional<std::string> basket;   // drone only: basket object id
};

struct ScriptedEvent {
    int tick = 0;
    std::string kind;  // block | unblock | teleport
    std::string a;     // edge endpoint / object id
    std::string b;     // edge endpoint / destination cell
};

using Edge = std::pair<std::string, std::string>;

struct WorldState {
    int format_version = 1;
    std::string name;
    std::map<std::string, LocationInfo> locations;
    std::set<Edge> adjacency;  // normalized, lexicographically ordered pairs
    std::set<Edge> blocked;
    std::map<std::string, ObjectInfo> objects;
    std::map<std::string, RobotInfo> robots;
    std::vector<std::string> robot_order;  // round-robin tick order
    std::vector<std::string> random_cells; // randomization domain; empty = all cells
    std::vector<ScriptedEvent> events;
    std::map<std::string, int> action_durations;  // template name -> ticks
    std::map<std::string, std::string> config;    // free-form scenario config
    uint64_t rng_seed = 0;
};

// A robot's partial view. `view` is a restriction of the authoritative world:
// every fact in it holds in the world at the same tick.
struct Observation {
    std::string robot;
    int tick = 0;
    WorldState view;
};

Edge make_edge(const std::string& a, const std::string& b);

bool entity_exists(const WorldState& w, const std::string& id);
// Resolves an entity to its cell, following held/contained/attached chains.
std::string entity_location(const WorldState& w, const std::string& id);
bool cells_adjacent(const WorldState& w, const std::string& a, const std::string& b);
int chebyshev_distance(const WorldState& w, const std::string& cell_a, const std::string& cell_b);
// True when an unblocked ground path reaches a cell in movement range of `target`.
bool ground_path_free(const WorldState& w, const std::string& from_cell, const std::string& target);
// True when the straight segment between the two cells crosses no no-fly cell.
bool air_path_free(const WorldState& w, const std::string& from_cell, const std::string& to_cell);

// Truth of a grounded predicate against world facts. Throws UnknownEntity for
// entities missing from `w` and InvalidPredicate for malformed predicates;
// `desired` is applied by the caller (see holds()).
bool fact_value(const WorldState& w, const Predicate& p);

// fact_value(p) == p.desired.
bool holds(const WorldState& w, const Predicate& p);

// Condition-leaf evaluation under partial knowledge: unknown entities make the
// condition false instead of erroring.
bool holds_or_unknown_false(const WorldState& w, const Predicate& p);

Observation observe(const WorldState& w, const std::string& robot, int radius);
Observation observe(const WorldState& w, const std::string& robot);  // robot's own radius

// Applies one grounded action: checks the declared preconditions as facts
// (throws PreconditionViolated naming the first failing one), then performs
// the frame updates. Returns the successor state.
WorldState apply_action(const WorldState& w, const std::string& robot, const ActionInstance& action);
void apply_action_inplace(WorldState& w, const std::string& robot, const ActionInstance& action);

// Scenario file I/O. Format documented in README (JSON, format_version 1).
WorldState load_scenario_text(const std::string& json_text);
WorldState load_scenario_file(const std::string& path);
std::string scenario_to_text(const WorldState& w);

// Re-draws mobile robot and loose object positions uniformly over the
// randomization domain; deterministic in `seed`.
WorldState randomize_initial(const WorldState& w, uint64_t seed);

// Applies the scripted events registered for `tick`.
void run_scripted_events(WorldState& w, int tick);

// Structural invariants (placement exclusivity, drone ground/air consistency,
// referenced entities exist). Throws SchemaError on violation.
void validate_world(const WorldState& w);

// Canonical one-line digest of all dynamic facts; used for planner visited
// sets and frame-discipline tests.
std::string world_digest(const WorldState& w);

// Deterministic merge of several observations into one view (union of facts).
WorldState merge_observations(const std::map<std::string, Observation>& obs);

}  // namespace btfleet
