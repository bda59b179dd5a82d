#include "btfleet/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace btfleet {

using nlohmann::json;

Edge make_edge(const std::string& a, const std::string& b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

bool entity_exists(const WorldState& w, const std::string& id) {
    return w.locations.count(id) || w.objects.count(id) || w.robots.count(id);
}

namespace {

const LocationInfo& location_of(const WorldState& w, const std::string& cell) {
    auto it = w.locations.find(cell);
    if (it == w.locations.end()) throw UnknownEntity("location '" + cell + "'");
    return it->second;
}

const RobotInfo& robot_of(const WorldState& w, const std::string& id) {
    auto it = w.robots.find(id);
    if (it == w.robots.end()) throw UnknownEntity("robot '" + id + "'");
    return it->second;
}

const ObjectInfo& object_of(const WorldState& w, const std::string& id) {
    auto it = w.objects.find(id);
    if (it == w.objects.end()) throw UnknownEntity("object '" + id + "'");
    return it->second;
}

// The container an object is related to: itself when it is one, otherwise the
// container it sits in. nullptr when unrelated to any container.
const ObjectInfo* related_container(const WorldState& w, const std::string& id) {
    const ObjectInfo& o = object_of(w, id);
    if (o.container) return &o;
    if (o.in_container) return &object_of(w, *o.in_container);
    return nullptr;
}

// A basket on an airborne drone is inaccessible: it reads as closed.
bool effectively_open(const WorldState& w, const ObjectInfo& c) {
    if (c.attached_to && robot_of(w, *c.attached_to).airborne) return false;
    return c.open;
}

bool held_by_other(const WorldState& w, const std::string& object, const std::string& robot) {
    const ObjectInfo& o = object_of(w, object);
    return o.held_by && *o.held_by != robot;
}

bool basket_empty(const WorldState& w, const RobotInfo& drone) {
    if (!drone.basket) return true;
    for (const auto& [id, o] : w.objects)
        if (o.in_container && *o.in_container == *drone.basket) return false;
    return true;
}

bool object_in_basket(const WorldState& w, const RobotInfo& drone, const std::string& subject) {
    if (!drone.basket) return false;
    if (subject.empty()) return !basket_empty(w, drone);
    const ObjectInfo& o = object_of(w, subject);
    return o.in_container && *o.in_container == *drone.basket;
}

}  // namespace

std::string entity_location(const WorldState& w, const std::string& id) {
    if (w.locations.count(id)) return id;
    if (auto it = w.robots.find(id); it != w.robots.end()) return it->second.at;
    std::string cur = id;
    for (int depth = 0; depth < 16; ++depth) {
        const ObjectInfo& o = object_of(w, cur);
        if (o.held_by) return robot_of(w, *o.held_by).at;
        if (o.attached_to) return robot_of(w, *o.attached_to).at;
        if (o.in_container) { cur = *o.in_container; continue; }
        if (o.on_surface) { cur = *o.on_surface; continue; }
        return o.at;
    }
    throw SchemaError("containment chain too deep at '" + id + "'");
}

bool cells_adjacent(const WorldState& w, const std::string& a, const std::string& b) {
    return w.adjacency.count(make_edge(a, b)) > 0;
}

int chebyshev_distance(const WorldState& w, const std::string& cell_a, const std::string& cell_b) {
    const auto& la = location_of(w, cell_a);
    const auto& lb = location_of(w, cell_b);
    return std::max(std::abs(la.x - lb.x), std::abs(la.y - lb.y));
}

namespace {

bool in_ground_range(const WorldState& w, const std::string& robot_cell, const std::string& target_cell) {
    return robot_cell == target_cell || cells_adjacent(w, robot_cell, target_cell);
}

}  // namespace

bool ground_path_free(const WorldState& w, const std::string& from_cell, const std::string& target) {
    const std::string target_cell = entity_location(w, target);
    if (in_ground_range(w, from_cell, target_cell)) return true;
    std::deque<std::string> frontier{from_cell};
    std::set<std::string> seen{from_cell};
    while (!frontier.empty()) {
        std::string cur = frontier.front();
        frontier.pop_front();
        for (const auto& edge : w.adjacency) {
            if (edge.first != cur && edge.second != cur) continue;
            if (w.blocked.count(edge)) continue;
            const std::string& next = edge.first == cur ? edge.second : edge.first;
            if (!seen.insert(next).second) continue;
            if (in_ground_range(w, next, target_cell)) return true;
            frontier.push_back(next);
        }
    }
    return false;
}

bool air_path_free(const WorldState& w, const std::string& from_cell, const std::string& to_cell) {
    const auto& a = location_of(w, from_cell);
    const auto& b = location_of(w, to_cell);
    // March the integer segment between the two cells; any marked no-fly cell
    // on it blocks the flight.
    int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
    int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
    int err = dx + dy, x = a.x, y = a.y;
    while (true) {
        for (const auto& [id, loc] : w.locations)
            if (loc.no_fly && loc.x == x && loc.y == y) return false;
        if (x == b.x && y == b.y) break;
        int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x += sx; }
        if (e2 <= dx) { err += dx; y += sy; }
    }
    return true;
}

bool fact_value(const WorldState& w, const Predicate& p) {
    validate_predicate(p);
    auto require_class = [&](RobotClass cls) -> const RobotInfo& {
        const RobotInfo& r = robot_of(w, p.agent);
        if (r.cls != cls)
            throw InvalidPredicate(to_string(p.label) + " evaluated for " + to_string(r.cls) + " robot");
        return r;
    };
    switch (p.label) {
        case Label::AlwaysTrue:
            return true;

        case Label::ArmObjectFreeGrab:
            return !require_class(RobotClass::Arm).holding.has_value();
        case Label::ArmContainClose: {
            require_class(RobotClass::Arm);
            const ObjectInfo* c = related_container(w, p.subject);
            return c && !effectively_open(w, *c);
        }
        case Label::ArmContainOpen: {
            require_class(RobotClass::Arm);
            const ObjectInfo* c = related_container(w, p.subject);
            return !c || effectively_open(w, *c);
        }
        case Label::ArmObjectInRange: {
            const RobotInfo& r = require_class(RobotClass::Arm);
            const std::string cell = entity_location(w, p.subject);
            return std::find(r.reach.begin(), r.reach.end(), cell) != r.reach.end() &&
                   !held_by_other(w, p.subject, p.agent);
        }
        case Label::ArmObjectInGrab: {
            require_class(RobotClass::Arm);
            const ObjectInfo& o = object_of(w, p.subject);
            return o.held_by && *o.held_by == p.agent;
        }
        case Label::ArmObjectInTarget: {
            require_class(RobotClass::Arm);
            const ObjectInfo& o = object_of(w, p.subject);
            if (w.locations.count(p.target)) return false;  // locations contain nothing
            object_of(w, p.target);
            return o.in_container && *o.in_container == p.target;
        }
        case Label::ArmObjectOnTarget:
        case Label::QuadObjectOnTarget: {
            require_class(p.label == Label::ArmObjectOnTarget ? RobotClass::Arm : RobotClass::Quadruped);
            const ObjectInfo& o = object_of(w, p.subject);
            if (w.locations.count(p.target))
                return !o.held_by && !o.in_container && !o.on_surface && !o.attached_to && o.at == p.target;
            object_of(w, p.target);
            return o.on_surface && *o.on_surface == p.target;
        }

        case Label::QuadFreePath: {
            const RobotInfo& r = require_class(RobotClass::Quadruped);
            entity_location(w, p.target);
            return ground_path_free(w, r.at, p.target);
        }
        case Label::QuadInRangeNoObject: {
            const RobotInfo& r = require_class(RobotClass::Quadruped);
            return in_ground_range(w, r.at, entity_location(w, p.target)) && !r.holding;
        }
        case Label::QuadInRangeWithObject: {
            const RobotInfo& r = require_class(RobotClass::Quadruped);
            return in_ground_range(w, r.at, entity_location(w, p.target)) && r.holding.has_value();
        }
        case Label::QuadObjectFreeGrab:
            return !require_class(RobotClass::Quadruped).holding.has_value();
        case Label::QuadContainClose: {
            require_class(RobotClass::Quadruped);
            const ObjectInfo* c = related_container(w, p.subject);
            return c && !effectively_open(w, *c);
        }
        case Label::QuadContainOpen: {
            require_class(RobotClass::Quadruped);
            const ObjectInfo* c = related_container(w, p.subject);
            return !c || effectively_open(w, *c);
        }
        case Label::QuadCanGetObject: {
            require_class(RobotClass::Quadruped);
            const ObjectInfo& o = object_of(w, p.subject);
            if (o.held_by && *o.held_by != p.agent) return false;
            if (!o.in_container) return true;
            return effectively_open(w, object_of(w, *o.in_container));
        }
        case Label::QuadObjectInGrab: {
            require_class(RobotClass::Quadruped);
            const ObjectInfo& o = object_of(w, p.subject);
            return o.held_by && *o.held_by == p.agent;
        }
        case Label::QuadObjectInTarget: {
            require_class(RobotClass::Quadruped);
            const ObjectInfo& o = object_of(w, p.subject);
            if (w.locations.count(p.target)) return false;
            object_of(w, p.target);
            return o.in_container && *o.in_container == p.target;
        }

        case Label::DroneObjectInBasket:
            return object_in_basket(w, require_class(RobotClass::Drone), p.subject);
        case Label::DroneOnGround:
            return !require_class(RobotClass::Drone).airborne;
        case Label::DroneInAirWithObject: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return r.airborne && !basket_empty(w, r);
        }
        case Label::DroneInAirNoObject: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return r.airborne && basket_empty(w, r);
        }
        case Label::DroneInRangeWithObject: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return r.at == entity_location(w, p.target) && !basket_empty(w, r);
        }
        case Label::DroneInRangeNoObject: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return r.at == entity_location(w, p.target) && basket_empty(w, r);
        }
        case Label::DroneAtTargetWithObject: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return r.at == entity_location(w, p.target) && !r.airborne && !basket_empty(w, r);
        }
        case Label::DroneAtTargetNoObject: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return r.at == entity_location(w, p.target) && !r.airborne && basket_empty(w, r);
        }
        case Label::DronePathFree: {
            const RobotInfo& r = require_class(RobotClass::Drone);
            return air_path_free(w, r.at, entity_location(w, p.target));
        }
    }
    throw InvalidPredicate("unhandled label");
}

bool holds(const WorldState& w, const Predicate& p) { return fact_value(w, p) == p.desired; }

bool holds_or_unknown_false(const WorldState& w, const Predicate& p) {
    try {
        return holds(w, p);
    } catch (const UnknownEntity&) {
        return false;
    }
}

Observation observe(const WorldState& w, const std::string& robot, int radius) {
    const RobotInfo& self = robot_of(w, robot);
    Observation obs;
    obs.robot = robot;
    obs.view = w;
    obs.view.events.clear();  // scripted futures are not robot knowledge

    auto visible_cell = [&](const std::string& cell) {
        return radius < 0 || chebyshev_distance(w, self.at, cell) <= radius;
    };
    auto carried_by_self = [&](const std::string& id) {
        // Follow the placement chain; anything resting on/in something the
        // robot holds or carries counts as carried.
        std::string cur = id;
        for (int depth = 0; depth < 16; ++depth) {
            const ObjectInfo& o = object_of(w, cur);
            if (o.held_by) return *o.held_by == robot;
            if (o.attached_to) return *o.attached_to == robot;
            if (o.in_container) { cur = *o.in_container; continue; }
            if (o.on_surface) { cur = *o.on_surface; continue; }
            return false;
        }
        return false;
    };

    for (auto it = obs.view.robots.begin(); it != obs.view.robots.end();) {
        if (it->first == robot || visible_cell(it->second.at))
            ++it;
        else
            it = obs.view.robots.erase(it);
    }
    for (auto it = obs.view.objects.begin(); it != obs.view.objects.end();) {
        const std::string cell = entity_location(w, it->first);
        bool keep = carried_by_self(it->first) || visible_cell(cell);
        // Placement links must not dangle: an object whose holder fell outside
        // the view is dropped from the view as well.
        if (keep && it->second.held_by && !obs.view.robots.count(*it->second.held_by)) keep = false;
        if (keep && it->second.attached_to && !obs.view.robots.count(*it->second.attached_to)) keep = false;
        if (keep)
            ++it;
        else
            it = obs.view.objects.erase(it);
    }
    // Second pass: drop containment/surface links to objects outside the view.
    for (auto it = obs.view.objects.begin(); it != obs.view.objects.end();) {
        bool keep = true;
        if (it->second.in_container && !obs.view.objects.count(*it->second.in_container)) keep = false;
        if (it->second.on_surface && !obs.view.objects.count(*it->second.on_surface)) keep = false;
        if (keep)
            ++it;
        else
            it = obs.view.objects.erase(it);
    }
    for (auto& [id, r] : obs.view.robots) {
        if (r.holding && !obs.view.objects.count(*r.holding)) r.holding.reset();
        if (r.basket && !obs.view.objects.count(*r.basket)) r.basket.reset();
    }
    obs.view.robot_order.clear();
    for (const auto& id : w.robot_order)
        if (obs.view.robots.count(id)) obs.view.robot_order.push_back(id);
    return obs;
}

Observation observe(const WorldState& w, const std::string& robot) {
    return observe(w, robot, robot_of(w, robot).sense_radius);
}

namespace {

void detach_object(WorldState& w, const std::string& id) {
    ObjectInfo& o = w.objects.at(id);
    if (o.held_by) {
        auto it = w.robots.find(*o.held_by);
        if (it != w.robots.end() && it->second.holding == id) it->second.holding.reset();
    }
    o.held_by.reset();
    o.in_container.reset();
    o.on_surface.reset();
    o.at.clear();
}

}  // namespace

void apply_action_inplace(WorldState& w, const std::string& robot, const ActionInstance& action) {
    RobotInfo& r = w.robots.at(robot);
    if (r.cls != action.cls || robot != action.robot)
        throw PreconditionViolated(to_string(action) + " applied by robot " + robot);
    for (const auto& p : action.pre)
        if (!holds(w, p))
            throw PreconditionViolated(to_string(p) + " for " + to_string(action));

    auto binding = [&](const char* slot) -> const std::string& {
        auto it = action.bindings.find(slot);
        if (it == action.bindings.end()) throw IncompleteBinding(to_string(action));
        return it->second;
    };

    const std::string& name = action.template_name;
    if (name == "Open" || name == "Close") {
        ObjectInfo& c = w.objects.at(binding("container"));
        if (!c.container) throw InvalidBinding(c.id + " is not a container");
        c.open = (name == "Open");
    } else if (name == "Grab") {
        const std::string& obj = binding("object");
        const ObjectInfo& target_obj = w.objects.at(obj);
        if (target_obj.fixed || target_obj.attached_to)
            throw PreconditionViolated(obj + " is immovable");
        if (r.holding && *r.holding != obj) {
            // Occupied gripper drops what it held, loose at the robot's cell.
            ObjectInfo& dropped = w.objects.at(*r.holding);
            detach_object(w, dropped.id);
            dropped.at = r.at;
        }
        detach_object(w, obj);
        w.objects.at(obj).held_by = robot;
        r.holding = obj;
    } else if (name == "PutOn") {
        const std::string& obj = binding("object");
        const std::string& tgt = binding("target");
        detach_object(w, obj);
        if (w.locations.count(tgt))
            w.objects.at(obj).at = tgt;
        else
            w.objects.at(obj).on_surface = tgt;
        r.holding.reset();
    } else if (name == "PutInto") {
        const std::string& obj = binding("object");
        ObjectInfo& c = w.objects.at(binding("container"));
        if (!c.container) throw InvalidBinding(c.id + " is not a container");
        detach_object(w, obj);
        w.objects.at(obj).in_container = c.id;
        r.holding.reset();
    } else if (name == "MoveToNoObject" || name == "MoveToWithObject") {
        r.at = entity_location(w, binding("target"));
    } else if (name == "TakeOffNoObject" || name == "TakeOffWithObject") {
        r.airborne = true;
    } else if (name == "LandOnNoObject" || name == "LandOnWithObject") {
        r.airborne = false;
        r.at = entity_location(w, binding("target"));
    } else {
        throw InvalidBinding("no effect rule for action '" + name + "'");
    }
}

WorldState apply_action(const WorldState& w, const std::string& robot, const ActionInstance& action) {
    WorldState next = w;
    apply_action_inplace(next, robot, action);
    return next;
}

void validate_world(const WorldState& w) {
    for (const auto& [id, loc] : w.locations)
        if (id != loc.id) throw SchemaError("location key/id mismatch at " + id);
    for (const auto& edge : w.adjacency) {
        location_of(w, edge.first);
        location_of(w, edge.second);
    }
    for (const auto& edge : w.blocked)
        if (!w.adjacency.count(edge)) throw SchemaError("blocked edge not in adjacency");
    for (const auto& [id, r] : w.robots) {
        location_of(w, r.at);
        if (r.holding) {
            const ObjectInfo& o = object_of(w, *r.holding);
            if (!o.held_by || *o.held_by != id) throw SchemaError("holding link broken at " + id);
        }
        if (r.cls != RobotClass::Drone && r.airborne) throw SchemaError(id + ": only drones fly");
        if (r.basket) {
            const ObjectInfo& b = object_of(w, *r.basket);
            if (!b.container || !b.attached_to || *b.attached_to != id)
                throw SchemaError(id + ": basket must be an attached container");
        }
        for (const auto& cell : r.reach) location_of(w, cell);
    }
    for (const auto& [id, o] : w.objects) {
        int placements = 0;
        placements += o.held_by.has_value();
        placements += o.in_container.has_value();
        placements += o.on_surface.has_value();
        placements += o.attached_to.has_value();
        placements += !o.at.empty();
        if (placements != 1) throw SchemaError("object '" + id + "' must have exactly one placement");
        if (o.held_by) {
            const RobotInfo& r = robot_of(w, *o.held_by);
            if (!r.holding || *r.holding != id) throw SchemaError("held_by link broken at " + id);
        }
        if (o.in_container && !object_of(w, *o.in_container).container)
            throw SchemaError(id + " is inside a non-container");
        if (o.on_surface && !object_of(w, *o.on_surface).surface)
            throw SchemaError(id + " is on a non-surface");
        if (o.attached_to) robot_of(w, *o.attached_to);
        if (!o.at.empty()) location_of(w, o.at);
        entity_location(w, id);  // chain must terminate
    }
    for (const auto& id : w.robot_order) robot_of(w, id);
    if (w.robot_order.size() != w.robots.size()) throw SchemaError("robot_order must list every robot once");
    for (const auto& cell : w.random_cells) location_of(w, cell);
    for (const auto& ev : w.events) {
        if (ev.kind == "block" || ev.kind == "unblock") {
            if (!w.adjacency.count(make_edge(ev.a, ev.b))) throw SchemaError("event edge not in adjacency");
        } else if (ev.kind == "teleport") {
            object_of(w, ev.a);
            location_of(w, ev.b);
        } else {
            throw SchemaError("unknown event kind '" + ev.kind + "'");
        }
    }
}

namespace {

std::string get_string(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field)) throw SchemaError(where + ": missing field '" + field + "'");
    if (!j.at(field).is_string()) throw SchemaError(where + ": field '" + field + "' must be a string");
    return j.at(field).get<std::string>();
}

}  // namespace

WorldState load_scenario_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scenario: ") + e.what());
    }
    WorldState w;
    w.format_version = j.value("format_version", 0);
    if (w.format_version != 1) throw SchemaError("scenario: unsupported format_version");
    w.name = j.value("name", "");
    w.rng_seed = j.value("rng_seed", 0);
    for (const auto& lj : j.value("locations", json::array())) {
        LocationInfo loc;
        loc.id = get_string(lj, "id", "locations");
        loc.x = lj.value("x", 0);
        loc.y = lj.value("y", 0);
        loc.no_fly = lj.value("no_fly", false);
        if (!w.locations.emplace(loc.id, loc).second)
            throw SchemaError("duplicate location '" + loc.id + "'");
    }
    for (const auto& ej : j.value("adjacency", json::array())) {
        if (!ej.is_array() || ej.size() != 2) throw SchemaError("adjacency entries are [a, b] pairs");
        w.adjacency.insert(make_edge(ej.at(0).get<std::string>(), ej.at(1).get<std::string>()));
    }
    for (const auto& ej : j.value("blocked", json::array())) {
        if (!ej.is_array() || ej.size() != 2) throw SchemaError("blocked entries are [a, b] pairs");
        w.blocked.insert(make_edge(ej.at(0).get<std::string>(), ej.at(1).get<std::string>()));
    }
    for (const auto& oj : j.value("objects", json::array())) {
        ObjectInfo o;
        o.id = get_string(oj, "id", "objects");
        o.container = oj.value("container", false);
        o.surface = oj.value("surface", false);
        o.fixed = oj.value("fixed", false);
        o.open = oj.value("open", false);
        if (oj.contains("at")) o.at = oj.at("at").get<std::string>();
        if (oj.contains("in")) o.in_container = oj.at("in").get<std::string>();
        if (oj.contains("on")) o.on_surface = oj.at("on").get<std::string>();
        if (oj.contains("held_by")) o.held_by = oj.at("held_by").get<std::string>();
        if (oj.contains("attached_to")) o.attached_to = oj.at("attached_to").get<std::string>();
        if (!w.objects.emplace(o.id, o).second) throw SchemaError("duplicate object '" + o.id + "'");
    }
    for (const auto& rj : j.value("robots", json::array())) {
        RobotInfo r;
        r.id = get_string(rj, "id", "robots");
        r.cls = robot_class_from_string(get_string(rj, "class", "robots"));
        r.at = get_string(rj, "at", "robots");
        r.sense_radius = rj.value("radius", 3);
        r.airborne = rj.value("airborne", false);
        if (rj.contains("holding")) r.holding = rj.at("holding").get<std::string>();
        if (rj.contains("basket")) r.basket = rj.at("basket").get<std::string>();
        for (const auto& cell : rj.value("reach", json::array())) r.reach.push_back(cell.get<std::string>());
        if (!w.robots.emplace(r.id, r).second) throw SchemaError("duplicate robot '" + r.id + "'");
        w.robot_order.push_back(r.id);
    }
    for (const auto& c : j.value("random_cells", json::array())) w.random_cells.push_back(c.get<std::string>());
    for (const auto& ej : j.value("events", json::array())) {
        ScriptedEvent ev;
        ev.tick = ej.at("tick").get<int>();
        ev.kind = get_string(ej, "kind", "events");
        if (ev.kind == "teleport") {
            ev.a = get_string(ej, "object", "events");
            ev.b = get_string(ej, "to", "events");
        } else {
            ev.a = get_string(ej, "a", "events");
            ev.b = get_string(ej, "b", "events");
        }
        w.events.push_back(ev);
    }
    if (j.contains("action_durations"))
        for (const auto& [name, ticks] : j.at("action_durations").items())
            w.action_durations[name] = ticks.get<int>();
    if (j.contains("config"))
        for (const auto& [key, value] : j.at("config").items())
            w.config[key] = value.is_string() ? value.get<std::string>() : value.dump();
    validate_world(w);
    return w;
}

WorldState load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return load_scenario_text(ss.str());
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

std::string scenario_to_text(const WorldState& w) {
    json j;
    j["format_version"] = w.format_version;
    j["name"] = w.name;
    if (w.rng_seed) j["rng_seed"] = w.rng_seed;
    j["locations"] = json::array();
    for (const auto& [id, loc] : w.locations) {
        json lj{{"id", id}, {"x", loc.x}, {"y", loc.y}};
        if (loc.no_fly) lj["no_fly"] = true;
        j["locations"].push_back(lj);
    }
    j["adjacency"] = json::array();
    for (const auto& e : w.adjacency) j["adjacency"].push_back({e.first, e.second});
    j["blocked"] = json::array();
    for (const auto& e : w.blocked) j["blocked"].push_back({e.first, e.second});
    j["objects"] = json::array();
    for (const auto& [id, o] : w.objects) {
        json oj{{"id", id}};
        if (o.container) oj["container"] = true;
        if (o.surface) oj["surface"] = true;
        if (o.fixed) oj["fixed"] = true;
        if (o.open) oj["open"] = true;
        if (!o.at.empty()) oj["at"] = o.at;
        if (o.in_container) oj["in"] = *o.in_container;
        if (o.on_surface) oj["on"] = *o.on_surface;
        if (o.held_by) oj["held_by"] = *o.held_by;
        if (o.attached_to) oj["attached_to"] = *o.attached_to;
        j["objects"].push_back(oj);
    }
    j["robots"] = json::array();
    for (const auto& id : w.robot_order) {
        const RobotInfo& r = w.robots.at(id);
        json rj{{"id", id}, {"class", to_string(r.cls)}, {"at", r.at}, {"radius", r.sense_radius}};
        if (r.airborne) rj["airborne"] = true;
        if (r.holding) rj["holding"] = *r.holding;
        if (r.basket) rj["basket"] = *r.basket;
        if (!r.reach.empty()) rj["reach"] = r.reach;
        j["robots"].push_back(rj);
    }
    if (!w.random_cells.empty()) j["random_cells"] = w.random_cells;
    j["events"] = json::array();
    for (const auto& ev : w.events) {
        json ej{{"tick", ev.tick}, {"kind", ev.kind}};
        if (ev.kind == "teleport") {
            ej["object"] = ev.a;
            ej["to"] = ev.b;
        } else {
            ej["a"] = ev.a;
            ej["b"] = ev.b;
        }
        j["events"].push_back(ej);
    }
    if (!w.action_durations.empty()) j["action_durations"] = w.action_durations;
    if (!w.config.empty()) j["config"] = w.config;
    return j.dump(2) + "\n";
}

WorldState randomize_initial(const WorldState& w, uint64_t seed) {
    WorldState out = w;
    std::vector<std::string> cells = w.random_cells;
    if (cells.empty())
        for (const auto& [id, loc] : w.locations) cells.push_back(id);
    std::sort(cells.begin(), cells.end());
    std::mt19937_64 rng(seed ? seed : 0x9e3779b97f4a7c15ull);
    auto pick = [&]() { return cells[static_cast<size_t>(rng() % cells.size())]; };
    for (const auto& id : out.robot_order) {
        RobotInfo& r = out.robots.at(id);
        if (r.cls == RobotClass::Arm) continue;  // arms are bolted down
        r.at = pick();
    }
    for (auto& [id, o] : out.objects) {
        if (o.fixed || o.at.empty()) continue;  // only loose, mobile objects move
        o.at = pick();
    }
    validate_world(out);
    return out;
}

void run_scripted_events(WorldState& w, int tick) {
    for (const auto& ev : w.events) {
        if (ev.tick != tick) continue;
        if (ev.kind == "block") {
            w.blocked.insert(make_edge(ev.a, ev.b));
        } else if (ev.kind == "unblock") {
            w.blocked.erase(make_edge(ev.a, ev.b));
        } else if (ev.kind == "teleport") {
            ObjectInfo& o = w.objects.at(ev.a);
            detach_object(w, ev.a);
            o.at = ev.b;
        }
    }
}

std::string world_digest(const WorldState& w) {
    std::string out;
    for (const auto& id : w.robot_order) {
        const RobotInfo& r = w.robots.at(id);
        out += id + "@" + r.at + (r.holding ? "+" + *r.holding : "") + (r.airborne ? "^" : "") + ";";
    }
    for (const auto& [id, o] : w.objects) {
        out += id + ":";
        if (o.held_by)
            out += "h" + *o.held_by;
        else if (o.in_container)
            out += "c" + *o.in_container;
        else if (o.on_surface)
            out += "s" + *o.on_surface;
        else if (o.attached_to)
            out += "r" + *o.attached_to;
        else
            out += "@" + o.at;
        if (o.container) out += o.open ? "/o" : "/c";
        out += ";";
    }
    for (const auto& e : w.blocked) out += "!" + e.first + "-" + e.second + ";";
    return out;
}

WorldState merge_observations(const std::map<std::string, Observation>& obs) {
    WorldState merged;
    bool first = true;
    for (const auto& [id, o] : obs) {
        if (first) {
            merged = o.view;
            first = false;
            continue;
        }
        for (const auto& [rid, r] : o.view.robots) merged.robots.insert({rid, r});
        for (const auto& [oid, ob] : o.view.objects) merged.objects.insert({oid, ob});
    }
    // Restore links that individual restrictions had to sever.
    for (auto& [rid, r] : merged.robots) {
        if (!r.holding)
            for (const auto& [oid, ob] : merged.objects)
                if (ob.held_by && *ob.held_by == rid) r.holding = oid;
    }
    merged.robot_order.clear();
    for (const auto& [rid, r] : merged.robots) merged.robot_order.push_back(rid);
    return merged;
}

}  // namespace btfleet
