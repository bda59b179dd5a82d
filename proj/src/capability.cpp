#include "btfleet/capability.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "btfleet/world.hpp"

namespace btfleet {

using nlohmann::json;

std::string to_string(const ActionInstance& a) {
    std::string out = a.robot + ":" + a.template_name;
    if (!a.bindings.empty()) {
        out += "(";
        bool first = true;
        for (const auto& [slot, entity] : a.bindings) {
            if (!first) out += ",";
            out += slot + "=" + entity;
            first = false;
        }
        out += ")";
    }
    return out;
}

namespace {

SlotRef slot_ref_from_string(const std::string& s) {
    if (s == "object") return SlotRef::Object;
    if (s == "container") return SlotRef::Container;
    if (s == "target") return SlotRef::Target;
    throw SchemaError("unknown slot reference '" + s + "'");
}

std::string slot_name(SlotRef r) {
    switch (r) {
        case SlotRef::Object: return "object";
        case SlotRef::Container: return "container";
        case SlotRef::Target: return "target";
        case SlotRef::None: return "";
    }
    return "";
}

PredSchema parse_schema(const json& j, const std::string& where) {
    PredSchema s;
    if (!j.contains("label")) throw SchemaError(where + ": schema entry missing label");
    auto label = label_from_string(j.at("label").get<std::string>());
    if (!label) throw SchemaError(where + ": unknown label " + j.at("label").get<std::string>());
    s.label = *label;
    if (j.contains("subject")) s.subject = slot_ref_from_string(j.at("subject").get<std::string>());
    if (j.contains("target")) s.target = slot_ref_from_string(j.at("target").get<std::string>());
    if (j.contains("desired")) s.desired = j.at("desired").get<bool>();
    return s;
}

std::vector<PredSchema> parse_schemas(const json& j, const std::string& where) {
    std::vector<PredSchema> out;
    for (const auto& entry : j) out.push_back(parse_schema(entry, where));
    return out;
}

}  // namespace

Library parse_library(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("capability file: ") + e.what());
    }
    Library lib;
    lib.format_version = j.value("format_version", 0);
    if (lib.format_version != 1) throw SchemaError("capability file: unsupported format_version");
    for (const auto& cj : j.at("classes")) {
        ClassLibrary cl;
        cl.cls = robot_class_from_string(cj.at("class").get<std::string>());
        for (const auto& cond : cj.at("conditions")) {
            auto label = label_from_string(cond.get<std::string>());
            if (!label) throw SchemaError("capability file: unknown condition " + cond.get<std::string>());
            cl.conditions.push_back(*label);
        }
        for (const auto& aj : cj.at("actions")) {
            ActionTemplate t;
            t.name = aj.at("name").get<std::string>();
            t.cls = cl.cls;
            const std::string where = to_string(cl.cls) + "/" + t.name;
            for (const auto& s : aj.at("slots")) t.slots.push_back(s.get<std::string>());
            t.pre = parse_schemas(aj.at("pre"), where);
            t.post = parse_schemas(aj.at("post"), where);
            t.pre_verbatim = aj.contains("pre_verbatim") ? parse_schemas(aj.at("pre_verbatim"), where) : t.pre;
            t.post_verbatim = aj.contains("post_verbatim") ? parse_schemas(aj.at("post_verbatim"), where) : t.post;
            if (aj.contains("post_implied")) t.post_implied = parse_schemas(aj.at("post_implied"), where);
            t.duration_ticks = aj.value("duration_ticks", 1);
            for (const auto& schema : t.pre)
                if (schema.subject != SlotRef::None &&
                    std::find(t.slots.begin(), t.slots.end(), slot_name(schema.subject)) == t.slots.end())
                    throw SchemaError(where + ": schema references undeclared slot");
            cl.actions.push_back(std::move(t));
        }
        lib.classes.push_back(std::move(cl));
    }
    return lib;
}

const ClassLibrary& Library::for_class(RobotClass cls) const {
    for (const auto& cl : classes)
        if (cl.cls == cls) return cl;
    throw ConfigError("library has no class " + to_string(cls));
}

const ActionTemplate* Library::find(RobotClass cls, const std::string& name) const {
    for (const auto& t : for_class(cls).actions)
        if (t.name == name) return &t;
    return nullptr;
}

namespace {

void assert_canonical_counts(const Library& lib) {
    // Contract: action/condition cardinalities 5/6, 7/8, 6/7.
    struct Expect { RobotClass cls; size_t actions, conditions; };
    const Expect expected[] = {
        {RobotClass::Arm, 5, 6},
        {RobotClass::Quadruped, 7, 8},
        {RobotClass::Drone, 6, 7},
    };
    for (const auto& e : expected) {
        const auto& cl = lib.for_class(e.cls);
        if (cl.actions.size() != e.actions || cl.conditions.size() != e.conditions)
            throw SchemaError("canonical library cardinality drift for class " + to_string(e.cls));
    }
}

}  // namespace

const Library& library() {
    static const Library lib = [] {
        const auto text = canonical_library_text();
        if (fnv1a64(text) != canonical_library_checksum())
            throw SchemaError("canonical capability data failed its checksum");
        Library parsed = parse_library(std::string(text));
        assert_canonical_counts(parsed);
        return parsed;
    }();
    return lib;
}

const std::vector<ActionTemplate>& registry_for(RobotClass cls) { return library().for_class(cls).actions; }

const std::vector<Label>& condition_labels(RobotClass cls) { return library().for_class(cls).conditions; }

namespace {

std::string resolve_slot(SlotRef ref, const std::map<std::string, std::string>& bindings) {
    if (ref == SlotRef::None) return "";
    auto it = bindings.find(slot_name(ref));
    if (it == bindings.end()) throw IncompleteBinding("missing slot '" + slot_name(ref) + "'");
    return it->second;
}

Predicate substitute(const PredSchema& schema, const std::string& robot,
                     const std::map<std::string, std::string>& bindings) {
    Predicate p;
    p.label = schema.label;
    p.desired = schema.desired;
    if (arity_of(schema.label).agent) p.agent = robot;
    p.subject = resolve_slot(schema.subject, bindings);
    p.target = resolve_slot(schema.target, bindings);
    return p;
}

}  // namespace

ActionInstance ground(const ActionTemplate& tmpl, const std::string& robot_id, RobotClass robot_cls,
                      const std::map<std::string, std::string>& bindings) {
    if (robot_cls != tmpl.cls)
        throw ClassMismatch(tmpl.name + " belongs to " + to_string(tmpl.cls) + ", robot " + robot_id +
                            " is " + to_string(robot_cls));
    for (const auto& slot : tmpl.slots) {
        auto it = bindings.find(slot);
        if (it == bindings.end() || it->second.empty())
            throw IncompleteBinding(tmpl.name + ": slot '" + slot + "' unbound");
    }
    for (const auto& [slot, entity] : bindings)
        if (std::find(tmpl.slots.begin(), tmpl.slots.end(), slot) == tmpl.slots.end())
            throw InvalidBinding(tmpl.name + ": no slot named '" + slot + "'");

    ActionInstance inst;
    inst.template_name = tmpl.name;
    inst.cls = tmpl.cls;
    inst.robot = robot_id;
    inst.bindings = bindings;
    inst.duration_ticks = tmpl.duration_ticks;
    for (const auto& schema : tmpl.pre) inst.pre.push_back(substitute(schema, robot_id, bindings));
    for (const auto& schema : tmpl.post) inst.post.push_back(substitute(schema, robot_id, bindings));
    for (const auto& schema : tmpl.post_implied)
        inst.post_implied.push_back(substitute(schema, robot_id, bindings));
    return inst;
}

std::vector<const ActionTemplate*> capability_check(const Predicate& goal, RobotClass cls, CatalogMode mode) {
    std::vector<const ActionTemplate*> out;
    for (const auto& tmpl : registry_for(cls)) {
        const auto& post = mode == CatalogMode::Verbatim ? tmpl.post_verbatim : tmpl.post;
        for (const auto& schema : post) {
            if (schema.label == goal.label && schema.desired == goal.desired) {
                out.push_back(&tmpl);
                break;
            }
        }
    }
    return out;
}

std::optional<std::map<std::string, std::string>> unify_goal(const ActionTemplate& tmpl,
                                                             const Predicate& goal,
                                                             const WorldState& view) {
    for (const auto& schema : tmpl.post) {
        if (schema.label != goal.label || schema.desired != goal.desired) continue;
        std::map<std::string, std::string> bindings;
        auto bind = [&](SlotRef ref, const std::string& value) -> bool {
            if (ref == SlotRef::None) return value.empty();
            if (value.empty()) return false;
            std::string entity = value;
            // Container slots unify through the containment relation: a goal
            // about an object inside a container binds the container itself.
            if (ref == SlotRef::Container) {
                auto it = view.objects.find(value);
                if (it != view.objects.end() && !it->second.container && it->second.in_container)
                    entity = *it->second.in_container;
            }
            auto [pos, inserted] = bindings.emplace(slot_name(ref), entity);
            return inserted || pos->second == entity;
        };
        if (!bind(schema.subject, goal.subject)) continue;
        if (schema.target != SlotRef::None || !goal.target.empty()) {
            if (!bind(schema.target, goal.target)) continue;
        }
        return bindings;
    }
    return std::nullopt;
}

}  // namespace btfleet
