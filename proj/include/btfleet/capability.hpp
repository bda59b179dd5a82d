#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btfleet/predicate.hpp"

namespace btfleet {

// Slot roles a predicate schema can reference. Slot names in templates are
// "object", "container" and "target".
enum class SlotRef { None, Object, Container, Target };

struct PredSchema {
    Label label = Label::AlwaysTrue;
    SlotRef subject = SlotRef::None;
    SlotRef target = SlotRef::None;
    bool desired = true;
};

struct ActionTemplate {
    std::string name;
    RobotClass cls = RobotClass::Arm;
    std::vector<std::string> slots;  // subset of {object, container, target}
    std::vector<PredSchema> pre;     // executable rows driving grounding/planning
    std::vector<PredSchema> post;
    std::vector<PredSchema> pre_verbatim;   // catalog rows as published; usually == pre
    std::vector<PredSchema> post_verbatim;
    std::vector<PredSchema> post_implied;   // auxiliary effects (negative facts) for regression
    int duration_ticks = 1;
};

// A template grounded to a robot and concrete entities. Carries its
// substituted pre/post predicate sets so downstream code needs no registry.
struct ActionInstance {
    std::string template_name;
    RobotClass cls = RobotClass::Arm;
    std::string robot;
    std::map<std::string, std::string> bindings;  // slot name -> entity id
    std::vector<Predicate> pre;
    std::vector<Predicate> post;
    std::vector<Predicate> post_implied;
    int duration_ticks = 1;

    bool operator==(const ActionInstance& o) const {
        return template_name == o.template_name && robot == o.robot && bindings == o.bindings;
    }
};

// Compact render, e.g. "quad1:Grab(object=apple)". Used in traces.
std::string to_string(const ActionInstance& a);

// Which published row set capability_check and catalog rendering expose.
enum class CatalogMode { Verbatim, Corrected };

struct ClassLibrary {
    RobotClass cls = RobotClass::Arm;
    std::vector<ActionTemplate> actions;
    std::vector<Label> conditions;  // declared catalog; cardinality is contract
};

struct Library {
    int format_version = 1;
    std::vector<ClassLibrary> classes;

    const ClassLibrary& for_class(RobotClass cls) const;
    const ActionTemplate* find(RobotClass cls, const std::string& name) const;
};

// The canonical embedded library (parsed once, validated, counts asserted).
const Library& library();
// Raw bytes of the canonical data file and their pinned checksum.
std::string_view canonical_library_text();
uint64_t canonical_library_checksum();

// Parses a library from file text (tests feed mutated libraries through this).
Library parse_library(const std::string& json_text);

// Full fixed action list for a class.
const std::vector<ActionTemplate>& registry_for(RobotClass cls);
// Declared condition catalog for a class.
const std::vector<Label>& condition_labels(RobotClass cls);

// Grounds a template for a robot. Checks class match and binding completeness,
// substitutes slots into the pre/post schemas.
ActionInstance ground(const ActionTemplate& tmpl, const std::string& robot_id, RobotClass robot_cls,
                      const std::map<std::string, std::string>& bindings);

// Templates of `cls` whose post set (in the given catalog view) can achieve
// `goal`'s label. Empty means the class can never directly achieve the goal.
std::vector<const ActionTemplate*> capability_check(const Predicate& goal, RobotClass cls,
                                                    CatalogMode mode = CatalogMode::Verbatim);

// Derives the bindings that make `tmpl`'s post cover `goal`, using the world
// to resolve container slots (goals about contained objects bind the
// container). Free slots are left to the caller. Returns nullopt when the
// goal's arguments cannot be unified with the post schema.
struct WorldState;  // fwd
std::optional<std::map<std::string, std::string>> unify_goal(const ActionTemplate& tmpl,
                                                             const Predicate& goal,
                                                             const WorldState& view);

}  // namespace btfleet
