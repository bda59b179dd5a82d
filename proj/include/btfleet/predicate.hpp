#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "btfleet/common.hpp"

namespace btfleet {

enum class RobotClass { Arm, Quadruped, Drone };

std::string to_string(RobotClass cls);
RobotClass robot_class_from_string(const std::string& s);

// Closed condition vocabulary. Every grounded condition, goal and failure
// is one of these labels plus entity bindings.
enum class Label {
    ArmObjectFreeGrab,
    ArmContainClose,
    ArmContainOpen,
    ArmObjectInRange,
    ArmObjectInGrab,
    ArmObjectInTarget,
    ArmObjectOnTarget,
    QuadFreePath,
    QuadInRangeNoObject,
    QuadInRangeWithObject,
    QuadObjectFreeGrab,
    QuadContainClose,
    QuadContainOpen,
    QuadCanGetObject,
    QuadObjectInGrab,
    QuadObjectInTarget,
    QuadObjectOnTarget,
    DroneObjectInBasket,
    DroneOnGround,
    DroneInAirWithObject,
    DroneInAirNoObject,
    DroneInRangeWithObject,
    DroneInRangeNoObject,
    DroneAtTargetWithObject,
    DroneAtTargetNoObject,
    DronePathFree,
    // Idle-tree placeholder only; not part of any robot catalog.
    AlwaysTrue,
};

const std::vector<Label>& all_labels();
std::string to_string(Label label);
std::optional<Label> label_from_string(const std::string& s);

// Class that owns the label vocabulary (AlwaysTrue belongs to none).
std::optional<RobotClass> class_of_label(Label label);

// Arity of a label. Subject/target requirements are fixed per label;
// DroneObjectInBasket accepts an empty subject meaning "anything in the basket".
struct LabelArity {
    bool agent = false;
    bool subject = false;
    bool subject_optional = false;
    bool target = false;
};
LabelArity arity_of(Label label);

struct Predicate {
    Label label = Label::AlwaysTrue;
    std::string agent;    // robot id
    std::string subject;  // object id
    std::string target;   // object or location id
    bool desired = true;

    auto tie() const { return std::tie(label, agent, subject, target, desired); }
    bool operator==(const Predicate& o) const { return tie() == o.tie(); }
    bool operator!=(const Predicate& o) const { return !(*this == o); }
    bool operator<(const Predicate& o) const { return tie() < o.tie(); }
};

// Renders as Label?(subject, target)@agent with absent parts omitted and a
// leading ! when desired is false. Stable; used in traces and golden files.
std::string to_string(const Predicate& p);

// Throws InvalidPredicate if fields do not match the label arity.
void validate_predicate(const Predicate& p);

inline Predicate pred(Label label, std::string agent = "", std::string subject = "",
                      std::string target = "", bool desired = true) {
    return Predicate{label, std::move(agent), std::move(subject), std::move(target), desired};
}

}  // namespace btfleet
