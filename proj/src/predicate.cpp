#include "btfleet/predicate.hpp"

#include <array>
#include <map>

namespace btfleet {

std::string to_string(RobotClass cls) {
    switch (cls) {
        case RobotClass::Arm: return "arm";
        case RobotClass::Quadruped: return "quadruped";
        case RobotClass::Drone: return "drone";
    }
    return "?";
}

RobotClass robot_class_from_string(const std::string& s) {
    if (s == "arm") return RobotClass::Arm;
    if (s == "quadruped") return RobotClass::Quadruped;
    if (s == "drone") return RobotClass::Drone;
    throw SchemaError("unknown robot class '" + s + "'");
}

namespace {

struct LabelInfo {
    Label label;
    const char* name;
    LabelArity arity;
};

// agent, subject, subject_optional, target
constexpr std::array<LabelInfo, 27> kLabels{{
    {Label::ArmObjectFreeGrab, "ArmObjectFreeGrab?", {true, false, false, false}},
    {Label::ArmContainClose, "ArmContainClose?", {true, true, false, false}},
    {Label::ArmContainOpen, "ArmContainOpen?", {true, true, false, false}},
    {Label::ArmObjectInRange, "ArmObjectInRange?", {true, true, false, false}},
    {Label::ArmObjectInGrab, "ArmObjectInGrab?", {true, true, false, false}},
    {Label::ArmObjectInTarget, "ArmObjectInTarget?", {true, true, false, true}},
    {Label::ArmObjectOnTarget, "ArmObjectOnTarget?", {true, true, false, true}},
    {Label::QuadFreePath, "QuadFreePath?", {true, false, false, true}},
    {Label::QuadInRangeNoObject, "QuadInRangeNoObject?", {true, false, false, true}},
    {Label::QuadInRangeWithObject, "QuadInRangeWithObject?", {true, false, false, true}},
    {Label::QuadObjectFreeGrab, "QuadObjectFreeGrab?", {true, false, false, false}},
    {Label::QuadContainClose, "QuadContainClose?", {true, true, false, false}},
    {Label::QuadContainOpen, "QuadContainOpen?", {true, true, false, false}},
    {Label::QuadCanGetObject, "QuadCanGetObject?", {true, true, false, false}},
    {Label::QuadObjectInGrab, "QuadObjectInGrab?", {true, true, false, false}},
    {Label::QuadObjectInTarget, "QuadObjectInTarget?", {true, true, false, true}},
    {Label::QuadObjectOnTarget, "QuadObjectOnTarget?", {true, true, false, true}},
    {Label::DroneObjectInBasket, "DroneObjectInBasket?", {true, true, true, false}},
    {Label::DroneOnGround, "DroneOnGround?", {true, false, false, false}},
    {Label::DroneInAirWithObject, "DroneInAirWithObject?", {true, false, false, false}},
    {Label::DroneInAirNoObject, "DroneInAirNoObject?", {true, false, false, false}},
    {Label::DroneInRangeWithObject, "DroneInRangeWithObject?", {true, false, false, true}},
    {Label::DroneInRangeNoObject, "DroneInRangeNoObject?", {true, false, false, true}},
    {Label::DroneAtTargetWithObject, "DroneAtTargetWithObject?", {true, false, false, true}},
    {Label::DroneAtTargetNoObject, "DroneAtTargetNoObject?", {true, false, false, true}},
    {Label::DronePathFree, "DronePathFree?", {true, false, false, true}},
    {Label::AlwaysTrue, "AlwaysTrue?", {false, false, false, false}},
}};

const LabelInfo& info_of(Label label) {
    for (const auto& li : kLabels) {
        if (li.label == label) return li;
    }
    throw InvalidPredicate("unknown label enum value");
}

}  // namespace

const std::vector<Label>& all_labels() {
    static const std::vector<Label> labels = [] {
        std::vector<Label> out;
        for (const auto& li : kLabels) out.push_back(li.label);
        return out;
    }();
    return labels;
}

std::string to_string(Label label) { return info_of(label).name; }

std::optional<Label> label_from_string(const std::string& s) {
    for (const auto& li : kLabels) {
        if (s == li.name) return li.label;
    }
    return std::nullopt;
}

std::optional<RobotClass> class_of_label(Label label) {
    const std::string name = to_string(label);
    if (name.rfind("Arm", 0) == 0) return RobotClass::Arm;
    if (name.rfind("Quad", 0) == 0) return RobotClass::Quadruped;
    if (name.rfind("Drone", 0) == 0) return RobotClass::Drone;
    return std::nullopt;
}

LabelArity arity_of(Label label) { return info_of(label).arity; }

std::string to_string(const Predicate& p) {
    std::string out;
    if (!p.desired) out += "!";
    out += to_string(p.label);
    if (!p.subject.empty() || !p.target.empty()) {
        out += "(" + p.subject;
        if (!p.target.empty()) out += (p.subject.empty() ? "" : ", ") + p.target;
        out += ")";
    }
    if (!p.agent.empty()) out += "@" + p.agent;
    return out;
}

void validate_predicate(const Predicate& p) {
    const LabelArity a = arity_of(p.label);
    if (a.agent && p.agent.empty())
        throw InvalidPredicate(to_string(p.label) + " requires an agent");
    if (!a.agent && !p.agent.empty())
        throw InvalidPredicate(to_string(p.label) + " takes no agent");
    if (a.subject && !a.subject_optional && p.subject.empty())
        throw InvalidPredicate(to_string(p.label) + " requires a subject");
    if (!a.subject && !p.subject.empty())
        throw InvalidPredicate(to_string(p.label) + " takes no subject");
    if (a.target && p.target.empty())
        throw InvalidPredicate(to_string(p.label) + " requires a target");
    if (!a.target && !p.target.empty())
        throw InvalidPredicate(to_string(p.label) + " takes no target");
}

}  // namespace btfleet
