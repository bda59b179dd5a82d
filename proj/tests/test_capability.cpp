#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "btfleet/capability.hpp"
#include "btfleet/world.hpp"

using namespace btfleet;

namespace {

// Independent transcription of the published action sheet: rows as
// (name, [pre labels], [post labels]), bindings ignored. The canonical data
// file must match these rows exactly (the executable view, with the three
// documented fixes: prefixed ContainClose?, deduplicated DronePathFree?, and
// the corrected with-object move row kept alongside its verbatim form).
struct Row {
    const char* name;
    std::vector<const char*> pre;
    std::vector<const char*> post;
};

const std::vector<Row> kArmRows = {
    {"Open", {"ArmObjectFreeGrab?", "ArmContainClose?"}, {"ArmContainOpen?"}},
    {"Grab", {"ArmObjectInRange?", "ArmContainOpen?"}, {"ArmObjectInGrab?"}},
    {"Close", {"ArmObjectFreeGrab?", "ArmContainOpen?"}, {"ArmContainClose?"}},
    {"PutInto", {"ArmObjectInGrab?", "ArmContainOpen?"}, {"ArmObjectInTarget?", "ArmObjectFreeGrab?"}},
    {"PutOn", {"ArmObjectInGrab?"}, {"ArmObjectOnTarget?", "ArmObjectFreeGrab?"}},
};

const std::vector<Row> kQuadVerbatimRows = {
    {"MoveToNoObject", {"QuadFreePath?"}, {"QuadInRangeNoObject?"}},
    {"MoveToWithObject", {"QuadInRangeNoObject?", "QuadObjectFreeGrab?"}, {"QuadInRangeNoObject?"}},
    {"Open", {"QuadObjectFreeGrab?", "QuadContainClose?"}, {"QuadContainOpen?"}},
    {"Grab",
     {"QuadCanGetObject?", "QuadInRangeNoObject?", "QuadObjectFreeGrab?", "QuadContainOpen?"},
     {"QuadObjectInGrab?"}},
    {"Close", {"QuadObjectFreeGrab?", "QuadContainOpen?"}, {"QuadContainClose?"}},
    {"PutInto",
     {"QuadInRangeWithObject?", "QuadContainOpen?", "QuadObjectInGrab?"},
     {"QuadObjectInTarget?", "QuadObjectFreeGrab?"}},
    {"PutOn",
     {"QuadInRangeWithObject?", "QuadObjectInGrab?"},
     {"QuadObjectOnTarget?", "QuadObjectFreeGrab?"}},
};

const std::vector<Row> kDroneRows = {
    {"TakeOffWithObject", {"DroneObjectInBasket?", "DroneOnGround?"}, {"DroneInAirWithObject?"}},
    {"LandOnWithObject",
     {"DroneObjectInBasket?", "DroneInAirWithObject?", "DroneInRangeWithObject?"},
     {"DroneAtTargetWithObject?", "DroneOnGround?"}},
    {"MoveToWithObject",
     {"DroneObjectInBasket?", "DroneInAirWithObject?", "DronePathFree?"},
     {"DroneInRangeWithObject?"}},
    {"TakeOffNoObject", {"DroneOnGround?"}, {"DroneInAirNoObject?"}},
    {"LandOnNoObject", {"DroneInRangeNoObject?"}, {"DroneAtTargetNoObject?", "DroneOnGround?"}},
    {"MoveToNoObject", {"DronePathFree?", "DroneInAirNoObject?"}, {"DroneInRangeNoObject?"}},
};

std::vector<std::string> labels_of(const std::vector<PredSchema>& schemas) {
    std::vector<std::string> out;
    for (const auto& s : schemas) out.push_back((s.desired ? "" : "!") + to_string(s.label));
    return out;
}

std::vector<std::string> labels_of(const std::vector<const char*>& names) {
    return {names.begin(), names.end()};
}

void check_rows(RobotClass cls, const std::vector<Row>& rows, bool verbatim) {
    const auto& actions = registry_for(cls);
    REQUIRE(actions.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        INFO(to_string(cls), "/", rows[i].name, verbatim ? " (verbatim)" : "");
        CHECK(actions[i].name == rows[i].name);
        CHECK(labels_of(verbatim ? actions[i].pre_verbatim : actions[i].pre) ==
              labels_of(rows[i].pre));
        CHECK(labels_of(verbatim ? actions[i].post_verbatim : actions[i].post) ==
              labels_of(rows[i].post));
    }
}

}  // namespace

TEST_CASE("registry cardinalities: 5/6 arm, 7/8 quadruped, 6/7 drone") {
    CHECK(registry_for(RobotClass::Arm).size() == 5);
    CHECK(condition_labels(RobotClass::Arm).size() == 6);
    CHECK(registry_for(RobotClass::Quadruped).size() == 7);
    CHECK(condition_labels(RobotClass::Quadruped).size() == 8);
    CHECK(registry_for(RobotClass::Drone).size() == 6);
    CHECK(condition_labels(RobotClass::Drone).size() == 7);
}

TEST_CASE("canonical file is checksum-guarded and matches the shipped copy") {
    CHECK(fnv1a64(canonical_library_text()) == canonical_library_checksum());
    std::ifstream in("data/capabilities.json");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == canonical_library_text());
}

TEST_CASE("published rows match the canonical data") {
    check_rows(RobotClass::Arm, kArmRows, false);
    check_rows(RobotClass::Drone, kDroneRows, false);
    // Quadruped rows carry the published text in the verbatim fields.
    check_rows(RobotClass::Quadruped, kQuadVerbatimRows, true);
    // The executable with-object move row is the documented correction.
    const auto& move = *library().find(RobotClass::Quadruped, "MoveToWithObject");
    CHECK(labels_of(move.pre) ==
          std::vector<std::string>{"QuadFreePath?", "!QuadObjectFreeGrab?"});
    CHECK(labels_of(move.post) == std::vector<std::string>{"QuadInRangeWithObject?"});
    // The published drone move row lists its path condition twice.
    const auto& dmove = *library().find(RobotClass::Drone, "MoveToNoObject");
    CHECK(dmove.pre_verbatim.size() == 3);
    CHECK(dmove.pre.size() == 2);
}

TEST_CASE("condition catalogs are the distinct achievable effects") {
    for (RobotClass cls : {RobotClass::Arm, RobotClass::Quadruped, RobotClass::Drone}) {
        std::set<Label> achievable;
        for (const auto& tmpl : registry_for(cls))
            for (const auto& s : tmpl.post) achievable.insert(s.label);
        std::set<Label> catalog(condition_labels(cls).begin(), condition_labels(cls).end());
        CHECK(catalog == achievable);
    }
}

TEST_CASE("every post label is recoverable through capability_check") {
    for (RobotClass cls : {RobotClass::Arm, RobotClass::Quadruped, RobotClass::Drone}) {
        for (const auto& tmpl : registry_for(cls)) {
            for (const auto& s : tmpl.post) {
                Predicate goal;
                goal.label = s.label;
                auto capable = capability_check(goal, cls, CatalogMode::Corrected);
                const bool found =
                    std::find(capable.begin(), capable.end(), &tmpl) != capable.end();
                CHECK_MESSAGE(found, to_string(cls), "/", tmpl.name, " post ", to_string(s.label));
            }
        }
    }
}

TEST_CASE("class libraries are pairwise unequal") {
    auto names = [](RobotClass cls) {
        std::set<std::string> out;
        for (const auto& t : registry_for(cls)) out.insert(to_string(cls) + "/" + t.name);
        return out;
    };
    CHECK(names(RobotClass::Arm) != names(RobotClass::Quadruped));
    CHECK(names(RobotClass::Quadruped) != names(RobotClass::Drone));
    CHECK(names(RobotClass::Arm) != names(RobotClass::Drone));
}

TEST_CASE("ground") {
    const auto& grab = *library().find(RobotClass::Arm, "Grab");
    SUBCASE("substitutes slots into the schemas") {
        auto inst = ground(grab, "arm1", RobotClass::Arm, {{"object", "cup"}});
        REQUIRE(inst.pre.size() == 2);
        CHECK(inst.pre[0] == pred(Label::ArmObjectInRange, "arm1", "cup"));
        CHECK(inst.pre[1] == pred(Label::ArmContainOpen, "arm1", "cup"));
        REQUIRE(inst.post.size() == 1);
        CHECK(inst.post[0] == pred(Label::ArmObjectInGrab, "arm1", "cup"));
    }
    SUBCASE("class mismatch") {
        CHECK_THROWS_AS(ground(grab, "drone1", RobotClass::Drone, {{"object", "cup"}}), ClassMismatch);
    }
    SUBCASE("incomplete binding") {
        CHECK_THROWS_AS(ground(grab, "arm1", RobotClass::Arm, {}), IncompleteBinding);
    }
    SUBCASE("unknown slot") {
        CHECK_THROWS_AS(ground(grab, "arm1", RobotClass::Arm, {{"object", "cup"}, {"lid", "x"}}),
                        InvalidBinding);
    }
}

TEST_CASE("capability_check") {
    SUBCASE("arm grasp") {
        auto capable = capability_check(pred(Label::ArmObjectInGrab, "arm1", "cup"), RobotClass::Arm);
        REQUIRE(capable.size() == 1);
        CHECK(capable[0]->name == "Grab");
    }
    SUBCASE("verbatim catalog lists both quadruped moves for the no-object range") {
        auto capable =
            capability_check(pred(Label::QuadInRangeNoObject, "quad1", "", "x"), RobotClass::Quadruped);
        REQUIRE(capable.size() == 2);
        CHECK(capable[0]->name == "MoveToNoObject");
        CHECK(capable[1]->name == "MoveToWithObject");
        // the corrected view routes the with-object move to its own effect
        auto corrected = capability_check(pred(Label::QuadInRangeNoObject, "quad1", "", "x"),
                                          RobotClass::Quadruped, CatalogMode::Corrected);
        REQUIRE(corrected.size() == 1);
        CHECK(corrected[0]->name == "MoveToNoObject");
    }
    SUBCASE("cross-class goals are unreachable") {
        CHECK(capability_check(pred(Label::DroneOnGround, "drone1"), RobotClass::Arm).empty());
    }
}

TEST_CASE("goal unification resolves container slots through containment") {
    WorldState w;
    w.locations["a"] = {"a", 0, 0, false};
    ObjectInfo fridge;
    fridge.id = "fridge";
    fridge.at = "a";
    fridge.container = true;
    w.objects["fridge"] = fridge;
    ObjectInfo apple;
    apple.id = "apple";
    apple.in_container = "fridge";
    w.objects["apple"] = apple;
    RobotInfo arm;
    arm.id = "arm1";
    arm.cls = RobotClass::Arm;
    arm.at = "a";
    arm.reach = {"a"};
    w.robots["arm1"] = arm;
    w.robot_order = {"arm1"};
    validate_world(w);

    const auto& open = *library().find(RobotClass::Arm, "Open");
    auto direct = unify_goal(open, pred(Label::ArmContainOpen, "arm1", "fridge"), w);
    REQUIRE(direct.has_value());
    CHECK(direct->at("container") == "fridge");
    auto through = unify_goal(open, pred(Label::ArmContainOpen, "arm1", "apple"), w);
    REQUIRE(through.has_value());
    CHECK(through->at("container") == "fridge");
}

TEST_CASE("mutated library files load through the same parser") {
    // Drop one drone action; the parse succeeds but the canonical cardinality
    // guard in library() would reject it, so mutated libraries stay test-only.
    std::string text(canonical_library_text());
    const auto pos = text.find("\"name\": \"TakeOffNoObject\"");
    REQUIRE(pos != std::string::npos);
    const auto start = text.rfind('{', pos);
    auto depth = 0;
    size_t end = start;
    do {
        if (text[end] == '{') ++depth;
        if (text[end] == '}') --depth;
        ++end;
    } while (depth > 0);
    if (text[end] == ',') ++end;
    text.erase(start, end - start);
    Library mutated = parse_library(text);
    CHECK(mutated.for_class(RobotClass::Drone).actions.size() == 5);
}
