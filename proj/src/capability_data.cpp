#include "btfleet/capability.hpp"

namespace btfleet {

// Canonical action library. The authoritative copy lives at
// data/capabilities.json; this translation unit embeds the same bytes so the
// library loads without filesystem access. A test pins both to the checksum.
namespace {
constexpr const char* kCanonicalLibrary = R"canonical({
  "format_version": 1,
  "classes": [
    {
      "class": "arm",
      "conditions": [
        "ArmContainOpen?",
        "ArmObjectInGrab?",
        "ArmContainClose?",
        "ArmObjectInTarget?",
        "ArmObjectFreeGrab?",
        "ArmObjectOnTarget?"
      ],
      "actions": [
        {
          "name": "Open",
          "slots": ["container"],
          "pre": [
            {"label": "ArmObjectFreeGrab?"},
            {"label": "ArmContainClose?", "subject": "container"}
          ],
          "post": [
            {"label": "ArmContainOpen?", "subject": "container"}
          ]
        },
        {
          "name": "Grab",
          "slots": ["object"],
          "pre": [
            {"label": "ArmObjectInRange?", "subject": "object"},
            {"label": "ArmContainOpen?", "subject": "object"}
          ],
          "post": [
            {"label": "ArmObjectInGrab?", "subject": "object"}
          ],
          "post_implied": [
            {"label": "ArmObjectFreeGrab?", "desired": false}
          ]
        },
        {
          "name": "Close",
          "slots": ["container"],
          "pre": [
            {"label": "ArmObjectFreeGrab?"},
            {"label": "ArmContainOpen?", "subject": "container"}
          ],
          "post": [
            {"label": "ArmContainClose?", "subject": "container"}
          ]
        },
        {
          "name": "PutInto",
          "slots": ["object", "container"],
          "pre": [
            {"label": "ArmObjectInGrab?", "subject": "object"},
            {"label": "ArmContainOpen?", "subject": "container"}
          ],
          "post": [
            {"label": "ArmObjectInTarget?", "subject": "object", "target": "container"},
            {"label": "ArmObjectFreeGrab?"}
          ]
        },
        {
          "name": "PutOn",
          "slots": ["object", "target"],
          "pre": [
            {"label": "ArmObjectInGrab?", "subject": "object"}
          ],
          "post": [
            {"label": "ArmObjectOnTarget?", "subject": "object", "target": "target"},
            {"label": "ArmObjectFreeGrab?"}
          ]
        }
      ]
    },
    {
      "class": "quadruped",
      "conditions": [
        "QuadInRangeNoObject?",
        "QuadInRangeWithObject?",
        "QuadContainOpen?",
        "QuadObjectInGrab?",
        "QuadContainClose?",
        "QuadObjectInTarget?",
        "QuadObjectFreeGrab?",
        "QuadObjectOnTarget?"
      ],
      "actions": [
        {
          "name": "MoveToNoObject",
          "slots": ["target"],
          "pre": [
            {"label": "QuadFreePath?", "target": "target"}
          ],
          "post": [
            {"label": "QuadInRangeNoObject?", "target": "target"}
          ]
        },
        {
          "name": "MoveToWithObject",
          "slots": ["target"],
          "pre": [
            {"label": "QuadFreePath?", "target": "target"},
            {"label": "QuadObjectFreeGrab?", "desired": false}
          ],
          "post": [
            {"label": "QuadInRangeWithObject?", "target": "target"}
          ],
          "pre_verbatim": [
            {"label": "QuadInRangeNoObject?", "target": "target"},
            {"label": "QuadObjectFreeGrab?"}
          ],
          "post_verbatim": [
            {"label": "QuadInRangeNoObject?", "target": "target"}
          ],
          "note": "published row is kept for the verbatim catalog view; the executable row is what grounding, planning and execution use"
        },
        {
          "name": "Open",
          "slots": ["container"],
          "pre": [
            {"label": "QuadObjectFreeGrab?"},
            {"label": "QuadContainClose?", "subject": "container"}
          ],
          "post": [
            {"label": "QuadContainOpen?", "subject": "container"}
          ],
          "note": "published precondition 'ContainClose?' is stored with the class prefix"
        },
        {
          "name": "Grab",
          "slots": ["object"],
          "pre": [
            {"label": "QuadCanGetObject?", "subject": "object"},
            {"label": "QuadInRangeNoObject?", "target": "object"},
            {"label": "QuadObjectFreeGrab?"},
            {"label": "QuadContainOpen?", "subject": "object"}
          ],
          "post": [
            {"label": "QuadObjectInGrab?", "subject": "object"}
          ],
          "post_implied": [
            {"label": "QuadObjectFreeGrab?", "desired": false}
          ]
        },
        {
          "name": "Close",
          "slots": ["container"],
          "pre": [
            {"label": "QuadObjectFreeGrab?"},
            {"label": "QuadContainOpen?", "subject": "container"}
          ],
          "post": [
            {"label": "QuadContainClose?", "subject": "container"}
          ]
        },
        {
          "name": "PutInto",
          "slots": ["object", "container"],
          "pre": [
            {"label": "QuadInRangeWithObject?", "target": "container"},
            {"label": "QuadContainOpen?", "subject": "container"},
            {"label": "QuadObjectInGrab?", "subject": "object"}
          ],
          "post": [
            {"label": "QuadObjectInTarget?", "subject": "object", "target": "container"},
            {"label": "QuadObjectFreeGrab?"}
          ]
        },
        {
          "name": "PutOn",
          "slots": ["object", "target"],
          "pre": [
            {"label": "QuadInRangeWithObject?", "target": "target"},
            {"label": "QuadObjectInGrab?", "subject": "object"}
          ],
          "post": [
            {"label": "QuadObjectOnTarget?", "subject": "object", "target": "target"},
            {"label": "QuadObjectFreeGrab?"}
          ]
        }
      ]
    },
    {
      "class": "drone",
      "conditions": [
        "DroneInAirWithObject?",
        "DroneAtTargetWithObject?",
        "DroneOnGround?",
        "DroneInRangeWithObject?",
        "DroneInAirNoObject?",
        "DroneAtTargetNoObject?",
        "DroneInRangeNoObject?"
      ],
      "actions": [
        {
          "name": "TakeOffWithObject",
          "slots": [],
          "pre": [
            {"label": "DroneObjectInBasket?"},
            {"label": "DroneOnGround?"}
          ],
          "post": [
            {"label": "DroneInAirWithObject?"}
          ]
        },
        {
          "name": "LandOnWithObject",
          "slots": ["target"],
          "pre": [
            {"label": "DroneObjectInBasket?"},
            {"label": "DroneInAirWithObject?"},
            {"label": "DroneInRangeWithObject?", "target": "target"}
          ],
          "post": [
            {"label": "DroneAtTargetWithObject?", "target": "target"},
            {"label": "DroneOnGround?"}
          ]
        },
        {
          "name": "MoveToWithObject",
          "slots": ["target"],
          "pre": [
            {"label": "DroneObjectInBasket?"},
            {"label": "DroneInAirWithObject?"},
            {"label": "DronePathFree?", "target": "target"}
          ],
          "post": [
            {"label": "DroneInRangeWithObject?", "target": "target"}
          ]
        },
        {
          "name": "TakeOffNoObject",
          "slots": [],
          "pre": [
            {"label": "DroneOnGround?"}
          ],
          "post": [
            {"label": "DroneInAirNoObject?"}
          ]
        },
        {
          "name": "LandOnNoObject",
          "slots": ["target"],
          "pre": [
            {"label": "DroneInRangeNoObject?", "target": "target"}
          ],
          "post": [
            {"label": "DroneAtTargetNoObject?", "target": "target"},
            {"label": "DroneOnGround?"}
          ]
        },
        {
          "name": "MoveToNoObject",
          "slots": ["target"],
          "pre": [
            {"label": "DronePathFree?", "target": "target"},
            {"label": "DroneInAirNoObject?"}
          ],
          "post": [
            {"label": "DroneInRangeNoObject?", "target": "target"}
          ],
          "pre_verbatim": [
            {"label": "DronePathFree?", "target": "target"},
            {"label": "DroneInAirNoObject?"},
            {"label": "DronePathFree?", "target": "target"}
          ],
          "note": "the duplicated path condition is kept only in the verbatim view"
        }
      ]
    }
  ]
}
)canonical";
}

std::string_view canonical_library_text() { return kCanonicalLibrary; }

uint64_t canonical_library_checksum() { return 0xa89ced6f860cfba5ull; }

}  // namespace btfleet
