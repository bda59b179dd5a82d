#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace btfleet {

struct Error : std::runtime_error {
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind(std::move(kind)) {}
    std::string kind;
};

#define BTFLEET_ERROR(Name)                                              \
    struct Name : Error {                                                \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}     \
    }

BTFLEET_ERROR(MalformedTree);
BTFLEET_ERROR(EmptyGoal);
BTFLEET_ERROR(GoalNotAchieved);
BTFLEET_ERROR(EmptyActions);
BTFLEET_ERROR(NodeNotFound);
BTFLEET_ERROR(TargetNotLeaf);
BTFLEET_ERROR(UnknownEntity);
BTFLEET_ERROR(InvalidPredicate);
BTFLEET_ERROR(PreconditionViolated);
BTFLEET_ERROR(SchemaError);
BTFLEET_ERROR(ClassMismatch);
BTFLEET_ERROR(IncompleteBinding);
BTFLEET_ERROR(InvalidBinding);
BTFLEET_ERROR(ParseError);
BTFLEET_ERROR(UnknownPredicate);
BTFLEET_ERROR(CapabilityViolation);
BTFLEET_ERROR(PlannerContractViolation);
BTFLEET_ERROR(ConfigError);
BTFLEET_ERROR(EmptyOutcomes);
BTFLEET_ERROR(IoError);

#undef BTFLEET_ERROR

// FNV-1a, the project-wide stable hash. std::hash is implementation-defined
// and must never feed seeds, file names, or transcript keys.
inline uint64_t fnv1a64(std::string_view s, uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Derives an independent sub-seed from a base seed and a string key.
inline uint64_t derive_seed(uint64_t base, std::string_view key) {
    return fnv1a64(key, fnv1a64(std::to_string(base)));
}

}  // namespace btfleet
