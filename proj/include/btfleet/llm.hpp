#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btfleet/mcts.hpp"
#include "btfleet/planning.hpp"

namespace btfleet {

// A fully rendered model request. Rendering is deterministic: identical
// inputs produce byte-identical prompts, and the transcript store keys on the
// prompt bytes.
struct PromptBundle {
    std::string system_preamble;
    std::string node_vocabulary;
    std::string context;
    std::string expected_schema;

    std::string text() const;
};

struct ModelTranscript {
    std::string request_hash;
    std::string prompt;
    std::string response;
    std::string parse_outcome;
    int64_t timestamp = 0;  // reserved; kept zero so fixtures regenerate byte-stable
};

// Directory of hashed transcript files ("<fnv64(prompt)>.json").
class TranscriptStore {
  public:
    explicit TranscriptStore(std::string dir) : dir_(std::move(dir)) {}
    std::optional<ModelTranscript> find(const std::string& prompt) const;
    void put(const std::string& prompt, const std::string& response, const std::string& outcome) const;
    const std::string& dir() const { return dir_; }

  private:
    std::string dir_;
};

enum class LlmMode { Live, Record, Replay };
LlmMode llm_mode_from_string(const std::string& s);
std::string to_string(LlmMode m);

struct LlmOptions {
    LlmMode mode = LlmMode::Replay;
    std::string transcript_dir = "fixtures/transcripts";
    std::string endpoint = "builtin:oracle";  // or an HTTP base URL
    std::string model;
    std::string api_key;

    static LlmOptions from_env(LlmMode mode, std::string transcript_dir);
};

// One-in-flight completion client. Replay never touches the network and
// fails loudly on unknown prompts; record consults the endpoint (or the
// caller-supplied builtin responder) and appends to the store.
class LlmClient {
  public:
    explicit LlmClient(LlmOptions opts);
    std::string complete(const std::string& prompt,
                         const std::function<std::string()>& builtin_responder) const;
    const LlmOptions& options() const { return opts_; }

  private:
    LlmOptions opts_;
    TranscriptStore store_;
};

// --- Prompt construction -------------------------------------------------

PromptBundle build_init_prompt(const std::string& instruction, const std::vector<Label>& vocabulary,
                               const WorldState& scenario);

PromptBundle build_help_prompt(const FailureRecord& failure, const PlannerContext& ctx);

PromptBundle build_prior_prompt(RobotClass cls, Label goal_label);

// --- Response grammar ----------------------------------------------------

std::string render_goals_response(const std::vector<Predicate>& goals);
std::string render_assignment_response(const std::optional<AssignmentDecision>& decision);
std::string render_priors_response(RobotClass cls, Label goal_label);

// Strict parse of a GOALS block. Labels must come from `vocabulary`
// (UnknownPredicate otherwise) and entities from the scenario
// (UnknownEntity); malformed structure or out-of-order indices raise
// ParseError. Every error message carries the offending line.
std::vector<Predicate> parse_goal_conditions(const std::string& response,
                                             const std::vector<Label>& vocabulary,
                                             const WorldState& scenario);

// Strict parse of an ASSIGN block into a validated decision. nullopt for the
// explicit "ASSIGN none" refusal. Throws ParseError / UnknownEntity /
// UnknownPredicate / CapabilityViolation.
std::optional<AssignmentDecision> parse_assignment(const std::string& response,
                                                   const FailureRecord& failure,
                                                   const WorldState& view);

std::map<std::string, double> parse_priors(const std::string& response, RobotClass cls);

// --- Planners ------------------------------------------------------------

// The language-model allocator path: help prompt, completion, strict parse,
// up to 3 re-queries with the parse error appended, then oracle fallback
// tagged in the rationale.
class LlmPlanner : public PlannerPort {
  public:
    explicit LlmPlanner(std::shared_ptr<LlmClient> client) : client_(std::move(client)) {}
    std::string name() const override { return "llm"; }
    std::optional<AssignmentDecision> propose(const FailureRecord& failure,
                                              const PlannerContext& ctx) override;

  private:
    OraclePlanner oracle_;
    std::shared_ptr<LlmClient> client_;
};

// MCTS with rollout priors scored through the model bridge.
class LlmMctsPlanner : public PlannerPort {
  public:
    LlmMctsPlanner(int budget, int depth, uint64_t seed, std::shared_ptr<LlmClient> client)
        : budget_(budget), depth_(depth), seed_(seed), client_(std::move(client)) {}
    std::string name() const override { return "llm-mcts"; }
    bool plans_on_full_world() const override { return true; }
    std::optional<AssignmentDecision> propose(const FailureRecord& failure,
                                              const PlannerContext& ctx) override;

  private:
    int budget_;
    int depth_;
    uint64_t seed_;
    std::shared_ptr<LlmClient> client_;
};

// Instruction -> ordered goal predicates through the model bridge, with the
// authoritative goals as the builtin responder (fixture generation).
std::vector<Predicate> llm_goal_decomposition(const LlmClient& client, const std::string& instruction,
                                              const WorldState& scenario,
                                              const std::vector<Predicate>& authoritative_goals);

}  // namespace btfleet
