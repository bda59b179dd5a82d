#include "btfleet/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace btfleet {

using nlohmann::json;
namespace fs = std::filesystem;

std::string PromptBundle::text() const {
    return "SYSTEM\n" + system_preamble + "VOCABULARY\n" + node_vocabulary + "CONTEXT\n" + context +
           "RESPOND\n" + expected_schema;
}

LlmMode llm_mode_from_string(const std::string& s) {
    if (s == "live") return LlmMode::Live;
    if (s == "record") return LlmMode::Record;
    if (s == "replay") return LlmMode::Replay;
    throw ConfigError("unknown llm mode '" + s + "'");
}

std::string to_string(LlmMode m) {
    switch (m) {
        case LlmMode::Live: return "live";
        case LlmMode::Record: return "record";
        case LlmMode::Replay: return "replay";
    }
    return "?";
}

LlmOptions LlmOptions::from_env(LlmMode mode, std::string transcript_dir) {
    LlmOptions opts;
    opts.mode = mode;
    opts.transcript_dir = std::move(transcript_dir);
    if (const char* v = std::getenv("BTFLEET_LLM_BASE_URL")) opts.endpoint = v;
    if (const char* v = std::getenv("BTFLEET_LLM_MODEL")) opts.model = v;
    if (const char* v = std::getenv("BTFLEET_LLM_API_KEY")) opts.api_key = v;
    return opts;
}

std::optional<ModelTranscript> TranscriptStore::find(const std::string& prompt) const {
    const std::string hash = hex64(fnv1a64(prompt));
    const fs::path path = fs::path(dir_) / (hash + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw IoError("transcript " + path.string() + ": " + e.what());
    }
    ModelTranscript t;
    t.request_hash = j.value("request_hash", "");
    t.prompt = j.value("prompt", "");
    t.response = j.value("response", "");
    t.parse_outcome = j.value("parse_outcome", "");
    t.timestamp = j.value("timestamp", 0);
    if (t.request_hash != hash || t.prompt != prompt)
        throw IoError("transcript " + path.string() + " does not match its prompt hash");
    return t;
}

void TranscriptStore::put(const std::string& prompt, const std::string& response,
                          const std::string& outcome) const {
    fs::create_directories(dir_);
    const std::string hash = hex64(fnv1a64(prompt));
    json j;
    j["request_hash"] = hash;
    j["prompt"] = prompt;
    j["response"] = response;
    j["parse_outcome"] = outcome;
    j["timestamp"] = 0;
    std::ofstream out(fs::path(dir_) / (hash + ".json"));
    if (!out) throw IoError("cannot write transcript in " + dir_);
    out << j.dump(2) << "\n";
}

LlmClient::LlmClient(LlmOptions opts) : opts_(std::move(opts)), store_(opts_.transcript_dir) {}

namespace {

std::string http_complete(const LlmOptions& opts, const std::string& prompt);

}  // namespace

std::string LlmClient::complete(const std::string& prompt,
                                const std::function<std::string()>& builtin_responder) const {
    switch (opts_.mode) {
        case LlmMode::Replay: {
            auto t = store_.find(prompt);
            if (!t)
                throw IoError("replay transcript missing for prompt hash " + hex64(fnv1a64(prompt)));
            return t->response;
        }
        case LlmMode::Record: {
            std::string response;
            if (opts_.endpoint == "builtin:oracle") {
                if (!builtin_responder) throw ConfigError("builtin endpoint needs a responder");
                response = builtin_responder();
            } else {
                response = http_complete(opts_, prompt);
            }
            store_.put(prompt, response, "ok");
            return response;
        }
        case LlmMode::Live:
            return http_complete(opts_, prompt);
    }
    throw ConfigError("bad llm mode");
}

// --- Rendering helpers -----------------------------------------------------

namespace {

std::string render_schema(const PredSchema& s) {
    std::string out = to_string(s.label);
    if (!s.desired) out = "!" + out;
    std::vector<std::string> refs;
    if (s.subject != SlotRef::None)
        refs.push_back(std::string("subject=") + (s.subject == SlotRef::Object ? "object" : s.subject == SlotRef::Container ? "container" : "target"));
    if (s.target != SlotRef::None)
        refs.push_back(std::string("target=") + (s.target == SlotRef::Object ? "object" : s.target == SlotRef::Container ? "container" : "target"));
    if (!refs.empty()) {
        out += "(";
        for (size_t i = 0; i < refs.size(); ++i) out += (i ? "," : "") + refs[i];
        out += ")";
    }
    return out;
}

std::string render_catalog(RobotClass cls) {
    std::string out = "catalog class=" + to_string(cls) + "\n";
    out += "  conditions:";
    for (const Label l : condition_labels(cls)) out += " " + to_string(l);
    out += "\n";
    for (const auto& tmpl : registry_for(cls)) {
        out += "  action " + tmpl.name + " slots=[";
        for (size_t i = 0; i < tmpl.slots.size(); ++i) out += (i ? "," : "") + tmpl.slots[i];
        out += "] pre=[";
        for (size_t i = 0; i < tmpl.pre.size(); ++i)
            out += (i ? "," : "") + render_schema(tmpl.pre[i]);
        out += "] post=[";
        for (size_t i = 0; i < tmpl.post.size(); ++i)
            out += (i ? "," : "") + render_schema(tmpl.post[i]);
        out += "]\n";
    }
    return out;
}

std::string render_observation(const Observation& obs) {
    std::string out = "observation robot=" + obs.robot + " tick=" + std::to_string(obs.tick) + "\n";
    for (const auto& [id, r] : obs.view.robots) {
        out += "  robot " + id + " class=" + to_string(r.cls) + " at=" + r.at;
        if (r.holding) out += " holding=" + *r.holding;
        if (r.airborne) out += " airborne";
        out += "\n";
    }
    for (const auto& [id, o] : obs.view.objects) {
        out += "  object " + id;
        if (o.held_by)
            out += " held_by=" + *o.held_by;
        else if (o.in_container)
            out += " in=" + *o.in_container;
        else if (o.on_surface)
            out += " on=" + *o.on_surface;
        else if (o.attached_to)
            out += " attached_to=" + *o.attached_to;
        else
            out += " at=" + o.at;
        if (o.container) out += o.open ? " open" : " closed";
        if (o.surface) out += " surface";
        out += "\n";
    }
    for (const auto& e : obs.view.blocked) out += "  blocked " + e.first + " " + e.second + "\n";
    return out;
}

std::string render_entities(const WorldState& w) {
    std::string out;
    for (const auto& [id, loc] : w.locations) out += "  location " + id + "\n";
    for (const auto& [id, o] : w.objects) {
        out += "  object " + id;
        if (o.container) out += " container";
        if (o.surface) out += " surface";
        out += "\n";
    }
    for (const auto& id : w.robot_order)
        out += "  robot " + id + " class=" + to_string(w.robots.at(id).cls) + "\n";
    return out;
}

std::string field_or_dash(const std::string& s) { return s.empty() ? "-" : s; }

}  // namespace

PromptBundle build_init_prompt(const std::string& instruction, const std::vector<Label>& vocabulary,
                               const WorldState& scenario) {
    if (instruction.empty()) throw EmptyGoal("instruction must be non-empty");
    if (vocabulary.empty()) throw ConfigError("init prompt needs a non-empty condition vocabulary");
    PromptBundle p;
    p.system_preamble =
        "You convert one task instruction into ordered goal conditions for a robot team.\n"
        "Use only the listed condition labels and entity names. One goal per line,\n"
        "in execution order. Example: GOAL 1 QuadObjectInTarget? quad1 apple fridge\n";
    p.node_vocabulary = "conditions:";
    for (const Label l : vocabulary) p.node_vocabulary += " " + to_string(l);
    p.node_vocabulary += "\n";
    p.context = "entities\n" + render_entities(scenario) + "instruction\n  " + instruction + "\n";
    p.expected_schema =
        "GOALS\n"
        "GOAL <index> <label> <agent|-> <subject|-> <target|->\n"
        "END\n";
    return p;
}

PromptBundle build_help_prompt(const FailureRecord& failure, const PlannerContext& ctx) {
    PromptBundle p;
    p.system_preamble =
        "You are Alex, the coordination service for a heterogeneous robot team.\n"
        "A robot reported a condition it cannot satisfy. Choose the robot best\n"
        "suited to make the condition true and give its action sequence, or\n"
        "answer ASSIGN none when no robot can help.\n";
    std::vector<RobotClass> classes;
    for (const auto& [id, obs] : ctx.observations) {
        RobotClass cls = ctx.merged.robots.at(id).cls;
        if (std::find(classes.begin(), classes.end(), cls) == classes.end()) classes.push_back(cls);
    }
    for (const RobotClass cls : classes) p.node_vocabulary += render_catalog(cls);

    p.context = "failure robot=" + failure.robot + " node=" + std::to_string(failure.node) +
                " predicate=" + to_string(failure.predicate) + "\n";
    p.context += "related actions\n";
    for (const RobotClass cls : classes)
        for (const ActionTemplate* tmpl : capability_check(failure.predicate, cls))
            p.context += "  " + to_string(cls) + "/" + tmpl->name + " pre=[" +
                         [&] {
                             std::string s;
                             for (size_t i = 0; i < tmpl->pre.size(); ++i)
                                 s += (i ? "," : "") + render_schema(tmpl->pre[i]);
                             return s;
                         }() +
                         "] post=[" +
                         [&] {
                             std::string s;
                             for (size_t i = 0; i < tmpl->post.size(); ++i)
                                 s += (i ? "," : "") + render_schema(tmpl->post[i]);
                             return s;
                         }() +
                         "]\n";
    for (const auto& [id, obs] : ctx.observations) p.context += render_observation(obs);
    p.expected_schema =
        "ASSIGN <robot|none>\n"
        "GOAL <label> <agent|-> <subject|-> <target|->\n"
        "ACTION <name> <object|-> <container-or-target|->\n"
        "END\n";
    return p;
}

PromptBundle build_prior_prompt(RobotClass cls, Label goal_label) {
    PromptBundle p;
    p.system_preamble =
        "Score how useful each action of this robot class is for reaching the\n"
        "goal condition, between 0 and 1.\n";
    p.node_vocabulary = render_catalog(cls);
    p.context = "goal " + to_string(goal_label) + "\n";
    p.expected_schema =
        "PRIORS\n"
        "PRIOR <action> <score>\n"
        "END\n";
    return p;
}

// --- Response rendering ------------------------------------------------------

std::string render_goals_response(const std::vector<Predicate>& goals) {
    std::string out = "GOALS\n";
    int index = 1;
    for (const auto& g : goals) {
        out += "GOAL " + std::to_string(index++) + " " + (g.desired ? "" : "!") + to_string(g.label) +
               " " + field_or_dash(g.agent) + " " + field_or_dash(g.subject) + " " +
               field_or_dash(g.target) + "\n";
    }
    out += "END\n";
    return out;
}

std::string render_assignment_response(const std::optional<AssignmentDecision>& decision) {
    if (!decision) return "ASSIGN none\nEND\n";
    const AssignmentDecision& d = *decision;
    std::string out = "ASSIGN " + d.chosen_robot + "\n";
    const Predicate& g = d.subtree_goal;
    out += "GOAL " + std::string(g.desired ? "" : "!") + to_string(g.label) + " " +
           field_or_dash(g.agent) + " " + field_or_dash(g.subject) + " " + field_or_dash(g.target) +
           "\n";
    for (const auto& a : d.actions) {
        std::string object, other;
        for (const auto& [slot, entity] : a.bindings) {
            if (slot == "object")
                object = entity;
            else
                other = entity;  // container or target; templates have at most one
        }
        out += "ACTION " + a.template_name + " " + field_or_dash(object) + " " + field_or_dash(other) +
               "\n";
    }
    out += "END\n";
    return out;
}

std::string render_priors_response(RobotClass cls, Label goal_label) {
    // Fixture heuristic for rollout priors: direct achievers score highest,
    // class-mates with a related effect family mid, the rest low.
    const std::string goal_name = to_string(goal_label);
    auto family = [](const std::string& label) {
        std::string f = label;
        for (const char* prefix : {"Arm", "Quad", "Drone"})
            if (f.rfind(prefix, 0) == 0) f = f.substr(std::string(prefix).size());
        return f;
    };
    std::string out = "PRIORS\n";
    for (const auto& tmpl : registry_for(cls)) {
        double score = 0.1;
        for (const auto& s : tmpl.post) {
            if (s.label == goal_label) {
                score = 0.9;
                break;
            }
            if (family(to_string(s.label)) == family(goal_name)) score = std::max(score, 0.6);
        }
        std::ostringstream os;
        os.precision(1);
        os << std::fixed << score;
        out += "PRIOR " + tmpl.name + " " + os.str() + "\n";
    }
    out += "END\n";
    return out;
}

// --- Parsing -----------------------------------------------------------------

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream is(line);
    std::string f;
    while (is >> f) fields.push_back(f);
    return fields;
}

std::string undash(const std::string& s) { return s == "-" ? "" : s; }

Predicate parse_predicate_fields(const std::string& label_field, const std::string& agent,
                                 const std::string& subject, const std::string& target,
                                 const std::string& line) {
    Predicate p;
    std::string name = label_field;
    if (!name.empty() && name[0] == '!') {
        p.desired = false;
        name = name.substr(1);
    }
    auto label = label_from_string(name);
    if (!label) throw UnknownPredicate("'" + name + "' in line: " + line);
    p.label = *label;
    p.agent = undash(agent);
    p.subject = undash(subject);
    p.target = undash(target);
    try {
        validate_predicate(p);
    } catch (const InvalidPredicate& e) {
        throw ParseError(std::string(e.what()) + " in line: " + line);
    }
    return p;
}

void require_known_entities(const Predicate& p, const WorldState& scenario, const std::string& line) {
    if (!p.agent.empty() && !scenario.robots.count(p.agent))
        throw UnknownEntity("'" + p.agent + "' in line: " + line);
    if (!p.subject.empty() && !entity_exists(scenario, p.subject))
        throw UnknownEntity("'" + p.subject + "' in line: " + line);
    if (!p.target.empty() && !entity_exists(scenario, p.target))
        throw UnknownEntity("'" + p.target + "' in line: " + line);
}

}  // namespace

std::vector<Predicate> parse_goal_conditions(const std::string& response,
                                             const std::vector<Label>& vocabulary,
                                             const WorldState& scenario) {
    const auto lines = split_lines(response);
    if (lines.empty() || lines.front() != "GOALS") throw ParseError("response must open with GOALS");
    std::vector<Predicate> goals;
    size_t i = 1;
    int expected_index = 1;
    for (; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line == "END") break;
        auto fields = split_fields(line);
        if (fields.size() != 6 || fields[0] != "GOAL")
            throw ParseError("expected 'GOAL <index> <label> <agent> <subject> <target>': " + line);
        int index;
        try {
            index = std::stoi(fields[1]);
        } catch (...) {
            throw ParseError("bad goal index in line: " + line);
        }
        if (index != expected_index)
            throw ParseError("goal index " + fields[1] + " out of order in line: " + line);
        ++expected_index;
        Predicate p = parse_predicate_fields(fields[2], fields[3], fields[4], fields[5], line);
        if (std::find(vocabulary.begin(), vocabulary.end(), p.label) == vocabulary.end())
            throw UnknownPredicate(to_string(p.label) + " is outside the offered vocabulary");
        require_known_entities(p, scenario, line);
        goals.push_back(std::move(p));
    }
    if (i >= lines.size()) throw ParseError("response missing END");
    if (goals.empty()) throw ParseError("response contains no goals");
    return goals;
}

std::optional<AssignmentDecision> parse_assignment(const std::string& response,
                                                   const FailureRecord& failure,
                                                   const WorldState& view) {
    const auto lines = split_lines(response);
    if (lines.empty()) throw ParseError("empty response");
    auto head = split_fields(lines.front());
    if (head.size() != 2 || head[0] != "ASSIGN")
        throw ParseError("response must open with 'ASSIGN <robot|none>': " + lines.front());
    if (head[1] == "none") {
        if (lines.size() < 2 || lines[1] != "END") throw ParseError("ASSIGN none must be followed by END");
        return std::nullopt;
    }
    const std::string robot = head[1];
    auto rit = view.robots.find(robot);
    if (rit == view.robots.end()) throw UnknownEntity("robot '" + robot + "'");
    const RobotClass cls = rit->second.cls;

    AssignmentDecision d;
    d.chosen_robot = robot;
    d.mode = robot == failure.robot ? AssignMode::Local : AssignMode::Delegated;

    size_t i = 1;
    if (i >= lines.size()) throw ParseError("response missing GOAL line");
    auto goal_fields = split_fields(lines[i]);
    if (goal_fields.size() != 5 || goal_fields[0] != "GOAL")
        throw ParseError("expected 'GOAL <label> <agent> <subject> <target>': " + lines[i]);
    d.subtree_goal =
        parse_predicate_fields(goal_fields[1], goal_fields[2], goal_fields[3], goal_fields[4], lines[i]);
    require_known_entities(d.subtree_goal, view, lines[i]);
    ++i;

    bool saw_end = false;
    for (; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line == "END") {
            saw_end = true;
            break;
        }
        auto fields = split_fields(line);
        if (fields.size() != 4 || fields[0] != "ACTION")
            throw ParseError("expected 'ACTION <name> <object> <container-or-target>': " + line);
        const ActionTemplate* tmpl = library().find(cls, fields[1]);
        if (!tmpl)
            throw CapabilityViolation("action '" + fields[1] + "' is outside the " + to_string(cls) +
                                      " registry");
        std::map<std::string, std::string> bindings;
        const std::string object = undash(fields[2]);
        const std::string other = undash(fields[3]);
        for (const auto& slot : tmpl->slots) {
            const std::string& value = slot == "object" ? object : other;
            if (value.empty()) throw ParseError("slot '" + slot + "' unbound in line: " + line);
            if (!entity_exists(view, value)) throw UnknownEntity("'" + value + "' in line: " + line);
            bindings[slot] = value;
        }
        if (tmpl->slots.empty() && (!object.empty() || !other.empty()))
            throw ParseError(fields[1] + " takes no arguments: " + line);
        if (std::find(tmpl->slots.begin(), tmpl->slots.end(), "object") == tmpl->slots.end() &&
            !object.empty())
            throw ParseError(fields[1] + " takes no object argument: " + line);
        try {
            d.actions.push_back(ground(*tmpl, robot, cls, bindings));
        } catch (const Error& e) {
            throw ParseError(std::string(e.what()) + " in line: " + line);
        }
    }
    if (!saw_end) throw ParseError("response missing END");
    // Type invariants are enforced at parse time: nothing invariant-breaking
    // escapes into the allocator.
    validate_decision(d, failure, view);
    return d;
}

std::map<std::string, double> parse_priors(const std::string& response, RobotClass cls) {
    const auto lines = split_lines(response);
    if (lines.empty() || lines.front() != "PRIORS") throw ParseError("response must open with PRIORS");
    std::map<std::string, double> out;
    size_t i = 1;
    for (; i < lines.size(); ++i) {
        if (lines[i] == "END") break;
        auto fields = split_fields(lines[i]);
        if (fields.size() != 3 || fields[0] != "PRIOR")
            throw ParseError("expected 'PRIOR <action> <score>': " + lines[i]);
        if (!library().find(cls, fields[1]))
            throw CapabilityViolation("action '" + fields[1] + "' is outside the " + to_string(cls) +
                                      " registry");
        double score;
        try {
            score = std::stod(fields[2]);
        } catch (...) {
            throw ParseError("bad score in line: " + lines[i]);
        }
        if (score < 0.0 || score > 1.0) throw ParseError("score out of [0,1]: " + lines[i]);
        out[fields[1]] = score;
    }
    if (i >= lines.size()) throw ParseError("response missing END");
    return out;
}

// --- Planners ------------------------------------------------------------

std::optional<AssignmentDecision> LlmPlanner::propose(const FailureRecord& failure,
                                                      const PlannerContext& ctx) {
    const std::string base_prompt = build_help_prompt(failure, ctx).text();
    std::string prompt = base_prompt;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const std::string response = client_->complete(prompt, [&] {
            return render_assignment_response(oracle_.propose(failure, ctx));
        });
        try {
            return parse_assignment(response, failure, ctx.merged);
        } catch (const Error& e) {
            prompt = base_prompt + "ERROR\n" + e.what() + "\nRESPOND AGAIN\n";
        }
    }
    auto fallback = oracle_.propose(failure, ctx);
    if (fallback) fallback->rationale = fallback->rationale.empty() ? "fallback" : fallback->rationale + ",fallback";
    return fallback;
}

std::optional<AssignmentDecision> LlmMctsPlanner::propose(const FailureRecord& failure,
                                                          const PlannerContext& ctx) {
    // One prior sheet per robot class, scored for the failed label.
    std::map<RobotClass, std::map<std::string, double>> priors;
    for (const auto& [id, obs] : ctx.observations) {
        const RobotClass cls = ctx.merged.robots.at(id).cls;
        if (priors.count(cls)) continue;
        const std::string prompt = build_prior_prompt(cls, failure.predicate.label).text();
        const std::string response =
            client_->complete(prompt, [&] { return render_priors_response(cls, failure.predicate.label); });
        try {
            priors[cls] = parse_priors(response, cls);
        } catch (const Error&) {
            priors[cls] = {};  // uniform for this class
        }
    }
    RolloutPrior prior = [priors](const ActionInstance& a) {
        auto cit = priors.find(a.cls);
        if (cit == priors.end()) return 0.5;
        auto it = cit->second.find(a.template_name);
        return it == cit->second.end() ? 0.5 : it->second;
    };
    MctsPlanner inner(budget_, depth_, seed_, prior, "llm-mcts");
    return inner.propose(failure, ctx);
}

std::vector<Predicate> llm_goal_decomposition(const LlmClient& client, const std::string& instruction,
                                              const WorldState& scenario,
                                              const std::vector<Predicate>& authoritative_goals) {
    // Goals may use any condition the scenario's robot classes can check,
    // which is broader than the per-class achievable catalogs.
    std::vector<RobotClass> classes;
    for (const auto& id : scenario.robot_order) {
        const RobotClass cls = scenario.robots.at(id).cls;
        if (std::find(classes.begin(), classes.end(), cls) == classes.end()) classes.push_back(cls);
    }
    std::vector<Label> vocabulary;
    for (const Label l : all_labels()) {
        const auto cls = class_of_label(l);
        if (!cls) continue;
        if (std::find(classes.begin(), classes.end(), *cls) != classes.end()) vocabulary.push_back(l);
    }
    const std::string prompt = build_init_prompt(instruction, vocabulary, scenario).text();
    const std::string response =
        client.complete(prompt, [&] { return render_goals_response(authoritative_goals); });
    return parse_goal_conditions(response, vocabulary, scenario);
}

}  // namespace btfleet

// --- HTTP backend ----------------------------------------------------------

#include <httplib.h>

namespace btfleet {
namespace {

// Chat-completion endpoint, temperature pinned to 0. Exercised only in live
// and record-against-endpoint modes; every CI path is builtin or replay.
std::string http_complete(const LlmOptions& opts, const std::string& prompt) {
    if (opts.endpoint.empty() || opts.endpoint == "builtin:oracle")
        throw ConfigError("live mode needs BTFLEET_LLM_BASE_URL");
    httplib::Client client(opts.endpoint);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!opts.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts.api_key);
    json body;
    body["model"] = opts.model;
    body["temperature"] = 0;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw IoError("model endpoint unreachable: " + opts.endpoint);
    if (res->status != 200)
        throw IoError("model endpoint returned status " + std::to_string(res->status));
    try {
        json j = json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw IoError(std::string("model response malformed: ") + e.what());
    }
}

}  // namespace
}  // namespace btfleet
