#pragma once

// Agent runtime: per-agent reasoning cycles (value-reasoning ->
// goal-reasoning -> planning -> acting) driven by bus events, cycle traces
// with per-layer timings, and the multi-agent runner over a shared bus.

#include "smash/acting.hpp"
#include "smash/bus.hpp"
#include "smash/context.hpp"
#include "smash/devices.hpp"
#include "smash/goals.hpp"
#include "smash/pddl.hpp"
#include "smash/planning.hpp"
#include "smash/scenario.hpp"
#include "smash/values.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace smash {

// ---------------------------------------------------------------------------
// Cycle trace
// ---------------------------------------------------------------------------

struct CycleTrace {
    std::size_t cycle = 0;
    std::string agent;
    std::string trigger;

    std::vector<std::vector<std::string>> iv;        // bucket -> value names
    std::vector<std::string> gs_before, gs_after;
    std::vector<std::string> goals;                  // G(t)

    struct PlanRecord {
        std::string goal;
        std::vector<std::string> body;
        std::string outcome;  // found | unsolvable | limit_exhausted
        double seconds = 0;
    };
    std::vector<PlanRecord> plans;

    struct CommandRecord {
        std::string command, goal, action;
        bool ok = false;
        std::string error;
        std::vector<std::string> beliefs_at_exec;  // audit mode only
    };
    std::vector<CommandRecord> commands;

    struct OutcomeRecord {
        std::string goal;
        std::string source;
        std::string outcome;
        std::string reason;
        std::vector<std::string> beliefs;  // audit mode: state when the outcome was decided
    };
    std::vector<OutcomeRecord> outcomes;

    TransitionAudit transitions;
    TraceNotes notes;
    std::vector<std::string> beliefs_before;  // audit mode only
    std::string error;                         // contained layer failure, if any

    double value_seconds = 0, goal_seconds = 0, acting_seconds = 0, total_seconds = 0;

    Json to_json() const {
        Json j;
        j["cycle"] = cycle;
        j["agent"] = agent;
        j["trigger"] = trigger;
        j["iv"] = iv;
        j["gs_before"] = gs_before;
        j["gs_after"] = gs_after;
        j["goals"] = goals;
        j["plans"] = Json::array();
        for (const PlanRecord& p : plans)
            j["plans"].push_back({{"goal", p.goal}, {"body", p.body}, {"outcome", p.outcome}, {"seconds", p.seconds}});
        j["commands"] = Json::array();
        for (const CommandRecord& c : commands) {
            Json cj{{"command", c.command}, {"goal", c.goal}, {"action", c.action}, {"ok", c.ok}};
            if (!c.error.empty()) cj["error"] = c.error;
            if (!c.beliefs_at_exec.empty()) cj["beliefs_at_exec"] = c.beliefs_at_exec;
            j["commands"].push_back(std::move(cj));
        }
        j["outcomes"] = Json::array();
        for (const OutcomeRecord& o : outcomes) {
            Json oj{{"goal", o.goal}, {"source", o.source}, {"outcome", o.outcome}, {"reason", o.reason}};
            if (!o.beliefs.empty()) oj["beliefs"] = o.beliefs;
            j["outcomes"].push_back(std::move(oj));
        }
        j["transitions"] = Json::array();
        for (const TransitionRecord& t : transitions) {
            Json tj{{"goal", t.goal.to_string()},
                    {"source", std::string(goal_source_name(t.source))},
                    {"to", std::string(goal_status_name(t.to))},
                    {"applied", t.applied}};
            if (t.from) tj["from"] = std::string(goal_status_name(*t.from));
            if (t.fresh_lifetime) tj["fresh_lifetime"] = true;
            if (!t.reason.empty()) tj["reason"] = t.reason;
            j["transitions"].push_back(std::move(tj));
        }
        j["notes"] = notes;
        if (!beliefs_before.empty()) j["beliefs_before"] = beliefs_before;
        if (!error.empty()) j["error"] = error;
        j["times"] = {{"value_s", value_seconds},
                      {"goal_s", goal_seconds},
                      {"acting_s", acting_seconds},
                      {"total_s", total_seconds}};
        return j;
    }
};

struct ObservedTransition {
    std::string device, property;
    std::optional<std::string> from;
    std::string to;
    int at = 0;  // logical time of the event that caused it

    std::string to_string() const {
        return device + "." + property + ": " + (from ? *from : "*") + " -> " + to + " (t=" +
               std::to_string(at) + ")";
    }
};

struct RunOptions {
    SearchStrategy strategy = SearchStrategy::bfs;
    bool audit = false;                    // record belief snapshots for post-hoc checks
    std::optional<std::string> pddl_out;   // directory for emitted PDDL files
    std::optional<uint16_t> tcp_port;      // expose the bus over TCP
};

struct RunResult {
    std::vector<CycleTrace> traces;
    std::vector<ObservedTransition> observed;
};

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

class Agent : public ExecutionEnv {
public:
    Agent(Bus& bus, const Scenario& scenario, const AgentSpec& spec, const RunOptions& options)
        : bus_(bus), scenario_(scenario), spec_(spec), options_(options), inbox_(bus, inbox_patterns(spec)) {
        ga_ = {GoalActivationRule::default_rule()};
        ga_.insert(ga_.end(), scenario.ga.begin(), scenario.ga.end());
    }

    const std::string& id() const { return spec_.id; }
    const BeliefBase& beliefs() const override { return beliefs_; }
    const GoalStatusSet& goal_status() const { return gs_; }
    const ContextStore& store() const { return store_; }
    bool owns(const std::string& device) const {
        return std::find(spec_.devices.begin(), spec_.devices.end(), device) != spec_.devices.end();
    }

    // Applies queued property updates and collects user goals. Returns true
    // when something changed that warrants a reasoning cycle.
    bool drain_inbox() {
        bool triggered = false;
        BusMessage msg;
        while (inbox_.try_pop(msg)) triggered |= consume(msg);
        return triggered || !pending_goals_.empty();
    }

    ExecStatus execute(const Atom& command) override {
        if (command.args.empty() || !command.args[0].is_constant()) return {false, "unknown_device"};
        const std::string device = command.args[0].name;
        if (!owns(device)) return {false, "unknown_device"};

        Json args = Json::array();
        for (std::size_t i = 1; i < command.args.size(); ++i) args.push_back(command.args[i].name);
        const std::uint64_t req = ++req_counter_;
        bus_.publish("devices/" + device + "/operations",
                     Json{{"device", device}, {"op", command.predicate}, {"args", std::move(args)}, {"req", req}});

        // await the completion signal, folding in property updates as they
        // arrive; in-process devices answer synchronously
        auto deadline = std::chrono::steady_clock::now() + exec_timeout_;
        while (true) {
            BusMessage msg;
            if (!inbox_.try_pop(msg)) {
                auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now());
                if (remaining.count() <= 0) return {false, "timeout"};
                if (!inbox_.wait_pop(msg, remaining)) return {false, "timeout"};
            }
            auto segs = bus_detail::split_topic(msg.topic);
            if (segs.size() == 3 && segs[2] == "signals") {
                if (msg.payload.value("req", std::uint64_t{0}) != req) continue;  // stale signal
                if (msg.payload.value("ok", false)) return {};
                return {false, msg.payload.value("err", "device_error")};
            }
            consume(msg);
        }
    }

    CycleTrace run_cycle(const std::string& trigger) {
        CycleTrace tr;
        tr.cycle = ++cycle_counter_;
        tr.agent = spec_.id;
        tr.trigger = trigger;
        for (const GoalState& g : gs_.entries()) tr.gs_before.push_back(g.to_string());
        if (options_.audit)
            for (const Atom& a : beliefs_.atoms()) tr.beliefs_before.push_back(a.to_string());

        std::vector<Atom> gg = std::move(pending_goals_);
        pending_goals_.clear();

        using clock = std::chrono::steady_clock;
        auto seconds_between = [](clock::time_point a, clock::time_point b) {
            return std::chrono::duration<double>(b - a).count();
        };
        const auto t0 = clock::now();
        std::vector<GoalState> active_goals;
        try {
            // 1. value reasoning
            ImportanceOrder iv = value_reasoning(beliefs_, scenario_.iv_d, scenario_.vo, &tr.notes);
            for (const auto& bucket : iv.buckets) {
                std::vector<std::string> names;
                for (Value v : bucket) names.emplace_back(value_name(v));
                tr.iv.push_back(std::move(names));
            }
            const auto t1 = clock::now();
            tr.value_seconds = seconds_between(t0, t1);

            // 2. goal reasoning
            GoalReasoningResult gr =
                goal_reasoning(beliefs_, gg, iv, gs_, ga_, scenario_.gi, &tr.transitions, &tr.notes);
            gs_ = std::move(gr.gs);
            active_goals = std::move(gr.goals);
            for (const GoalState& g : active_goals) tr.goals.push_back(g.to_string());
            const auto t2 = clock::now();
            tr.goal_seconds = seconds_between(t1, t2);

            // 3. planning
            PlanningResult pr = planning(beliefs_, iv, active_goals, scenario_.kw, scenario_.ai,
                                         scenario_.goal_conditions, scenario_.constants, scenario_.limits,
                                         options_.strategy, &tr.notes);
            for (const PlannedGoal& pg : pr.goals) {
                CycleTrace::PlanRecord rec;
                rec.goal = pg.goal.goal.to_string();
                rec.outcome = pg.outcome == PlanOutcome::found ? "found"
                              : pg.outcome == PlanOutcome::unsolvable ? "unsolvable"
                                                                      : "limit_exhausted";
                for (const Atom& a : pg.plan.body) rec.body.push_back(a.to_string());
                rec.seconds = pg.seconds;
                tr.plans.push_back(std::move(rec));
            }
            auto record_outcome = [&](const OutcomeUpdate& u) {
                CycleTrace::OutcomeRecord rec;
                rec.goal = u.goal.to_string();
                rec.source = std::string(goal_source_name(u.source));
                rec.outcome = std::string(goal_status_name(u.outcome));
                rec.reason = u.reason;
                for (const Atom& a : u.beliefs_at_outcome) rec.beliefs.push_back(a.to_string());
                tr.outcomes.push_back(std::move(rec));
            };
            for (const OutcomeUpdate& u : pr.updates) {
                gs_ = set_outcome(std::move(gs_), u.goal, u.source, u.outcome, &tr.transitions, u.reason);
                record_outcome(u);
            }
            if (options_.pddl_out) dump_pddl(pr, iv);

            // 4. acting
            ActingResult ar = acting(*this, iv, pr.goals, scenario_.kh, scenario_.ci,
                                     scenario_.goal_conditions, scenario_.refine_depth, options_.audit,
                                     &tr.notes);
            for (const ExecutedCommand& c : ar.batch.commands) {
                CycleTrace::CommandRecord rec;
                rec.command = c.command.to_string();
                rec.goal = c.goal.to_string();
                rec.action = c.action.to_string();
                rec.ok = c.ok;
                rec.error = c.error;
                for (const Atom& a : c.beliefs_at_exec) rec.beliefs_at_exec.push_back(a.to_string());
                tr.commands.push_back(std::move(rec));
            }
            for (const OutcomeUpdate& u : ar.updates) {
                gs_ = set_outcome(std::move(gs_), u.goal, u.source, u.outcome, &tr.transitions, u.reason);
                record_outcome(u);
            }
            const auto t3 = clock::now();
            // everything after goal reasoning that is not per-goal planning
            // counts as acting (per-goal timers nest inside this window)
            double planning_total = std::accumulate(tr.plans.begin(), tr.plans.end(), 0.0,
                                                    [](double acc, const auto& p) { return acc + p.seconds; });
            tr.acting_seconds = std::max(0.0, seconds_between(t2, t3) - planning_total);
        } catch (const std::exception& e) {
            // contained: the cycle aborts, affected active goals fail, the
            // runtime continues
            tr.error = e.what();
            for (const GoalState& g : active_goals) {
                const GoalState* cur = gs_.find(g.goal, g.source);
                if (cur && cur->status == GoalStatus::active)
                    gs_ = set_outcome(std::move(gs_), g.goal, g.source, GoalStatus::fail, &tr.transitions,
                                      std::string("cycle aborted: ") + e.what());
            }
        }
        tr.total_seconds = seconds_between(t0, clock::now());
        drain_inbox();  // fold in any residual property echoes
        for (const GoalState& g : gs_.entries()) tr.gs_after.push_back(g.to_string());
        return tr;
    }

private:
    static std::vector<std::string> inbox_patterns(const AgentSpec& spec) {
        std::vector<std::string> out;
        for (const std::string& d : spec.devices) {
            out.push_back("devices/" + d + "/properties/#");
            out.push_back("devices/" + d + "/signals");
        }
        out.push_back("devices/env/properties/#");  // shared context beliefs
        out.push_back("agent/" + spec.id + "/goals");
        return out;
    }

    bool consume(const BusMessage& msg) {
        auto segs = bus_detail::split_topic(msg.topic);
        if (segs.size() == 3 && segs[0] == "agent" && segs[2] == "goals") {
            pending_goals_.push_back(parse_ground_atom(msg.payload.at("goal").get<std::string>()));
            return true;
        }
        if (segs.size() == 4 && segs[2] == "properties") {
            const std::string& pred = segs[3];
            bool changed = false;
            if (msg.payload.contains("prev") && msg.payload.at("prev").is_array()) {
                Atom a{pred, {}};
                for (const auto& arg : msg.payload.at("prev")) a.args.push_back(Term::constant(arg.get<std::string>()));
                if (beliefs_.retract_belief(a)) {
                    store_.apply_retract(a);
                    changed = true;
                }
            }
            if (msg.payload.contains("args") && msg.payload.at("args").is_array()) {
                Atom a{pred, {}};
                for (const auto& arg : msg.payload.at("args")) a.args.push_back(Term::constant(arg.get<std::string>()));
                if (beliefs_.assert_belief(a)) {
                    store_.apply_assert(a);
                    changed = true;
                }
            }
            return changed;
        }
        return false;  // stale signal outside execute()
    }

    void dump_pddl(const PlanningResult& pr, const ImportanceOrder&) {
        namespace fs = std::filesystem;
        fs::create_directories(*options_.pddl_out);
        for (const PlannedGoal& pg : pr.goals) {
            // models with no admissible grounding left are dropped from the
            // emitted domain
            std::vector<ActionModel> admissible;
            std::set<std::size_t> used;
            for (const GroundAction& ga : pg.actions)
                for (const GroundVariant& v : ga.variants) used.insert(v.model_index);
            for (std::size_t i = 0; i < scenario_.kw.size(); ++i)
                if (used.count(i)) admissible.push_back(scenario_.kw[i]);
            BeliefBase init;
            for (const Atom& a : pg.init) init.assert_belief(a);
            GroundGoal target = resolve_goal_condition(pg.goal.goal, scenario_.goal_conditions);
            PddlFiles files = emit_pddl(scenario_.name, admissible, init, target);
            std::string slug = goal_slug(pg.goal.goal);
            std::ofstream(fs::path(*options_.pddl_out) / ("domain_" + slug + ".pddl")) << files.domain;
            std::ofstream(fs::path(*options_.pddl_out) / ("problem_" + slug + ".pddl")) << files.problem;
        }
    }

    Bus& bus_;
    const Scenario& scenario_;
    AgentSpec spec_;
    RunOptions options_;
    MessageQueue inbox_;
    BeliefBase beliefs_;
    GoalStatusSet gs_;
    ContextStore store_;
    std::vector<GoalActivationRule> ga_;
    std::vector<Atom> pending_goals_;
    std::size_t cycle_counter_ = 0;
    std::uint64_t req_counter_ = 0;
    std::chrono::milliseconds exec_timeout_{2000};
};

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

class Runner {
public:
    Runner(const Scenario& scenario, RunOptions options = {}) : scenario_(scenario), options_(options) {
        for (const DeviceSpec& spec : scenario.devices) {
            auto dev = std::make_unique<Device>(bus_, spec.id, spec.type);
            for (const auto& [prop, value] : spec.initial)
                dev->seed_slot(prop, {Term::constant(spec.id), Term::constant(value)});
            if (!spec.profiles.empty() || spec.type == DeviceType::sofa) {
                dev->classifier().profiles = spec.profiles;
                dev->classifier().tolerance = spec.tolerance;
                dev->classifier().vacancy_threshold = spec.vacancy_threshold;
            }
            if (!spec.generic_states.empty()) dev->set_generic_states(spec.generic_states);
            devices_.emplace(spec.id, std::move(dev));
        }
        if (!devices_.count("env"))  // carrier for direct context-belief events
            devices_.emplace("env", std::make_unique<Device>(bus_, "env", DeviceType::generic));
        observer_id_ = bus_.subscribe("devices/+/properties/#", [this](const BusMessage& m) {
            if (!recording_) return;
            auto segs = bus_detail::split_topic(m.topic);
            const Json& args = m.payload.at("args");
            if (!args.is_array() || args.empty()) return;  // slot cleared: not a transition
            ObservedTransition t;
            t.device = segs[1];
            t.property = segs[3];
            t.to = args.back().get<std::string>();
            if (m.payload.contains("prev") && m.payload.at("prev").is_array() && !m.payload.at("prev").empty())
                t.from = m.payload.at("prev").back().get<std::string>();
            t.at = current_at_;
            observed_.push_back(std::move(t));
        });
        for (const AgentSpec& spec : scenario.agents)
            agents_.push_back(std::make_unique<Agent>(bus_, scenario_, spec, options_));
    }

    ~Runner() { bus_.unsubscribe(observer_id_); }

    Bus& bus() { return bus_; }
    Device& device(const std::string& id) { return *devices_.at(id); }
    const std::vector<std::unique_ptr<Agent>>& agents() const { return agents_; }

    RunResult run() {
        RunResult result;

        // initial device state loads quietly: announcements update beliefs
        // but trigger no cycle and are not part of the observed trace
        recording_ = false;
        for (auto& [id, dev] : devices_) dev->announce();
        for (auto& agent : agents_) agent->drain_inbox();
        recording_ = true;

        for (const ScenarioEvent& event : scenario_.events) {
            current_at_ = event.at;
            dispatch(event);
            for (auto& agent : agents_) {
                if (!agent->drain_inbox()) continue;
                result.traces.push_back(agent->run_cycle(event.label));
            }
        }
        result.observed = observed_;
        return result;
    }

private:
    void dispatch(const ScenarioEvent& event) {
        switch (event.kind) {
            case ScenarioEvent::Kind::user_goal:
                bus_.publish("agent/" + event.agent + "/goals", Json{{"goal", event.goal.to_string()}});
                break;
            case ScenarioEvent::Kind::call:
                devices_.at(event.device)->script_incoming_call(event.caller, event.caller_type);
                break;
            case ScenarioEvent::Kind::weight:
                devices_.at(event.device)->script_weight(event.weight);
                break;
            case ScenarioEvent::Kind::reject_next:
                devices_.at(event.device)->reject_next();
                break;
            case ScenarioEvent::Kind::belief: {
                if (event.retract_atom) {
                    Json payload;
                    payload["args"] = nullptr;
                    Json prev = Json::array();
                    for (const Term& t : event.retract_atom->args) prev.push_back(t.name);
                    payload["prev"] = prev;
                    bus_.publish("devices/env/properties/" + event.retract_atom->predicate, payload);
                }
                if (event.assert_atom) {
                    Json payload;
                    Json args = Json::array();
                    for (const Term& t : event.assert_atom->args) args.push_back(t.name);
                    payload["args"] = args;
                    payload["prev"] = nullptr;
                    bus_.publish("devices/env/properties/" + event.assert_atom->predicate, payload);
                }
                break;
            }
        }
    }

    Bus bus_;
    const Scenario& scenario_;
    RunOptions options_;
    std::map<std::string, std::unique_ptr<Device>> devices_;
    std::vector<std::unique_ptr<Agent>> agents_;
    Bus::SubscriptionId observer_id_ = 0;
    bool recording_ = false;
    int current_at_ = 0;
    std::vector<ObservedTransition> observed_;
};

// ---------------------------------------------------------------------------
// Validation: expected vs observed transitions
// ---------------------------------------------------------------------------

struct ValidationDiff {
    bool ok = false;
    std::size_t index = 0;       // position of the first divergence
    std::string expected, got;   // human-readable sides
    std::string to_string() const {
        if (ok) return "expected trace reproduced";
        return "divergence at step " + std::to_string(index + 1) + ": expected " + expected + ", observed " + got;
    }
};

// Compares the expected transitions with the observed stream filtered to the
// (device, property) pairs the expectation mentions.
inline ValidationDiff validate_transitions(const std::vector<ExpectedTransition>& expect,
                                           const std::vector<ObservedTransition>& observed) {
    std::set<std::pair<std::string, std::string>> watched;
    for (const ExpectedTransition& e : expect) watched.insert({e.device, e.property});
    std::vector<ObservedTransition> relevant;
    for (const ObservedTransition& o : observed)
        if (watched.count({o.device, o.property})) relevant.push_back(o);

    for (std::size_t i = 0; i < expect.size() || i < relevant.size(); ++i) {
        if (i >= expect.size())
            return {false, i, "(end of expected trace)", relevant[i].to_string()};
        if (i >= relevant.size())
            return {false, i, expect[i].to_string(), "(no further transitions)"};
        const ExpectedTransition& e = expect[i];
        const ObservedTransition& o = relevant[i];
        bool match = e.device == o.device && e.property == o.property && e.to == o.to &&
                     (!e.from || (o.from && *e.from == *o.from));
        if (!match) return {false, i, e.to_string(), o.to_string()};
    }
    return {true, 0, "", ""};
}

}  // namespace smash
