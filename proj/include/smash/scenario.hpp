#pragma once

// Declarative scenario files: values, goal rules, action models, know-how,
// devices, an event timeline and the expected device-transition trace.
// Rule strings use the rule-language grammar; see docs/scenario.schema.json.

#include "smash/acting.hpp"
#include "smash/bus.hpp"
#include "smash/devices.hpp"
#include "smash/goals.hpp"
#include "smash/planning.hpp"
#include "smash/values.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace smash {

struct DeviceSpec {
    std::string id;
    DeviceType type = DeviceType::generic;
    std::map<std::string, std::string> initial;  // property -> value
    std::map<std::string, double> profiles;      // sofa
    double tolerance = 5.0;
    double vacancy_threshold = 20.0;
    std::vector<std::string> generic_states;
};

struct ScenarioEvent {
    enum class Kind : uint8_t { user_goal, belief, call, weight, reject_next };
    int at = 0;
    Kind kind = Kind::belief;
    std::string agent;                  // user_goal
    Atom goal;                          // user_goal
    std::optional<Atom> assert_atom;    // belief
    std::optional<Atom> retract_atom;   // belief
    std::string device;                 // call | weight | reject_next
    std::string caller, caller_type;    // call
    double weight = 0;                  // weight
    std::string label;
};

struct ExpectedTransition {
    std::string device;
    std::string property = "devicestatus";
    std::optional<std::string> from;
    std::string to;

    std::string to_string() const {
        std::string s = device + "." + property + ": ";
        s += (from ? *from : "*");
        s += " -> " + to;
        return s;
    }
};

struct AgentSpec {
    std::string id;
    std::vector<std::string> devices;
};

struct Scenario {
    std::string name;
    std::vector<AgentSpec> agents;
    std::vector<Term> constants;

    ImportanceOrder iv_d;
    std::vector<ValueOrderingRule> vo;
    std::vector<GoalActivationRule> ga;  // without the builtin default rule
    std::vector<GoalImpactRule> gi;
    std::vector<GoalCondition> goal_conditions;
    std::vector<ActionModel> kw;
    std::vector<ActionImpactRule> ai;
    std::vector<Refinement> kh;
    std::vector<CommandImpactRule> ci;

    std::vector<DeviceSpec> devices;
    std::vector<ScenarioEvent> events;  // ordered by `at`, declaration order on ties
    std::vector<ExpectedTransition> expect;
    SearchLimits limits;
    int refine_depth = 32;
};

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& why) {
    throw ConfigError("scenario: " + where + ": " + why);
}

inline const Json& need(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing '") + key + "'");
    return obj.at(key);
}

inline std::string need_string(const Json& obj, const char* key, const std::string& where) {
    const Json& v = need(obj, key, where);
    if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

inline Formula parse_condition(const Json& obj, const std::string& where,
                               const std::set<std::string>& bound = {}) {
    std::string text = need_string(obj, "condition", where);
    if (text.empty()) return Formula::always_true();
    try {
        return parse_formula(text, bound);
    } catch (const Error& e) {
        fail(where, std::string("condition '") + text + "': " + e.what());
    }
}

inline std::set<std::string> action_params(const Atom& a) {
    std::set<std::string> out;
    for (const Term& t : a.args)
        if (t.is_variable()) out.insert(t.name);
    return out;
}

inline int parse_impact(const Json& obj, const std::string& where) {
    const Json& v = need(obj, "impact", where);
    if (!v.is_number_integer()) fail(where, "'impact' must be -1, 0 or 1");
    int impact = v.get<int>();
    if (impact < -1 || impact > 1) fail(where, "'impact' must be -1, 0 or 1");
    return impact;
}

}  // namespace scenario_detail

inline Scenario load_scenario(const Json& doc) {
    using namespace scenario_detail;
    Scenario sc;
    if (!doc.is_object()) fail("root", "expected a JSON object");
    sc.name = doc.value("name", "scenario");

    // ---- values ----
    const Json& values = need(doc, "values", "root");
    for (const Json& bucket : need(values, "iv_d", "values")) {
        std::vector<Value> vs;
        for (const Json& v : bucket) vs.push_back(parse_value(v.get<std::string>()));
        if (vs.empty()) fail("values.iv_d", "empty bucket");
        sc.iv_d.buckets.push_back(std::move(vs));
    }
    if (!sc.iv_d.well_formed()) fail("values.iv_d", "buckets must be non-empty and disjoint");
    if (values.contains("vo")) {
        for (const Json& rule : values.at("vo")) {
            ValueOrderingRule r;
            r.condition = parse_condition(rule, "values.vo");
            for (const Json& op : need(rule, "body", "values.vo")) r.body.push_back(parse_order_op(op.get<std::string>()));
            sc.vo.push_back(std::move(r));
        }
    }

    // ---- goals ----
    const Json& goals = need(doc, "goals", "root");
    if (goals.contains("ga")) {
        for (const Json& rule : goals.at("ga")) {
            GoalActivationRule r;
            r.condition = parse_condition(rule, "goals.ga");
            for (const Json& item : need(rule, "body", "goals.ga"))
                r.body.push_back(parse_goal_state_template(item.get<std::string>()));
            sc.ga.push_back(std::move(r));
        }
    }
    if (goals.contains("gi")) {
        for (const Json& rule : goals.at("gi")) {
            GoalImpactRule r;
            r.condition = parse_condition(rule, "goals.gi");
            r.goal_template = parse_atom(need_string(rule, "goal", "goals.gi"));
            r.impact = parse_impact(rule, "goals.gi");
            r.value = parse_value(need_string(rule, "value", "goals.gi"));
            sc.gi.push_back(std::move(r));
        }
    }
    if (goals.contains("goal_conditions")) {
        for (const Json& gc : goals.at("goal_conditions")) {
            GoalCondition c;
            c.pattern = parse_atom(need_string(gc, "goal", "goals.goal_conditions"));
            c.condition = parse_condition(gc, "goals.goal_conditions", action_params(c.pattern));
            std::set<std::string> params = action_params(c.pattern);
            for (const std::string& v : c.condition.variables())
                if (!params.count(v))
                    fail("goals.goal_conditions", "variable " + v + " not bound by the goal pattern " +
                                                      c.pattern.to_string());
            sc.goal_conditions.push_back(std::move(c));
        }
    }

    // ---- planning ----
    const Json& planning = need(doc, "planning", "root");
    if (planning.contains("kw")) {
        for (const Json& entry : planning.at("kw")) {
            ActionModel m;
            m.action = parse_atom(need_string(entry, "action", "planning.kw"));
            m.condition = parse_condition(entry, "planning.kw", action_params(m.action));
            if (entry.contains("add"))
                for (const Json& a : entry.at("add")) m.add.push_back(parse_atom(a.get<std::string>()));
            if (entry.contains("del"))
                for (const Json& a : entry.at("del")) m.del.push_back(parse_atom(a.get<std::string>()));
            try {
                check_action_model(m);
            } catch (const ModelError& e) {
                fail("planning.kw", e.what());
            }
            sc.kw.push_back(std::move(m));
        }
    }
    if (planning.contains("ai")) {
        for (const Json& rule : planning.at("ai")) {
            ActionImpactRule r;
            r.condition = parse_condition(rule, "planning.ai");
            r.action_template = parse_atom(need_string(rule, "action", "planning.ai"));
            r.impact = parse_impact(rule, "planning.ai");
            r.value = parse_value(need_string(rule, "value", "planning.ai"));
            sc.ai.push_back(std::move(r));
        }
    }

    // ---- acting ----
    const Json& acting_section = need(doc, "acting", "root");
    if (acting_section.contains("kh")) {
        for (const Json& entry : acting_section.at("kh")) {
            Refinement r;
            r.action = parse_atom(need_string(entry, "action", "acting.kh"));
            r.condition = parse_condition(entry, "acting.kh", action_params(r.action));
            for (const Json& item : need(entry, "body", "acting.kh")) {
                RefinementBodyItem bi;
                if (item.contains("command")) {
                    bi.kind = RefinementBodyItem::Kind::command;
                    bi.atom = parse_atom(item.at("command").get<std::string>());
                } else if (item.contains("subaction")) {
                    bi.kind = RefinementBodyItem::Kind::subaction;
                    bi.atom = parse_atom(item.at("subaction").get<std::string>());
                } else {
                    fail("acting.kh", "body item needs 'command' or 'subaction'");
                }
                r.body.push_back(std::move(bi));
            }
            sc.kh.push_back(std::move(r));
        }
    }
    if (acting_section.contains("ci")) {
        for (const Json& rule : acting_section.at("ci")) {
            CommandImpactRule r;
            r.condition = parse_condition(rule, "acting.ci");
            r.command_template = parse_atom(need_string(rule, "command", "acting.ci"));
            r.impact = parse_impact(rule, "acting.ci");
            r.value = parse_value(need_string(rule, "value", "acting.ci"));
            sc.ci.push_back(std::move(r));
        }
    }
    try {
        check_know_how_coverage(sc.kw, sc.kh);
    } catch (const ConfigError& e) {
        fail("acting.kh", e.what());
    }

    // ---- devices ----
    for (const Json& dev : need(doc, "devices", "root")) {
        DeviceSpec spec;
        spec.id = normalize_constant_name(need_string(dev, "id", "devices"));
        spec.type = parse_device_type(need_string(dev, "type", "devices"));
        if (dev.contains("initial"))
            for (const auto& [key, value] : dev.at("initial").items())
                spec.initial[normalize_constant_name(key)] = normalize_constant_name(value.get<std::string>());
        if (dev.contains("profiles"))
            for (const auto& [user, w] : dev.at("profiles").items())
                spec.profiles[normalize_constant_name(user)] = w.get<double>();
        spec.tolerance = dev.value("tolerance", 5.0);
        spec.vacancy_threshold = dev.value("vacancy_threshold", 20.0);
        if (dev.contains("states"))
            for (const Json& s : dev.at("states")) spec.generic_states.push_back(normalize_constant_name(s.get<std::string>()));
        sc.devices.push_back(std::move(spec));
    }
    std::set<std::string> device_ids;
    for (const DeviceSpec& d : sc.devices)
        if (!device_ids.insert(d.id).second) fail("devices", "duplicate device id '" + d.id + "'");

    // ---- agents ----
    if (doc.contains("agents")) {
        for (const Json& a : doc.at("agents")) {
            AgentSpec spec;
            spec.id = need_string(a, "id", "agents");
            if (a.contains("devices"))
                for (const Json& d : a.at("devices")) spec.devices.push_back(normalize_constant_name(d.get<std::string>()));
            sc.agents.push_back(std::move(spec));
        }
    }
    if (sc.agents.empty()) {
        AgentSpec all{"agent1", {}};
        for (const DeviceSpec& d : sc.devices) all.devices.push_back(d.id);
        sc.agents.push_back(std::move(all));
    }
    std::set<std::string> owned;
    for (const AgentSpec& a : sc.agents)
        for (const std::string& d : a.devices) {
            if (!device_ids.count(d)) fail("agents", "agent " + a.id + " references unknown device '" + d + "'");
            if (!owned.insert(d).second) fail("agents", "device '" + d + "' is owned by two agents");
        }

    // ---- constants ----
    if (doc.contains("constants"))
        for (const Json& c : doc.at("constants")) sc.constants.push_back(Term::constant(c.get<std::string>()));

    // ---- events ----
    if (doc.contains("events")) {
        for (const Json& ev : doc.at("events")) {
            ScenarioEvent e;
            e.at = need(ev, "at", "events").get<int>();
            if (ev.contains("user_goal")) {
                e.kind = ScenarioEvent::Kind::user_goal;
                e.agent = ev.value("agent", sc.agents.front().id);
                e.goal = parse_ground_atom(ev.at("user_goal").get<std::string>());
                e.label = "user_goal " + e.goal.to_string();
            } else if (ev.contains("call")) {
                e.kind = ScenarioEvent::Kind::call;
                e.device = normalize_constant_name(need_string(ev, "device", "events"));
                e.caller = normalize_constant_name(need_string(ev.at("call"), "caller", "events.call"));
                e.caller_type = normalize_constant_name(need_string(ev.at("call"), "type", "events.call"));
                e.label = "call " + e.caller + "/" + e.caller_type;
            } else if (ev.contains("weight")) {
                e.kind = ScenarioEvent::Kind::weight;
                e.device = normalize_constant_name(need_string(ev, "device", "events"));
                e.weight = ev.at("weight").get<double>();
                e.label = "weight " + canonical_number(e.weight);
            } else if (ev.contains("reject_next")) {
                e.kind = ScenarioEvent::Kind::reject_next;
                e.device = normalize_constant_name(need_string(ev, "device", "events"));
                e.label = "reject_next " + e.device;
            } else if (ev.contains("assert") || ev.contains("retract")) {
                e.kind = ScenarioEvent::Kind::belief;
                if (ev.contains("assert")) e.assert_atom = parse_ground_atom(ev.at("assert").get<std::string>());
                if (ev.contains("retract")) e.retract_atom = parse_ground_atom(ev.at("retract").get<std::string>());
                e.label = "belief";
            } else {
                fail("events", "event needs user_goal, call, weight, reject_next, assert or retract");
            }
            if (!e.device.empty() && !device_ids.count(e.device))
                fail("events", "unknown device '" + e.device + "'");
            sc.events.push_back(std::move(e));
        }
        std::stable_sort(sc.events.begin(), sc.events.end(),
                         [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.at < b.at; });
    }

    // ---- expect ----
    if (doc.contains("expect")) {
        for (const Json& ex : doc.at("expect")) {
            ExpectedTransition t;
            t.device = normalize_constant_name(need_string(ex, "device", "expect"));
            if (ex.contains("property")) t.property = normalize_constant_name(ex.at("property").get<std::string>());
            if (ex.contains("from")) t.from = normalize_constant_name(ex.at("from").get<std::string>());
            t.to = normalize_constant_name(need_string(ex, "to", "expect"));
            if (!device_ids.count(t.device)) fail("expect", "unknown device '" + t.device + "'");
            sc.expect.push_back(std::move(t));
        }
    }

    // ---- limits ----
    if (doc.contains("limits")) {
        const Json& lim = doc.at("limits");
        sc.limits.max_nodes = lim.value("max_nodes", sc.limits.max_nodes);
        sc.limits.max_seconds = lim.value("max_seconds", sc.limits.max_seconds);
        sc.refine_depth = lim.value("refine_depth", sc.refine_depth);
    }
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    return load_scenario(doc);
}

}  // namespace smash
