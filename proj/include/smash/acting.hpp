#pragma once

// Acting layer: refines plan actions into ground device commands via
// know-how bodies under command-impact value gating, executes them against
// the environment, and reports goal outcomes.

#include "smash/goals.hpp"
#include "smash/logic.hpp"
#include "smash/planning.hpp"
#include "smash/values.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smash {

// ---------------------------------------------------------------------------
// Know-how and command-impact rules
// ---------------------------------------------------------------------------

struct RefinementBodyItem {
    enum class Kind : uint8_t { command, subaction };
    Kind kind = Kind::command;
    Atom atom;  // template; variables bound by the action parameters or condition
};

struct Refinement {
    Atom action;
    Formula condition;
    std::vector<RefinementBodyItem> body;
};

struct CommandImpactRule {
    Formula condition;
    Atom command_template;
    int impact = 0;
    Value value = Value::hedonism;
};

// Every KW action name must be refinable.
inline void check_know_how_coverage(const std::vector<ActionModel>& kw, const std::vector<Refinement>& kh) {
    for (const ActionModel& m : kw) {
        bool covered = std::any_of(kh.begin(), kh.end(), [&](const Refinement& r) {
            return r.action.predicate == m.action.predicate && r.action.arity() == m.action.arity();
        });
        if (!covered)
            throw ConfigError("no know-how entry refines action " + m.action.predicate + "/" +
                              std::to_string(m.action.arity()));
    }
}

// True iff some CI rule fires in b with impact -1 on a value present in iv
// and its command template matches.
inline bool command_gate_fires(const Atom& command, const BeliefBase& b,
                               const std::vector<CommandImpactRule>& ci, const ImportanceOrder& iv,
                               std::string* which = nullptr) {
    for (const CommandImpactRule& rule : ci) {
        if (rule.impact >= 0 || !iv.contains(rule.value)) continue;
        std::vector<Substitution> subs =
            rule.condition.is_true() ? std::vector<Substitution>{Substitution{}} : evaluate(rule.condition, b);
        for (const Substitution& s : subs) {
            Substitution ext = s;
            if (unify(rule.command_template, command, ext)) {
                if (which)
                    *which = command.to_string() + " has negative impact on " + std::string(value_name(rule.value));
                return true;
            }
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

struct RefineFailure {
    enum class Kind : uint8_t {
        no_applicable_entry,
        budget_exhausted,
        cycle_detected,
        value_gate,
        non_ground_command,
    };
    Kind kind = Kind::no_applicable_entry;
    Atom at;             // the action (or command, for the gate) that failed
    std::string detail;

    std::string to_string() const {
        switch (kind) {
            case Kind::no_applicable_entry: return "no applicable know-how entry for " + at.to_string();
            case Kind::budget_exhausted: return "refinement budget exhausted at " + at.to_string();
            case Kind::cycle_detected: return "refinement cycle detected at " + at.to_string();
            case Kind::value_gate: return "command gate: " + detail;
            case Kind::non_ground_command: return "refinement produced a non-ground command " + at.to_string();
        }
        return "refinement failure";
    }
};

struct RefineResult {
    bool ok = false;
    std::vector<Atom> commands;
    RefineFailure failure;
};

namespace detail {

inline bool refine_impl(const Atom& action, const BeliefBase& b, const std::vector<Refinement>& kh,
                        const std::vector<CommandImpactRule>& ci, const ImportanceOrder& iv,
                        int budget, std::vector<Atom>& stack, std::vector<Atom>& out,
                        RefineFailure& failure, TraceNotes* notes) {
    if (budget <= 0) {
        failure = {RefineFailure::Kind::budget_exhausted, action, {}};
        return false;
    }
    for (const Atom& frame : stack)
        if (frame == action) {
            failure = {RefineFailure::Kind::cycle_detected, action, {}};
            return false;
        }

    // first entry, in declaration order, whose action unifies and whose
    // condition holds; condition substitutions resolve lexicographically
    const Refinement* chosen = nullptr;
    Substitution binding;
    for (const Refinement& entry : kh) {
        Substitution unified;
        if (!unify(entry.action, action, unified)) continue;
        if (entry.condition.is_true()) {
            chosen = &entry;
            binding = unified;
            break;
        }
        std::vector<Substitution> subs = evaluate(entry.condition.substitute(unified), b);
        if (subs.empty()) continue;
        chosen = &entry;
        binding = unified;
        for (const auto& [var, term] : subs.front().bindings) binding.bind(var, term);
        break;
    }
    if (!chosen) {
        failure = {RefineFailure::Kind::no_applicable_entry, action, {}};
        return false;
    }

    stack.push_back(action);
    for (const RefinementBodyItem& item : chosen->body) {
        Atom ground_item = binding.apply(item.atom);
        if (item.kind == RefinementBodyItem::Kind::command) {
            if (!ground_item.ground()) {
                failure = {RefineFailure::Kind::non_ground_command, ground_item, {}};
                stack.pop_back();
                return false;
            }
            std::string why;
            if (command_gate_fires(ground_item, b, ci, iv, &why)) {
                // the whole enclosing action aborts: partial bodies could
                // leave devices inconsistent
                failure = {RefineFailure::Kind::value_gate, ground_item, why};
                trace(notes, "refinement of " + action.to_string() + " aborted: " + why);
                stack.pop_back();
                return false;
            }
            out.push_back(std::move(ground_item));
        } else {
            if (!refine_impl(ground_item, b, kh, ci, iv, budget - 1, stack, out, failure, notes)) {
                stack.pop_back();
                return false;
            }
        }
    }
    stack.pop_back();
    return true;
}

}  // namespace detail

inline RefineResult refine(const Atom& action, const BeliefBase& b, const std::vector<Refinement>& kh,
                           const std::vector<CommandImpactRule>& ci, const ImportanceOrder& iv,
                           int depth_budget = 32, TraceNotes* notes = nullptr) {
    RefineResult result;
    std::vector<Atom> stack;
    result.ok = detail::refine_impl(action, b, kh, ci, iv, depth_budget, stack, result.commands,
                                    result.failure, notes);
    if (!result.ok) result.commands.clear();
    return result;
}

// ---------------------------------------------------------------------------
// Execution environment
// ---------------------------------------------------------------------------

struct ExecStatus {
    bool ok = true;
    std::string error;  // unknown_device | unknown_operation | illegal_transition | device_error | timeout
};

// Dispatches commands to devices and exposes the live belief base. The agent
// runtime implements this over the bus; tests may fake it.
class ExecutionEnv {
public:
    virtual ~ExecutionEnv() = default;
    virtual ExecStatus execute(const Atom& command) = 0;
    virtual const BeliefBase& beliefs() const = 0;
};

// ---------------------------------------------------------------------------
// Acting
// ---------------------------------------------------------------------------

struct ExecutedCommand {
    Atom command;
    Atom goal;
    Atom action;
    bool ok = false;
    std::string error;
    std::vector<Atom> beliefs_at_exec;  // recorded when auditing
};

struct CommandBatch {
    std::vector<ExecutedCommand> commands;
};

struct ActingResult {
    CommandBatch batch;
    std::vector<OutcomeUpdate> updates;
    std::vector<std::string> effect_divergences;  // projected vs observed, per action
};

// Plans are processed in order; refinement or execution failure abandons the
// plan and fails its goal, later plans still run. A goal only succeeds if
// its goal condition holds in the live belief base once its plan completes.
inline ActingResult acting(ExecutionEnv& env, const ImportanceOrder& iv,
                           const std::vector<PlannedGoal>& planned, const std::vector<Refinement>& kh,
                           const std::vector<CommandImpactRule>& ci,
                           const std::vector<GoalCondition>& goal_conditions, int depth_budget = 32,
                           bool audit = false, TraceNotes* notes = nullptr) {
    ActingResult result;
    for (const PlannedGoal& pg : planned) {
        if (!pg.planned) continue;
        const GoalState& goal = pg.goal;
        bool abandoned = false;

        for (const Atom& action : pg.plan.body) {
            RefineResult refined = refine(action, env.beliefs(), kh, ci, iv, depth_budget, notes);
            if (!refined.ok) {
                result.updates.push_back({goal.goal, goal.source, GoalStatus::fail, refined.failure.to_string()});
                abandoned = true;
                break;
            }

            std::set<Atom> before = env.beliefs().atoms();
            for (const Atom& cmd : refined.commands) {
                // the belief base may have moved since refinement: re-check
                // the gate at execution time
                std::string why;
                if (command_gate_fires(cmd, env.beliefs(), ci, iv, &why)) {
                    result.updates.push_back({goal.goal, goal.source, GoalStatus::fail, "command gate: " + why});
                    abandoned = true;
                    break;
                }
                ExecutedCommand record;
                record.command = cmd;
                record.goal = goal.goal;
                record.action = action;
                if (audit) {
                    const auto& atoms = env.beliefs().atoms();
                    record.beliefs_at_exec.assign(atoms.begin(), atoms.end());
                }
                ExecStatus status = env.execute(cmd);
                record.ok = status.ok;
                record.error = status.error;
                result.batch.commands.push_back(std::move(record));
                if (!status.ok) {
                    result.updates.push_back({goal.goal, goal.source, GoalStatus::fail,
                                              "command " + cmd.to_string() + " failed: " + status.error});
                    abandoned = true;
                    break;
                }
            }
            if (abandoned) break;

            // the environment is authoritative: divergence between projected
            // KW effects and observed beliefs is logged, not an error
            for (const GroundAction& ga : pg.actions) {
                if (ga.name != action) continue;
                std::set<Atom> projected = before;
                if (const GroundVariant* v = first_applicable_variant(ga, projected)) {
                    apply_variant(*v, projected);
                    std::vector<Atom> divergent;
                    const std::set<Atom>& observed = env.beliefs().atoms();
                    for (const Atom& a : projected)
                        if (!observed.count(a)) divergent.push_back(a);
                    for (const Atom& a : observed)
                        if (!projected.count(a)) divergent.push_back(a);
                    if (!divergent.empty()) {
                        std::string msg = action.to_string() + " projected/observed differ:";
                        for (const Atom& a : divergent) msg += " " + a.to_string();
                        result.effect_divergences.push_back(msg);
                        trace(notes, msg);
                    }
                }
                break;
            }
        }
        if (abandoned) continue;

        GroundGoal target = resolve_goal_condition(goal.goal, goal_conditions);
        OutcomeUpdate update;
        update.goal = goal.goal;
        update.source = goal.source;
        if (target.satisfied(env.beliefs().atoms())) {
            update.outcome = GoalStatus::success;
            update.reason = "goal condition verified in the belief base";
        } else {
            update.outcome = GoalStatus::fail;
            update.reason = "plan completed but the goal condition does not hold";
        }
        if (audit) {
            const auto& atoms = env.beliefs().atoms();
            update.beliefs_at_outcome.assign(atoms.begin(), atoms.end());
        }
        result.updates.push_back(std::move(update));
    }
    return result;
}

}  // namespace smash
