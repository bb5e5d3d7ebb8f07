#pragma once

// Planning layer: KW action models, action-impact filtering against IV(t),
// grounding with delete-relaxation reachability, an embedded forward
// state-space planner (BFS and greedy best-first), sequential goal
// commitment with effect projection, and plan validation.

#include "smash/goals.hpp"
#include "smash/logic.hpp"
#include "smash/values.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace smash {

struct ModelError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Action models (know-what)
// ---------------------------------------------------------------------------

struct ActionModel {
    Atom action;            // name plus parameter variables
    Formula condition;      // conjunctive precondition (atoms, negated atoms, comparisons)
    std::vector<Atom> add;
    std::vector<Atom> del;
};

// Conjunctive split of a precondition. Comparisons are kept symbolic and
// decided per grounding.
struct ConditionLiterals {
    std::vector<Atom> pos;
    std::vector<Atom> neg;
    struct Cmp {
        CmpOp op;
        Term t1, t2;
        bool negated;
    };
    std::vector<Cmp> cmps;
};

inline void split_condition(const Formula::Node* n, ConditionLiterals& out, bool negated,
                            const std::string& what) {
    if (!n) return;
    switch (n->kind) {
        case Formula::Kind::atom:
            (negated ? out.neg : out.pos).push_back(n->atom);
            return;
        case Formula::Kind::neg:
            if (negated) throw ModelError(what + ": nested negation is outside the STRIPS subset");
            split_condition(n->lhs.get(), out, true, what);
            return;
        case Formula::Kind::conj:
            if (negated) throw ModelError(what + ": negated conjunction is outside the STRIPS subset");
            split_condition(n->lhs.get(), out, false, what);
            split_condition(n->rhs.get(), out, false, what);
            return;
        case Formula::Kind::disj:
            throw ModelError(what + ": disjunctive conditions are outside the STRIPS subset");
        case Formula::Kind::cmp:
            out.cmps.push_back({n->op, n->t1, n->t2, negated});
            return;
    }
}

inline ConditionLiterals split_condition(const Formula& f, const std::string& what) {
    ConditionLiterals out;
    split_condition(f.root(), out, false, what);
    return out;
}

// Every variable of the condition and effects must be an action parameter,
// so a parameter substitution grounds the whole model.
inline void check_action_model(const ActionModel& m) {
    std::set<std::string> params;
    for (const Term& t : m.action.args) {
        if (!t.is_variable()) throw ModelError("action " + m.action.to_string() + ": parameters must be variables");
        params.insert(t.name);
    }
    const std::string what = "action " + m.action.predicate;
    (void)split_condition(m.condition, what);  // rejects non-conjunctive shapes early
    std::set<std::string> used = m.condition.variables();
    for (const Atom& a : m.add)
        for (const Term& t : a.args)
            if (t.is_variable()) used.insert(t.name);
    for (const Atom& a : m.del)
        for (const Term& t : a.args)
            if (t.is_variable()) used.insert(t.name);
    for (const std::string& v : used)
        if (!params.count(v))
            throw ModelError(what + ": variable " + v + " is not bound by the action parameters");
}

// ---------------------------------------------------------------------------
// Action-impact filtering (per-grounding admissibility mask)
// ---------------------------------------------------------------------------

struct ActionImpactRule {
    Formula condition;
    Atom action_template;
    int impact = 0;
    Value value = Value::hedonism;
};

class ActionAdmissibility {
public:
    bool admissible(const Atom& ground_action) const {
        for (const Atom& blocked : blocked_) {
            Substitution s;
            if (unify(blocked, ground_action, s)) return false;
        }
        return true;
    }

    const std::vector<Atom>& blocked_templates() const { return blocked_; }

    void block(Atom templ) { blocked_.push_back(std::move(templ)); }

private:
    std::vector<Atom> blocked_;  // possibly partially instantiated templates
};

// A ground action is inadmissible iff some AI rule fires in b with impact -1
// on a value present in iv and its action template matches.
inline ActionAdmissibility filter_actions(const std::vector<ActionModel>&,
                                          const std::vector<ActionImpactRule>& ai,
                                          const ImportanceOrder& iv, const BeliefBase& b) {
    ActionAdmissibility mask;
    for (const ActionImpactRule& rule : ai) {
        if (rule.impact >= 0 || !iv.contains(rule.value)) continue;
        std::vector<Substitution> subs =
            rule.condition.is_true() ? std::vector<Substitution>{Substitution{}} : evaluate(rule.condition, b);
        for (const Substitution& s : subs) mask.block(s.apply(rule.action_template));
    }
    return mask;
}

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

// One grounded contextual variant of an action name. Several KW entries may
// share a name; in any state the acting semantics of that name is its first
// applicable variant in declaration order.
struct GroundVariant {
    std::size_t model_index = 0;
    std::vector<Atom> pre_pos, pre_neg;
    std::vector<Atom> add, del;

    friend bool operator==(const GroundVariant& a, const GroundVariant& b) {
        return a.pre_pos == b.pre_pos && a.pre_neg == b.pre_neg && a.add == b.add && a.del == b.del;
    }
};

struct GroundAction {
    Atom name;
    std::vector<GroundVariant> variants;
};

inline bool variant_applicable(const GroundVariant& v, const std::set<Atom>& state) {
    for (const Atom& a : v.pre_pos)
        if (!state.count(a)) return false;
    for (const Atom& a : v.pre_neg)
        if (state.count(a)) return false;
    return true;
}

inline const GroundVariant* first_applicable_variant(const GroundAction& ga, const std::set<Atom>& state) {
    for (const GroundVariant& v : ga.variants)
        if (variant_applicable(v, state)) return &v;
    return nullptr;
}

inline void apply_variant(const GroundVariant& v, std::set<Atom>& state) {
    for (const Atom& a : v.del) state.erase(a);
    for (const Atom& a : v.add) state.insert(a);
}

namespace detail {

inline bool cmp_holds(const ConditionLiterals::Cmp& c, const Substitution& s) {
    Term a = s.apply(c.t1), b = s.apply(c.t2);
    if (a.is_variable() || b.is_variable()) throw ModelError("comparison over unbound parameter");
    bool numeric = a.number && b.number;
    bool result;
    switch (c.op) {
        case CmpOp::eq: result = numeric ? *a.number == *b.number : a.name == b.name; break;
        case CmpOp::ne: result = numeric ? *a.number != *b.number : a.name != b.name; break;
        default:
            if (!numeric) throw ModelError("ordering comparison over non-numeric terms in precondition");
            switch (c.op) {
                case CmpOp::lt: result = *a.number < *b.number; break;
                case CmpOp::le: result = *a.number <= *b.number; break;
                case CmpOp::gt: result = *a.number > *b.number; break;
                case CmpOp::ge: result = *a.number >= *b.number; break;
                default: result = false;
            }
    }
    return c.negated ? !result : result;
}

}  // namespace detail

// Grounds every action model over the constant universe (constants of b plus
// declared extras), keeps admissible groundings whose comparison conditions
// hold, and prunes variants not applicable under delete-relaxation
// reachability from b. Output is sorted by action name.
inline std::vector<GroundAction> ground(const std::vector<ActionModel>& kw, const BeliefBase& b,
                                        const std::vector<Term>& extra_constants = {},
                                        const ActionAdmissibility* mask = nullptr) {
    for (const ActionModel& m : kw) check_action_model(m);

    std::set<Term> universe_set;
    for (const Atom& a : b.atoms())
        for (const Term& t : a.args) universe_set.insert(t);
    for (const Term& t : extra_constants)
        if (t.is_constant()) universe_set.insert(t);
    std::vector<Term> universe(universe_set.begin(), universe_set.end());

    struct Candidate {
        Atom name;
        GroundVariant variant;
    };
    std::vector<Candidate> candidates;

    for (std::size_t mi = 0; mi < kw.size(); ++mi) {
        const ActionModel& m = kw[mi];
        ConditionLiterals cond = split_condition(m.condition, "action " + m.action.predicate);
        std::vector<std::string> params;
        for (const Term& t : m.action.args) params.push_back(t.name);

        std::vector<std::size_t> idx(params.size(), 0);
        bool more = true;
        if (!params.empty() && universe.empty()) more = false;
        while (more) {
            Substitution s;
            for (std::size_t i = 0; i < params.size(); ++i) s.bind(params[i], universe[idx[i]]);

            bool cmp_ok = true;
            for (const auto& c : cond.cmps)
                if (!detail::cmp_holds(c, s)) {
                    cmp_ok = false;
                    break;
                }
            if (cmp_ok) {
                Atom name = s.apply(m.action);
                if (!mask || mask->admissible(name)) {
                    GroundVariant v;
                    v.model_index = mi;
                    for (const Atom& a : cond.pos) v.pre_pos.push_back(s.apply(a));
                    for (const Atom& a : cond.neg) v.pre_neg.push_back(s.apply(a));
                    for (const Atom& a : m.add) v.add.push_back(s.apply(a));
                    for (const Atom& a : m.del) v.del.push_back(s.apply(a));
                    candidates.push_back({std::move(name), std::move(v)});
                }
            }

            if (params.empty()) break;
            std::size_t k = 0;
            while (k < idx.size()) {
                if (++idx[k] < universe.size()) break;
                idx[k] = 0;
                ++k;
            }
            if (k == idx.size()) break;
        }
    }

    // delete-relaxation reachability from b
    std::set<Atom> reachable = b.atoms();
    std::vector<bool> enabled(candidates.size(), false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (enabled[i]) continue;
            const GroundVariant& v = candidates[i].variant;
            bool ok = std::all_of(v.pre_pos.begin(), v.pre_pos.end(),
                                  [&](const Atom& a) { return reachable.count(a) != 0; });
            if (!ok) continue;
            enabled[i] = true;
            changed = true;
            for (const Atom& a : v.add)
                if (reachable.insert(a).second) changed = true;
        }
    }

    std::map<Atom, GroundAction> grouped;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!enabled[i]) continue;
        GroundAction& ga = grouped[candidates[i].name];
        ga.name = candidates[i].name;
        bool dup = std::any_of(ga.variants.begin(), ga.variants.end(),
                               [&](const GroundVariant& v) { return v == candidates[i].variant; });
        if (!dup) ga.variants.push_back(std::move(candidates[i].variant));
    }
    std::vector<GroundAction> out;
    out.reserve(grouped.size());
    for (auto& [name, ga] : grouped) {
        std::stable_sort(ga.variants.begin(), ga.variants.end(),
                         [](const GroundVariant& a, const GroundVariant& b) { return a.model_index < b.model_index; });
        out.push_back(std::move(ga));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Goal conditions
// ---------------------------------------------------------------------------

// Bridges a goal atom to the belief literals a plan must achieve. The default
// mapping is the identity: the goal atom itself as the target belief.
struct GoalCondition {
    Atom pattern;
    Formula condition;
};

struct GroundGoal {
    std::vector<Atom> pos, neg;
    bool impossible = false;  // a ground comparison in the condition was false

    bool satisfied(const std::set<Atom>& state) const {
        if (impossible) return false;
        for (const Atom& a : pos)
            if (!state.count(a)) return false;
        for (const Atom& a : neg)
            if (state.count(a)) return false;
        return true;
    }
};

inline GroundGoal resolve_goal_condition(const Atom& goal, const std::vector<GoalCondition>& conditions) {
    for (const GoalCondition& gc : conditions) {
        Substitution s;
        if (!unify(gc.pattern, goal, s)) continue;
        ConditionLiterals lits = split_condition(gc.condition, "goal condition for " + gc.pattern.to_string());
        GroundGoal gg;
        for (const Atom& a : lits.pos) {
            Atom g = s.apply(a);
            if (!g.ground()) throw ModelError("goal condition literal not ground: " + g.to_string());
            gg.pos.push_back(std::move(g));
        }
        for (const Atom& a : lits.neg) {
            Atom g = s.apply(a);
            if (!g.ground()) throw ModelError("goal condition literal not ground: " + g.to_string());
            gg.neg.push_back(std::move(g));
        }
        for (const auto& c : lits.cmps)
            if (!detail::cmp_holds(c, s)) gg.impossible = true;
        return gg;
    }
    GroundGoal gg;
    gg.pos.push_back(goal);
    return gg;
}

// ---------------------------------------------------------------------------
// Forward state-space search
// ---------------------------------------------------------------------------

struct SearchLimits {
    std::size_t max_nodes = 1'000'000;  // expansions
    double max_seconds = 10.0;
};

enum class SearchStrategy : uint8_t { bfs, gbfs };

inline SearchStrategy parse_strategy(std::string_view s) {
    if (s == "bfs") return SearchStrategy::bfs;
    if (s == "gbfs") return SearchStrategy::gbfs;
    throw ConfigError("unknown search strategy '" + std::string(s) + "' (expected bfs or gbfs)");
}

struct Plan {
    Atom goal;
    std::vector<Atom> body;  // ground action names, applicable in sequence
};

enum class PlanOutcome : uint8_t { found, unsolvable, limit_exhausted };

struct PlanResult {
    PlanOutcome outcome = PlanOutcome::unsolvable;
    Plan plan;
    std::size_t expanded = 0;
};

namespace detail {

// Bit-packed state over the interned atom universe.
struct BitState {
    std::vector<std::uint64_t> words;

    bool get(std::size_t i) const { return (words[i >> 6] >> (i & 63)) & 1; }
    void set(std::size_t i) { words[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void clear(std::size_t i) { words[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    friend bool operator==(const BitState& a, const BitState& b) { return a.words == b.words; }
};

struct BitStateHash {
    std::size_t operator()(const BitState& s) const {
        std::size_t h = 1469598103934665603ull;
        for (std::uint64_t w : s.words) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return h;
    }
};

struct CompiledVariant {
    std::vector<std::uint32_t> pre_pos, pre_neg, add, del;
    bool dead = false;  // a positive precondition atom outside the universe
};

struct CompiledAction {
    std::size_t index;  // into the GroundAction list
    std::vector<CompiledVariant> variants;
};

}  // namespace detail

// Minimum-length plan via breadth-first search (ties broken toward the
// lexicographically least action-name sequence), or a greedy best-first
// search under the goal-count heuristic. Limit exhaustion is reported
// distinctly from proven unsolvability.
inline PlanResult plan_for_goal(const std::set<Atom>& init, const GroundGoal& goal,
                                const std::vector<GroundAction>& actions,
                                const SearchLimits& limits = {},
                                SearchStrategy strategy = SearchStrategy::bfs) {
    PlanResult result;
    if (goal.impossible) {
        result.outcome = PlanOutcome::unsolvable;
        return result;
    }

    // intern the atom universe: init plus everything any action can add
    std::map<Atom, std::uint32_t> ids;
    std::vector<Atom> atom_of;
    auto intern = [&](const Atom& a) {
        auto [it, inserted] = ids.emplace(a, static_cast<std::uint32_t>(atom_of.size()));
        if (inserted) atom_of.push_back(a);
        return it->second;
    };
    for (const Atom& a : init) intern(a);
    for (const GroundAction& ga : actions)
        for (const GroundVariant& v : ga.variants)
            for (const Atom& a : v.add) intern(a);

    const std::size_t n_atoms = atom_of.size();
    const std::size_t n_words = (n_atoms + 63) / 64;

    // goal literals; a positive literal outside the universe is unreachable
    std::vector<std::uint32_t> goal_pos, goal_neg;
    for (const Atom& a : goal.pos) {
        auto it = ids.find(a);
        if (it == ids.end()) {
            result.outcome = PlanOutcome::unsolvable;
            return result;
        }
        goal_pos.push_back(it->second);
    }
    for (const Atom& a : goal.neg) {
        auto it = ids.find(a);
        if (it != ids.end()) goal_neg.push_back(it->second);
    }

    std::vector<detail::CompiledAction> compiled;
    compiled.reserve(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        detail::CompiledAction ca;
        ca.index = i;
        for (const GroundVariant& v : actions[i].variants) {
            detail::CompiledVariant cv;
            for (const Atom& a : v.pre_pos) {
                auto it = ids.find(a);
                if (it == ids.end()) {
                    cv.dead = true;
                    break;
                }
                cv.pre_pos.push_back(it->second);
            }
            if (!cv.dead) {
                for (const Atom& a : v.pre_neg) {
                    auto it = ids.find(a);
                    if (it != ids.end()) cv.pre_neg.push_back(it->second);
                }
                for (const Atom& a : v.add) cv.add.push_back(ids.at(a));
                for (const Atom& a : v.del) {
                    auto it = ids.find(a);
                    if (it != ids.end()) cv.del.push_back(it->second);
                }
            }
            ca.variants.push_back(std::move(cv));
        }
        compiled.push_back(std::move(ca));
    }

    detail::BitState start;
    start.words.assign(n_words, 0);
    for (const Atom& a : init) start.set(ids.at(a));

    auto satisfied = [&](const detail::BitState& s) {
        for (auto i : goal_pos)
            if (!s.get(i)) return false;
        for (auto i : goal_neg)
            if (s.get(i)) return false;
        return true;
    };
    auto goal_distance = [&](const detail::BitState& s) {
        std::size_t h = 0;
        for (auto i : goal_pos)
            if (!s.get(i)) ++h;
        for (auto i : goal_neg)
            if (s.get(i)) ++h;
        return h;
    };
    auto applicable = [&](const detail::CompiledVariant& v, const detail::BitState& s) {
        if (v.dead) return false;
        for (auto i : v.pre_pos)
            if (!s.get(i)) return false;
        for (auto i : v.pre_neg)
            if (s.get(i)) return false;
        return true;
    };

    struct Node {
        detail::BitState state;
        std::int64_t parent;
        std::size_t action;
    };
    std::vector<Node> nodes;
    std::unordered_set<detail::BitState, detail::BitStateHash> visited;

    auto build_plan = [&](std::int64_t node_index) {
        std::vector<Atom> body;
        for (std::int64_t i = node_index; i > 0; i = nodes[static_cast<std::size_t>(i)].parent)
            body.push_back(actions[nodes[static_cast<std::size_t>(i)].action].name);
        std::reverse(body.begin(), body.end());
        result.outcome = PlanOutcome::found;
        result.plan.body = std::move(body);
    };

    nodes.push_back({start, -1, 0});
    visited.insert(start);
    if (satisfied(start)) {
        build_plan(0);
        return result;
    }

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(limits.max_seconds);
    auto out_of_time = [&]() { return std::chrono::steady_clock::now() > deadline; };

    auto expand = [&](std::size_t node_index, auto&& on_child) -> std::int64_t {
        for (std::size_t ai = 0; ai < compiled.size(); ++ai) {
            const detail::CompiledVariant* chosen = nullptr;
            for (const auto& v : compiled[ai].variants)
                if (applicable(v, nodes[node_index].state)) {
                    chosen = &v;
                    break;
                }
            if (!chosen) continue;
            detail::BitState next = nodes[node_index].state;
            for (auto i : chosen->del) next.clear(i);
            for (auto i : chosen->add) next.set(i);
            if (!visited.insert(next).second) continue;
            nodes.push_back({std::move(next), static_cast<std::int64_t>(node_index), ai});
            std::size_t child = nodes.size() - 1;
            if (satisfied(nodes[child].state)) return static_cast<std::int64_t>(child);
            on_child(child);
        }
        return -1;
    };

    if (strategy == SearchStrategy::bfs) {
        std::deque<std::size_t> frontier{0};
        while (!frontier.empty()) {
            if (result.expanded >= limits.max_nodes || (result.expanded % 1024 == 0 && out_of_time())) {
                result.outcome = PlanOutcome::limit_exhausted;
                return result;
            }
            std::size_t cur = frontier.front();
            frontier.pop_front();
            ++result.expanded;
            std::int64_t found = expand(cur, [&](std::size_t child) { frontier.push_back(child); });
            if (found >= 0) {
                build_plan(found);
                return result;
            }
        }
    } else {
        using Entry = std::pair<std::pair<std::size_t, std::size_t>, std::size_t>;  // ((h, tick), node)
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
        std::size_t tick = 0;
        frontier.push({{goal_distance(start), tick++}, 0});
        while (!frontier.empty()) {
            if (result.expanded >= limits.max_nodes || (result.expanded % 1024 == 0 && out_of_time())) {
                result.outcome = PlanOutcome::limit_exhausted;
                return result;
            }
            std::size_t cur = frontier.top().second;
            frontier.pop();
            ++result.expanded;
            std::int64_t found = expand(cur, [&](std::size_t child) {
                frontier.push({{goal_distance(nodes[child].state), tick++}, child});
            });
            if (found >= 0) {
                build_plan(found);
                return result;
            }
        }
    }

    result.outcome = PlanOutcome::unsolvable;
    return result;
}

// ---------------------------------------------------------------------------
// Plan validation (replay oracle)
// ---------------------------------------------------------------------------

struct PlanValidation {
    bool valid = false;
    std::size_t failed_step = 0;  // index of the first violated step
    std::string reason;           // empty when valid
};

inline PlanValidation validate_plan(const std::set<Atom>& init, const std::vector<GroundAction>& actions,
                                    const GroundGoal& goal, const Plan& plan) {
    std::set<Atom> state = init;
    for (std::size_t i = 0; i < plan.body.size(); ++i) {
        const GroundAction* ga = nullptr;
        for (const GroundAction& cand : actions)
            if (cand.name == plan.body[i]) {
                ga = &cand;
                break;
            }
        if (!ga) return {false, i, "unknown action " + plan.body[i].to_string()};
        const GroundVariant* v = first_applicable_variant(*ga, state);
        if (!v) return {false, i, "precondition of " + plan.body[i].to_string() + " does not hold"};
        apply_variant(*v, state);
    }
    if (!goal.satisfied(state)) return {false, plan.body.size(), "goal condition not satisfied at the end"};
    return {true, 0, ""};
}

// ---------------------------------------------------------------------------
// planning: one problem per goal in G(t) order, each against the belief
// snapshot projected through previously planned goals' effects. Goals with
// no plan are marked fail.
// ---------------------------------------------------------------------------

struct OutcomeUpdate {
    Atom goal;
    GoalSource source = GoalSource::self;
    GoalStatus outcome = GoalStatus::fail;
    std::string reason;
    std::vector<Atom> beliefs_at_outcome;  // audit mode: snapshot when the outcome was decided
};

struct PlannedGoal {
    GoalState goal;
    bool planned = false;
    Plan plan;
    PlanOutcome outcome = PlanOutcome::unsolvable;
    double seconds = 0.0;                // grounding + search for this goal
    std::set<Atom> init;                 // projected initial state the goal was planned on
    std::vector<GroundAction> actions;   // admissible ground actions for this goal
};

struct PlanningResult {
    std::vector<PlannedGoal> goals;      // one entry per goal in G(t) order
    std::vector<Plan> plans;             // found plans only, in order
    std::vector<OutcomeUpdate> updates;  // fail updates for unplannable goals
};

inline PlanningResult planning(const BeliefBase& b, const ImportanceOrder& iv,
                               const std::vector<GoalState>& g, const std::vector<ActionModel>& kw,
                               const std::vector<ActionImpactRule>& ai,
                               const std::vector<GoalCondition>& goal_conditions,
                               const std::vector<Term>& declared_constants = {},
                               const SearchLimits& limits = {}, SearchStrategy strategy = SearchStrategy::bfs,
                               TraceNotes* notes = nullptr) {
    PlanningResult result;
    ActionAdmissibility mask = filter_actions(kw, ai, iv, b);

    std::set<Atom> state = b.atoms();
    for (const GoalState& goal_state : g) {
        PlannedGoal pg;
        pg.goal = goal_state;
        auto t0 = std::chrono::steady_clock::now();

        BeliefBase projected;
        for (const Atom& a : state) projected.assert_belief(a);

        std::vector<Term> extra = declared_constants;
        for (const Term& t : goal_state.goal.args) extra.push_back(t);
        GroundGoal target = resolve_goal_condition(goal_state.goal, goal_conditions);
        for (const Atom& a : target.pos)
            for (const Term& t : a.args) extra.push_back(t);

        pg.actions = ground(kw, projected, extra, &mask);
        pg.init = state;
        PlanResult pr = plan_for_goal(state, target, pg.actions, limits, strategy);
        pg.outcome = pr.outcome;
        pg.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (pr.outcome == PlanOutcome::found) {
            pg.planned = true;
            pg.plan = pr.plan;
            pg.plan.goal = goal_state.goal;
            result.plans.push_back(pg.plan);
            // project the plan's effects for the goals that follow
            for (const Atom& step : pg.plan.body) {
                for (const GroundAction& ga : pg.actions) {
                    if (ga.name != step) continue;
                    if (const GroundVariant* v = first_applicable_variant(ga, state)) apply_variant(*v, state);
                    break;
                }
            }
        } else {
            const char* why = pr.outcome == PlanOutcome::limit_exhausted
                                  ? "planning limits exhausted"
                                  : "no plan exists";
            result.updates.push_back({goal_state.goal, goal_state.source, GoalStatus::fail, why});
            trace(notes, std::string("planning failed for ") + goal_state.goal.to_string() + ": " + why);
        }
        result.goals.push_back(std::move(pg));
    }
    return result;
}

}  // namespace smash
