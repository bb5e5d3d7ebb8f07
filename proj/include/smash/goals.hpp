#pragma once

// Goal-reasoning layer: the goal status set GS(t) with its six-status
// lifecycle, goal-activation and goal-impact rules, and the
// update / select / sort cycle that emits the ordered goal list G(t).

#include "smash/logic.hpp"
#include "smash/values.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace smash {

enum class GoalStatus : uint8_t { waiting, active, inactive, success, fail, dropped };
enum class GoalSource : uint8_t { user, self };

inline std::string_view goal_status_name(GoalStatus s) {
    switch (s) {
        case GoalStatus::waiting: return "waiting";
        case GoalStatus::active: return "active";
        case GoalStatus::inactive: return "inactive";
        case GoalStatus::success: return "success";
        case GoalStatus::fail: return "fail";
        case GoalStatus::dropped: return "dropped";
    }
    return "?";
}

inline GoalStatus parse_goal_status(std::string_view name) {
    for (GoalStatus s : {GoalStatus::waiting, GoalStatus::active, GoalStatus::inactive,
                         GoalStatus::success, GoalStatus::fail, GoalStatus::dropped})
        if (goal_status_name(s) == name) return s;
    throw ConfigError("unknown goal status '" + std::string(name) + "'");
}

inline std::string_view goal_source_name(GoalSource s) {
    return s == GoalSource::user ? "user" : "self";
}

inline GoalSource parse_goal_source(std::string_view name) {
    if (name == "user") return GoalSource::user;
    if (name == "self") return GoalSource::self;
    throw ConfigError("unknown goal source '" + std::string(name) + "'");
}

// Legal transition relation of the goal lifecycle. Terminal statuses admit
// no transition within a lifetime; a terminal user goal may be re-posted,
// which starts a fresh lifetime (handled by update, not here).
inline bool legal_transition(GoalStatus from, GoalStatus to) {
    switch (from) {
        case GoalStatus::waiting:
            return to == GoalStatus::active || to == GoalStatus::inactive || to == GoalStatus::dropped;
        case GoalStatus::active:
            return to == GoalStatus::success || to == GoalStatus::fail || to == GoalStatus::dropped ||
                   to == GoalStatus::inactive;
        case GoalStatus::inactive:
            return to == GoalStatus::active || to == GoalStatus::dropped || to == GoalStatus::waiting;
        case GoalStatus::success:
        case GoalStatus::fail:
        case GoalStatus::dropped:
            return false;
    }
    return false;
}

inline bool terminal_status(GoalStatus s) {
    return s == GoalStatus::success || s == GoalStatus::fail || s == GoalStatus::dropped;
}

struct GoalState {
    Atom goal;
    GoalStatus status = GoalStatus::waiting;
    GoalSource source = GoalSource::user;

    std::string to_string() const {
        return "state(" + goal.to_string() + ", " + std::string(goal_status_name(status)) + ", " +
               std::string(goal_source_name(source)) + ")";
    }

    friend bool operator==(const GoalState& a, const GoalState& b) {
        return a.goal == b.goal && a.status == b.status && a.source == b.source;
    }
};

// Every attempted status write, applied or not. Audited by the acceptance
// suite against the legal-transition relation.
struct TransitionRecord {
    Atom goal;
    GoalSource source = GoalSource::user;
    std::optional<GoalStatus> from;  // empty on insert
    GoalStatus to = GoalStatus::waiting;
    bool applied = false;
    bool fresh_lifetime = false;
    std::string reason;
};

using TransitionAudit = std::vector<TransitionRecord>;

struct SequencingError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Goal status set: at most one entry per (goal, source) key, arrival order
// preserved. All writes funnel through write() so every transition is
// checked and recorded.
// ---------------------------------------------------------------------------

class GoalStatusSet {
public:
    enum class WriteResult : uint8_t { inserted, applied, unchanged, illegal };

    const std::vector<GoalState>& entries() const { return entries_; }

    const GoalState* find(const Atom& goal, GoalSource source) const {
        for (const GoalState& g : entries_)
            if (g.source == source && g.goal == goal) return &g;
        return nullptr;
    }

    WriteResult write(const Atom& goal, GoalSource source, GoalStatus to, TransitionAudit* audit,
                      bool fresh_lifetime = false, const std::string& why = {}) {
        GoalState* existing = nullptr;
        for (GoalState& g : entries_)
            if (g.source == source && g.goal == goal) {
                existing = &g;
                break;
            }
        TransitionRecord rec;
        rec.goal = goal;
        rec.source = source;
        rec.to = to;
        rec.reason = why;
        if (!existing) {
            entries_.push_back({goal, to, source});
            rec.applied = true;
            if (audit) audit->push_back(std::move(rec));
            return WriteResult::inserted;
        }
        rec.from = existing->status;
        if (existing->status == to) {
            if (audit) audit->push_back(std::move(rec));
            return WriteResult::unchanged;
        }
        if (fresh_lifetime && terminal_status(existing->status) && to == GoalStatus::waiting) {
            existing->status = to;
            rec.applied = true;
            rec.fresh_lifetime = true;
            if (audit) audit->push_back(std::move(rec));
            return WriteResult::applied;
        }
        if (!legal_transition(existing->status, to)) {
            if (audit) audit->push_back(std::move(rec));
            return WriteResult::illegal;
        }
        existing->status = to;
        rec.applied = true;
        if (audit) audit->push_back(std::move(rec));
        return WriteResult::applied;
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    friend bool operator==(const GoalStatusSet& a, const GoalStatusSet& b) {
        return a.entries_ == b.entries_;
    }

private:
    std::vector<GoalState> entries_;
};

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

struct GoalActivationRule {
    struct BodyItem {
        Atom goal_template;
        GoalStatus status = GoalStatus::active;
        GoalSource source = GoalSource::self;
    };

    bool builtin_default = false;  // Eq. 3: waiting user goals become active
    Formula condition;
    std::vector<BodyItem> body;

    static GoalActivationRule default_rule() {
        GoalActivationRule r;
        r.builtin_default = true;
        return r;
    }
};

// Parses "state(goal(args), status, source)". The goal slot may itself be an
// atom with arguments, so the wrapper is split at its top-level commas.
inline GoalActivationRule::BodyItem parse_goal_state_template(std::string_view text) {
    auto bad = [&](const std::string& why) {
        return ConfigError("bad goal-state template '" + std::string(text) + "': " + why);
    };
    std::string s(text);
    auto lp = s.find('(');
    auto rp = s.rfind(')');
    if (lp == std::string::npos || rp == std::string::npos || rp < lp) throw bad("unbalanced parentheses");
    std::string head = s.substr(0, lp);
    head.erase(std::remove_if(head.begin(), head.end(), [](char c) { return c == ' ' || c == '\t'; }), head.end());
    if (head != "state") throw bad("expected the state(...) wrapper");
    std::string inner = s.substr(lp + 1, rp - lp - 1);
    // split at the last two top-level commas
    std::vector<std::size_t> commas;
    int depth = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        if (inner[i] == '(') ++depth;
        else if (inner[i] == ')') --depth;
        else if (inner[i] == ',' && depth == 0) commas.push_back(i);
    }
    if (commas.size() < 2) throw bad("expected goal, status, source");
    std::size_t c2 = commas[commas.size() - 1];
    std::size_t c1 = commas[commas.size() - 2];
    auto trim = [](std::string s) {
        auto a = s.find_first_not_of(" \t");
        auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    GoalActivationRule::BodyItem item;
    item.goal_template = parse_atom(trim(inner.substr(0, c1)));
    item.status = parse_goal_status(trim(inner.substr(c1 + 1, c2 - c1 - 1)));
    item.source = parse_goal_source(trim(inner.substr(c2 + 1)));
    return item;
}

struct GoalImpactRule {
    Formula condition;
    Atom goal_template;
    int impact = 0;  // -1, 0, +1
    Value value = Value::hedonism;
};

// ---------------------------------------------------------------------------
// update: insert user-given goals as waiting; re-post terminal user goals
// (fresh lifetime); leave live entries untouched.
// ---------------------------------------------------------------------------

inline GoalStatusSet update(GoalStatusSet gs, const std::vector<Atom>& gg,
                            TransitionAudit* audit = nullptr, TraceNotes* notes = nullptr) {
    for (const Atom& g : gg) {
        if (!g.ground()) throw EvalError("user goal must be ground: " + g.to_string());
        const GoalState* existing = gs.find(g, GoalSource::user);
        if (!existing) {
            gs.write(g, GoalSource::user, GoalStatus::waiting, audit, false, "posted by user");
            continue;
        }
        if (terminal_status(existing->status)) {
            gs.write(g, GoalSource::user, GoalStatus::waiting, audit, true, "re-posted by user");
        } else {
            trace(notes, "duplicate user goal suppressed: " + g.to_string() + " already " +
                             std::string(goal_status_name(existing->status)));
        }
    }
    return gs;
}

// ---------------------------------------------------------------------------
// select: apply goal-activation rules in order, one firing per condition
// substitution; illegal transitions are skipped with a trace entry.
// ---------------------------------------------------------------------------

inline GoalStatusSet select(GoalStatusSet gs, const BeliefBase& b,
                            const std::vector<GoalActivationRule>& ga,
                            TransitionAudit* audit = nullptr, TraceNotes* notes = nullptr) {
    for (const GoalActivationRule& rule : ga) {
        if (rule.builtin_default) {
            // Eq. 3: state(Goal, waiting, user) -> state(Goal, active, user)
            std::vector<Atom> waiting;
            for (const GoalState& g : gs.entries())
                if (g.source == GoalSource::user && g.status == GoalStatus::waiting)
                    waiting.push_back(g.goal);
            for (const Atom& g : waiting)
                gs.write(g, GoalSource::user, GoalStatus::active, audit, false, "default activation rule");
            continue;
        }
        std::vector<Substitution> firings =
            rule.condition.is_true() ? std::vector<Substitution>{Substitution{}} : evaluate(rule.condition, b);
        for (const Substitution& s : firings) {
            for (const GoalActivationRule::BodyItem& item : rule.body) {
                Atom goal = s.apply(item.goal_template);
                if (!goal.ground()) {
                    trace(notes, "skipped activation of non-ground goal template " + goal.to_string());
                    continue;
                }
                auto res = gs.write(goal, item.source, item.status, audit, false, "goal-activation rule");
                if (res == GoalStatusSet::WriteResult::illegal) {
                    const GoalState* cur = gs.find(goal, item.source);
                    trace(notes, "skipped illegal transition " +
                                     std::string(goal_status_name(cur->status)) + " -> " +
                                     std::string(goal_status_name(item.status)) + " for " + goal.to_string());
                }
            }
        }
    }
    return gs;
}

// ---------------------------------------------------------------------------
// sort: drop active self goals that negatively impact a value present in
// IV(t); order the rest by impact score (lexicographic over IV buckets,
// most-important first, larger first, stable). Active user goals precede all
// self goals in arrival order.
// ---------------------------------------------------------------------------

struct FiredImpact {
    std::size_t rule_index;
    Value value;
    int impact;
};

// All distinct GI firings against one goal: condition substitutions extended
// by unification of the rule's goal template with the goal atom.
inline std::vector<FiredImpact> fired_goal_impacts(const Atom& goal, const BeliefBase& b,
                                                   const std::vector<GoalImpactRule>& gi) {
    std::vector<FiredImpact> fired;
    for (std::size_t r = 0; r < gi.size(); ++r) {
        const GoalImpactRule& rule = gi[r];
        std::vector<Substitution> subs =
            rule.condition.is_true() ? std::vector<Substitution>{Substitution{}} : evaluate(rule.condition, b);
        std::set<Substitution> seen;
        for (const Substitution& s : subs) {
            Substitution ext = s;
            if (!unify(rule.goal_template, goal, ext)) continue;
            if (!seen.insert(ext).second) continue;
            fired.push_back({r, rule.value, rule.impact});
        }
    }
    return fired;
}

inline std::vector<int> impact_score(const std::vector<FiredImpact>& fired, const ImportanceOrder& iv) {
    std::vector<int> score(iv.buckets.size(), 0);
    for (const FiredImpact& f : fired)
        if (auto rank = iv.rank_of(f.value)) score[*rank] += f.impact;
    return score;
}

struct SortResult {
    std::vector<GoalState> goals;  // G(t), most-preferred first
    GoalStatusSet gs;
};

inline SortResult sort_goals(GoalStatusSet gs, const BeliefBase& b, const std::vector<GoalImpactRule>& gi,
                             const ImportanceOrder& iv, TransitionAudit* audit = nullptr,
                             TraceNotes* notes = nullptr) {
    std::vector<GoalState> users;
    struct Scored {
        GoalState goal;
        std::vector<int> score;
        std::size_t arrival;
    };
    std::vector<Scored> selfs;

    std::size_t arrival = 0;
    for (const GoalState& g : gs.entries()) {
        ++arrival;
        if (g.status != GoalStatus::active) continue;
        if (g.source == GoalSource::user) {
            users.push_back(g);
            continue;
        }
        std::vector<FiredImpact> fired = fired_goal_impacts(g.goal, b, gi);
        bool drop = std::any_of(fired.begin(), fired.end(), [&](const FiredImpact& f) {
            return f.impact < 0 && iv.contains(f.value);
        });
        if (drop) {
            gs.write(g.goal, g.source, GoalStatus::dropped, audit, false,
                     "negative impact on a value in IV(t)");
            trace(notes, "dropped " + g.goal.to_string() + ": negative value impact");
            continue;
        }
        selfs.push_back({g, impact_score(fired, iv), arrival});
    }

    std::stable_sort(selfs.begin(), selfs.end(), [](const Scored& a, const Scored& b) {
        return std::lexicographical_compare(b.score.begin(), b.score.end(), a.score.begin(), a.score.end());
    });

    SortResult out;
    out.goals = std::move(users);
    for (Scored& s : selfs) out.goals.push_back(std::move(s.goal));
    out.gs = std::move(gs);
    return out;
}

// ---------------------------------------------------------------------------
// Eq. 2: GoalReasoning = update -> select -> sort
// ---------------------------------------------------------------------------

struct GoalReasoningResult {
    std::vector<GoalState> goals;  // G(t)
    GoalStatusSet gs;
};

inline GoalReasoningResult goal_reasoning(const BeliefBase& b, const std::vector<Atom>& gg,
                                          const ImportanceOrder& iv, GoalStatusSet gs,
                                          const std::vector<GoalActivationRule>& ga,
                                          const std::vector<GoalImpactRule>& gi,
                                          TransitionAudit* audit = nullptr, TraceNotes* notes = nullptr) {
    gs = update(std::move(gs), gg, audit, notes);
    gs = select(std::move(gs), b, ga, audit, notes);
    SortResult sorted = sort_goals(std::move(gs), b, gi, iv, audit, notes);
    return {std::move(sorted.goals), std::move(sorted.gs)};
}

// ---------------------------------------------------------------------------
// Outcome reporting from the planning and acting layers.
// ---------------------------------------------------------------------------

inline GoalStatusSet set_outcome(GoalStatusSet gs, const Atom& goal, GoalSource source, GoalStatus outcome,
                                 TransitionAudit* audit = nullptr, const std::string& why = {}) {
    if (outcome != GoalStatus::success && outcome != GoalStatus::fail)
        throw SequencingError("outcome must be success or fail");
    const GoalState* entry = gs.find(goal, source);
    if (!entry)
        throw SequencingError("set_outcome: no entry for " + goal.to_string());
    if (entry->status != GoalStatus::active)
        throw SequencingError("set_outcome: " + goal.to_string() + " is " +
                              std::string(goal_status_name(entry->status)) + ", not active");
    gs.write(goal, source, outcome, audit, false, why);
    return gs;
}

}  // namespace smash
