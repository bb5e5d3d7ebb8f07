#pragma once

// PDDL emission and parsing for the STRIPS subset the planning layer uses.
// Emission is byte-stable: identical inputs produce identical files, so any
// external STRIPS planner can be substituted for the embedded one.

#include "smash/planning.hpp"

#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace smash {

struct PddlError : Error {
    std::size_t line = 0, col = 0;
    PddlError(std::size_t line_, std::size_t col_, const std::string& what_)
        : Error("pddl error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + what_),
          line(line_), col(col_) {}
    explicit PddlError(const std::string& what_) : Error(what_) {}
};

namespace pddl_detail {

// Numeric constants are not valid PDDL names; they are emitted with an "n"
// prefix and dots as underscores (80 -> n80, 3.5 -> n3_5). A user constant
// that already looks like that cannot round-trip.
inline std::string emit_term(const Term& t) {
    if (t.is_variable()) {
        std::string s = "?";
        for (char c : t.name) s.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        return s;
    }
    if (t.number) {
        std::string s = "n";
        for (char c : t.name) s.push_back(c == '.' ? '_' : c);
        return s;
    }
    return t.name;
}

inline Term parse_term_token(const std::string& tok) {
    if (!tok.empty() && tok[0] == '?') {
        std::string name = tok.substr(1);
        if (!name.empty() && name[0] >= 'a' && name[0] <= 'z') name[0] = static_cast<char>(name[0] - 'a' + 'A');
        return Term::variable(name);
    }
    if (tok.size() > 1 && tok[0] == 'n') {
        bool numeric = true;
        bool dot = false;
        for (std::size_t i = 1; i < tok.size(); ++i) {
            char c = tok[i];
            if (c == '_' && !dot && i > 1 && i + 1 < tok.size()) { dot = true; continue; }
            if (c < '0' || c > '9') { numeric = false; break; }
        }
        if (numeric) {
            std::string body = tok.substr(1);
            for (char& c : body) if (c == '_') c = '.';
            return Term::constant(body);
        }
    }
    return Term::constant(tok);
}

inline std::string emit_atom(const Atom& a) {
    std::string s = "(" + a.predicate;
    for (const Term& t : a.args) s += " " + emit_term(t);
    s += ")";
    return s;
}

}  // namespace pddl_detail

struct PddlFiles {
    std::string domain;
    std::string problem;
};

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline PddlFiles emit_pddl(const std::string& domain_name, const std::vector<ActionModel>& actions,
                           const BeliefBase& init, const GroundGoal& goal) {
    using pddl_detail::emit_atom;
    using pddl_detail::emit_term;

    // predicates with representative variable lists, collected everywhere
    std::map<std::pair<std::string, std::size_t>, bool> predicates;
    auto note_atom = [&](const Atom& a) { predicates[{a.predicate, a.arity()}] = true; };

    std::ostringstream dom;
    dom << "(define (domain " << domain_name << ")\n";
    dom << "  (:requirements :strips)\n";

    std::ostringstream acts;
    for (const ActionModel& m : actions) {
        ConditionLiterals lits;
        try {
            lits = split_condition(m.condition, "action " + m.action.predicate);
        } catch (const ModelError& e) {
            throw PddlError(std::string(e.what()) + " (not emittable as STRIPS)");
        }
        if (!lits.cmps.empty())
            throw PddlError("action " + m.action.predicate +
                            ": comparison preconditions are not emittable as STRIPS");
        for (const Atom& a : lits.pos) note_atom(a);
        for (const Atom& a : lits.neg) note_atom(a);
        for (const Atom& a : m.add) note_atom(a);
        for (const Atom& a : m.del) note_atom(a);

        acts << "  (:action " << m.action.predicate << "\n";
        acts << "    :parameters (";
        for (std::size_t i = 0; i < m.action.args.size(); ++i)
            acts << (i ? " " : "") << emit_term(m.action.args[i]);
        acts << ")\n";
        acts << "    :precondition (and";
        for (const Atom& a : lits.pos) acts << " " << emit_atom(a);
        for (const Atom& a : lits.neg) acts << " (not " << emit_atom(a) << ")";
        acts << ")\n";
        acts << "    :effect (and";
        for (const Atom& a : m.add) acts << " " << emit_atom(a);
        for (const Atom& a : m.del) acts << " (not " << emit_atom(a) << ")";
        acts << "))\n";
    }
    for (const Atom& a : init.atoms()) note_atom(a);
    for (const Atom& a : goal.pos) note_atom(a);
    for (const Atom& a : goal.neg) note_atom(a);

    dom << "  (:predicates\n";
    for (const auto& [key, unused] : predicates) {
        dom << "    (" << key.first;
        for (std::size_t i = 0; i < key.second; ++i) dom << " ?x" << i;
        dom << ")\n";
    }
    dom << "  )\n";
    dom << acts.str();
    dom << ")\n";

    std::set<std::string> objects;
    auto note_objects = [&](const Atom& a) {
        for (const Term& t : a.args)
            if (t.is_constant()) objects.insert(emit_term(t));
    };
    for (const Atom& a : init.atoms()) note_objects(a);
    for (const Atom& a : goal.pos) note_objects(a);
    for (const Atom& a : goal.neg) note_objects(a);

    std::ostringstream prob;
    prob << "(define (problem " << domain_name << "-problem)\n";
    prob << "  (:domain " << domain_name << ")\n";
    prob << "  (:objects";
    for (const std::string& o : objects) prob << " " << o;
    prob << ")\n";
    prob << "  (:init\n";
    for (const Atom& a : init.atoms()) prob << "    " << emit_atom(a) << "\n";
    prob << "  )\n";
    prob << "  (:goal (and";
    for (const Atom& a : goal.pos) prob << " " << emit_atom(a);
    for (const Atom& a : goal.neg) prob << " (not " << emit_atom(a) << ")";
    prob << "))\n";
    prob << ")\n";

    return {dom.str(), prob.str()};
}

// ---------------------------------------------------------------------------
// Parsing (inverse of emit_pddl on its output subset)
// ---------------------------------------------------------------------------

namespace pddl_detail {

struct Sexp {
    bool is_list = false;
    std::string symbol;
    std::vector<Sexp> items;
    std::size_t line = 0, col = 0;
};

class SexpParser {
public:
    explicit SexpParser(std::string_view src) : src_(src) {}

    Sexp parse() {
        skip_ws();
        Sexp e = parse_one();
        skip_ws();
        if (pos_ < src_.size()) throw PddlError(line_, col_, "trailing input after the top-level form");
        return e;
    }

private:
    Sexp parse_one() {
        skip_ws();
        if (pos_ >= src_.size()) throw PddlError(line_, col_, "unexpected end of input");
        Sexp e;
        e.line = line_;
        e.col = col_;
        if (src_[pos_] == '(') {
            advance();
            e.is_list = true;
            while (true) {
                skip_ws();
                if (pos_ >= src_.size()) throw PddlError(e.line, e.col, "unclosed parenthesis");
                if (src_[pos_] == ')') {
                    advance();
                    return e;
                }
                e.items.push_back(parse_one());
            }
        }
        if (src_[pos_] == ')') throw PddlError(line_, col_, "unmatched ')'");
        std::size_t start = pos_;
        while (pos_ < src_.size() && !strchr(" \t\r\n()", src_[pos_])) advance();
        e.symbol = std::string(src_.substr(start, pos_ - start));
        for (char& c : e.symbol)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return e;
    }

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ';') {  // comment to end of line
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1, col_ = 1;
};

inline Atom sexp_to_atom(const Sexp& e) {
    if (!e.is_list || e.items.empty() || e.items[0].is_list)
        throw PddlError(e.line, e.col, "expected an atom");
    Atom a;
    a.predicate = e.items[0].symbol;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
        if (e.items[i].is_list) throw PddlError(e.items[i].line, e.items[i].col, "expected a term");
        a.args.push_back(parse_term_token(e.items[i].symbol));
    }
    return a;
}

// (and lit*) | lit ; each lit is (pred ...) or (not (pred ...))
inline void sexp_to_literals(const Sexp& e, std::vector<Atom>& pos, std::vector<Atom>& neg) {
    if (!e.is_list || e.items.empty()) {
        if (e.is_list && e.items.empty()) return;  // (and) emitted for empty conditions
        throw PddlError(e.line, e.col, "expected a condition");
    }
    if (!e.items[0].is_list && e.items[0].symbol == "and") {
        for (std::size_t i = 1; i < e.items.size(); ++i) sexp_to_literals(e.items[i], pos, neg);
        return;
    }
    if (!e.items[0].is_list && e.items[0].symbol == "not") {
        if (e.items.size() != 2) throw PddlError(e.line, e.col, "(not ...) takes one literal");
        neg.push_back(sexp_to_atom(e.items[1]));
        return;
    }
    if (!e.items[0].is_list && (e.items[0].symbol == "or" || e.items[0].symbol == "exists" ||
                                e.items[0].symbol == "forall" || e.items[0].symbol == "when"))
        throw PddlError(e.line, e.col, "'" + e.items[0].symbol + "' is outside the STRIPS subset");
    pos.push_back(sexp_to_atom(e));
}

}  // namespace pddl_detail

struct PddlTask {
    std::string domain_name;
    std::vector<ActionModel> models;
    BeliefBase init;
    GroundGoal goal;
};

inline PddlTask parse_pddl(const std::string& domain_text, const std::string& problem_text) {
    using namespace pddl_detail;
    PddlTask task;

    Sexp dom = SexpParser(domain_text).parse();
    if (!dom.is_list || dom.items.size() < 2 || dom.items[0].symbol != "define")
        throw PddlError(dom.line, dom.col, "expected (define (domain ...) ...)");
    const Sexp& dhead = dom.items[1];
    if (!dhead.is_list || dhead.items.size() != 2 || dhead.items[0].symbol != "domain")
        throw PddlError(dhead.line, dhead.col, "expected (domain NAME)");
    task.domain_name = dhead.items[1].symbol;

    for (std::size_t i = 2; i < dom.items.size(); ++i) {
        const Sexp& section = dom.items[i];
        if (!section.is_list || section.items.empty()) throw PddlError(section.line, section.col, "expected a section");
        const std::string& tag = section.items[0].symbol;
        if (tag == ":requirements" || tag == ":predicates") continue;
        if (tag != ":action") throw PddlError(section.line, section.col, "unsupported section '" + tag + "'");
        if (section.items.size() < 2 || section.items[1].is_list)
            throw PddlError(section.line, section.col, "expected an action name");
        ActionModel m;
        m.action.predicate = section.items[1].symbol;
        Formula cond;
        for (std::size_t j = 2; j + 1 < section.items.size(); j += 2) {
            const std::string& key = section.items[j].symbol;
            const Sexp& value = section.items[j + 1];
            if (key == ":parameters") {
                if (!value.is_list) throw PddlError(value.line, value.col, "expected a parameter list");
                for (const Sexp& p : value.items) {
                    if (p.is_list || p.symbol.empty() || p.symbol[0] != '?')
                        throw PddlError(p.line, p.col, "expected a ?variable");
                    m.action.args.push_back(parse_term_token(p.symbol));
                }
            } else if (key == ":precondition") {
                std::vector<Atom> pos, neg;
                sexp_to_literals(value, pos, neg);
                for (const Atom& a : pos) cond = Formula::make_and(std::move(cond), Formula::make_atom(a));
                for (const Atom& a : neg)
                    cond = Formula::make_and(std::move(cond), Formula::make_not(Formula::make_atom(a)));
            } else if (key == ":effect") {
                std::vector<Atom> pos, neg;
                sexp_to_literals(value, pos, neg);
                m.add = std::move(pos);
                m.del = std::move(neg);
            } else {
                throw PddlError(value.line, value.col, "unsupported action key '" + key + "'");
            }
        }
        m.condition = std::move(cond);
        task.models.push_back(std::move(m));
    }

    Sexp prob = SexpParser(problem_text).parse();
    if (!prob.is_list || prob.items.size() < 2 || prob.items[0].symbol != "define")
        throw PddlError(prob.line, prob.col, "expected (define (problem ...) ...)");
    for (std::size_t i = 2; i < prob.items.size(); ++i) {
        const Sexp& section = prob.items[i];
        if (!section.is_list || section.items.empty()) throw PddlError(section.line, section.col, "expected a section");
        const std::string& tag = section.items[0].symbol;
        if (tag == ":domain" || tag == ":objects") continue;
        if (tag == ":init") {
            for (std::size_t j = 1; j < section.items.size(); ++j)
                task.init.assert_belief(sexp_to_atom(section.items[j]));
        } else if (tag == ":goal") {
            if (section.items.size() != 2) throw PddlError(section.line, section.col, "(:goal ...) takes one condition");
            sexp_to_literals(section.items[1], task.goal.pos, task.goal.neg);
        } else {
            throw PddlError(section.line, section.col, "unsupported section '" + tag + "'");
        }
    }
    return task;
}

// ---------------------------------------------------------------------------
// Structural equivalence under canonical variable renaming, for round-trip
// checks. Conditions compare by their conjunctive literal split.
// ---------------------------------------------------------------------------

inline bool action_models_equivalent(const ActionModel& a, const ActionModel& b) {
    auto canon = [](const ActionModel& m) {
        Substitution rename;
        int next = 0;
        for (const Term& t : m.action.args)
            if (t.is_variable() && !rename.bound(t.name))
                rename.bind(t.name, Term::variable("V" + std::to_string(next++)));
        // canonical variables are "ground" from the substitution's viewpoint
        ActionModel out;
        out.action = rename.apply(m.action);
        ConditionLiterals lits = split_condition(m.condition, "equivalence check");
        std::vector<Atom> pos, neg;
        for (const Atom& x : lits.pos) pos.push_back(rename.apply(x));
        for (const Atom& x : lits.neg) neg.push_back(rename.apply(x));
        std::sort(pos.begin(), pos.end());
        std::sort(neg.begin(), neg.end());
        for (Atom& x : pos) out.add.push_back(x);  // reuse add/del as canon buckets
        for (Atom& x : neg) out.del.push_back(x);
        std::vector<Atom> add, del;
        for (const Atom& x : m.add) add.push_back(rename.apply(x));
        for (const Atom& x : m.del) del.push_back(rename.apply(x));
        std::sort(add.begin(), add.end());
        std::sort(del.begin(), del.end());
        return std::tuple<Atom, std::vector<Atom>, std::vector<Atom>, std::vector<Atom>, std::vector<Atom>>(
            out.action, out.add, out.del, add, del);
    };
    return canon(a) == canon(b);
}

inline bool pddl_tasks_equivalent(const std::vector<ActionModel>& a, const std::vector<ActionModel>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!action_models_equivalent(a[i], b[i])) return false;
    return true;
}

// File-name slug for a goal atom: watch(tv, canalplus) -> watch_tv_canalplus.
inline std::string goal_slug(const Atom& goal) {
    std::string s = goal.predicate;
    for (const Term& t : goal.args) {
        s.push_back('_');
        for (char c : t.name) s.push_back(c == '.' ? '_' : c);
    }
    return s;
}

}  // namespace smash
