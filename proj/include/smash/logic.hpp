#pragma once

// Terms, ground atoms, the belief base and the first-order condition
// language shared by every rule family (VO, GA, GI, AI, CI, KW, KH).

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smash {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    std::size_t line = 0;
    std::size_t col = 0;
    ParseError(std::size_t line_, std::size_t col_, const std::string& what_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + what_),
          line(line_), col(col_) {}
};

struct RangeRestrictionError : Error {
    std::string variable;
    explicit RangeRestrictionError(std::string var)
        : Error("variable " + var + " occurs under 'not' or in a comparison but in no positive atom of the enclosing conjunction"),
          variable(std::move(var)) {}
};

struct EvalError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

// Maps an arbitrary symbol to the constant charset [a-z0-9_].
// "Canal+" becomes "canalplus"; spaces and dashes become underscores.
inline std::string normalize_constant_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c >= 'A' && c <= 'Z') out.push_back(static_cast<char>(c - 'A' + 'a'));
        else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.') out.push_back(c);
        else if (c == '+') out += "plus";
        else if (c == '-' || c == ' ') out.push_back('_');
        // anything else is dropped
    }
    if (out.empty()) out = "_";
    return out;
}

// Canonical text for a numeric constant: integers print without a point.
inline std::string canonical_number(double v) {
    if (v == static_cast<long long>(v) && v > -1e15 && v < 1e15)
        return std::to_string(static_cast<long long>(v));
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct Term {
    enum class Kind : uint8_t { constant, variable };

    Kind kind = Kind::constant;
    std::string name;
    std::optional<double> number;  // constants only

    static Term constant(std::string_view raw) {
        Term t;
        t.kind = Kind::constant;
        t.name = normalize_constant_name(raw);
        // a purely numeric name carries its value as payload
        double v = 0;
        auto res = std::from_chars(t.name.data(), t.name.data() + t.name.size(), v);
        if (res.ec == std::errc{} && res.ptr == t.name.data() + t.name.size()) {
            t.number = v;
            t.name = canonical_number(v);
        }
        return t;
    }

    static Term number_constant(double v) {
        Term t;
        t.kind = Kind::constant;
        t.name = canonical_number(v);
        t.number = v;
        return t;
    }

    static Term variable(std::string name) {
        Term t;
        t.kind = Kind::variable;
        t.name = std::move(name);
        return t;
    }

    bool is_variable() const { return kind == Kind::variable; }
    bool is_constant() const { return kind == Kind::constant; }

    friend bool operator==(const Term& a, const Term& b) {
        return a.kind == b.kind && a.name == b.name;
    }
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
    friend bool operator<(const Term& a, const Term& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.name < b.name;
    }

    std::string to_string() const { return name; }
};

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    Atom() = default;
    Atom(std::string pred, std::vector<Term> as) : predicate(std::move(pred)), args(std::move(as)) {}

    std::size_t arity() const { return args.size(); }

    bool ground() const {
        return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
    }

    std::string to_string() const {
        std::string s = predicate;
        if (!args.empty()) {
            s.push_back('(');
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i) s.append(", ");
                s.append(args[i].to_string());
            }
            s.push_back(')');
        }
        return s;
    }

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.predicate == b.predicate && a.args == b.args;
    }
    friend bool operator!=(const Atom& a, const Atom& b) { return !(a == b); }
    friend bool operator<(const Atom& a, const Atom& b) {
        if (a.predicate != b.predicate) return a.predicate < b.predicate;
        if (a.args.size() != b.args.size()) return a.args.size() < b.args.size();
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (a.args[i] != b.args[i]) return a.args[i] < b.args[i];
        return false;
    }
};

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

struct Substitution {
    std::map<std::string, Term> bindings;  // variable name -> ground term

    bool bound(const std::string& var) const { return bindings.count(var) != 0; }

    const Term* lookup(const std::string& var) const {
        auto it = bindings.find(var);
        return it == bindings.end() ? nullptr : &it->second;
    }

    // Returns false on a conflicting binding.
    bool bind(const std::string& var, const Term& value) {
        auto [it, inserted] = bindings.emplace(var, value);
        return inserted || it->second == value;
    }

    Term apply(const Term& t) const {
        if (t.is_variable()) {
            if (const Term* v = lookup(t.name)) return *v;
        }
        return t;
    }

    Atom apply(const Atom& a) const {
        Atom out;
        out.predicate = a.predicate;
        out.args.reserve(a.args.size());
        for (const Term& t : a.args) out.args.push_back(apply(t));
        return out;
    }

    friend bool operator==(const Substitution& a, const Substitution& b) {
        return a.bindings == b.bindings;
    }
    friend bool operator<(const Substitution& a, const Substitution& b) {
        return std::lexicographical_compare(
            a.bindings.begin(), a.bindings.end(), b.bindings.begin(), b.bindings.end(),
            [](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first < y.first;
                return x.second < y.second;
            });
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (const auto& [var, term] : bindings) {
            if (!first) s.append(", ");
            first = false;
            s.append(var).append(" -> ").append(term.to_string());
        }
        s.push_back('}');
        return s;
    }
};

// Unifies a template atom (may contain variables) against a ground atom,
// extending `subst`. Returns false and leaves `subst` untouched on mismatch.
inline bool unify(const Atom& pattern, const Atom& target, Substitution& subst) {
    if (pattern.predicate != target.predicate || pattern.args.size() != target.args.size())
        return false;
    Substitution trial = subst;
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        const Term& p = pattern.args[i];
        const Term& t = target.args[i];
        if (p.is_constant()) {
            if (p != t) return false;
        } else if (!trial.bind(p.name, t)) {
            return false;
        }
    }
    subst = std::move(trial);
    return true;
}

// ---------------------------------------------------------------------------
// Belief base
// ---------------------------------------------------------------------------

class BeliefBase {
public:
    BeliefBase() = default;
    explicit BeliefBase(std::initializer_list<Atom> atoms) {
        for (const Atom& a : atoms) assert_belief(a);
    }

    // Set semantics; bumps the revision only when membership changes.
    bool assert_belief(const Atom& a) {
        if (!a.ground()) throw EvalError("belief must be ground: " + a.to_string());
        bool changed = atoms_.insert(a).second;
        if (changed) ++revision_;
        return changed;
    }

    bool retract_belief(const Atom& a) {
        if (!a.ground()) throw EvalError("belief must be ground: " + a.to_string());
        bool changed = atoms_.erase(a) != 0;
        if (changed) ++revision_;
        return changed;
    }

    bool contains(const Atom& a) const { return atoms_.count(a) != 0; }
    const std::set<Atom>& atoms() const { return atoms_; }
    std::uint64_t revision() const { return revision_; }
    std::size_t size() const { return atoms_.size(); }

private:
    std::set<Atom> atoms_;
    std::uint64_t revision_ = 0;
};

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

enum class CmpOp : uint8_t { eq, ne, lt, le, gt, ge };

inline std::string_view cmp_op_text(CmpOp op) {
    switch (op) {
        case CmpOp::eq: return "==";
        case CmpOp::ne: return "!=";
        case CmpOp::lt: return "<";
        case CmpOp::le: return "<=";
        case CmpOp::gt: return ">";
        case CmpOp::ge: return ">=";
    }
    return "?";
}

class Formula {
public:
    enum class Kind : uint8_t { atom, neg, conj, disj, cmp };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Kind kind;
        Atom atom;            // atom
        NodePtr lhs, rhs;     // neg (lhs only), conj, disj
        CmpOp op = CmpOp::eq; // cmp
        Term t1, t2;          // cmp
    };

    Formula() = default;  // empty formula is the always-true condition

    static Formula make_atom(Atom a) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::atom;
        n->atom = std::move(a);
        return Formula(std::move(n));
    }
    static Formula make_not(Formula f) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::neg;
        n->lhs = f.root_;
        return Formula(std::move(n));
    }
    static Formula make_and(Formula a, Formula b) {
        if (a.is_true()) return b;
        if (b.is_true()) return a;
        auto n = std::make_shared<Node>();
        n->kind = Kind::conj;
        n->lhs = a.root_;
        n->rhs = b.root_;
        return Formula(std::move(n));
    }
    static Formula make_or(Formula a, Formula b) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::disj;
        n->lhs = a.root_;
        n->rhs = b.root_;
        return Formula(std::move(n));
    }
    static Formula make_cmp(CmpOp op, Term t1, Term t2) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::cmp;
        n->op = op;
        n->t1 = std::move(t1);
        n->t2 = std::move(t2);
        return Formula(std::move(n));
    }
    static Formula always_true() { return Formula(); }

    bool is_true() const { return root_ == nullptr; }
    const Node* root() const { return root_.get(); }

    void collect_variables(std::set<std::string>& out) const { collect_vars(root_.get(), out); }

    std::set<std::string> variables() const {
        std::set<std::string> out;
        collect_variables(out);
        return out;
    }

    void collect_constants(std::set<Term>& out) const { collect_consts(root_.get(), out); }

    bool equals(const Formula& other) const { return node_equals(root_.get(), other.root_.get()); }

    // Replaces bound variables by their ground terms.
    Formula substitute(const Substitution& s) const { return Formula(subst_node(root_, s)); }

    std::string to_string() const {
        if (is_true()) return "";
        return print(root_.get(), 0);
    }

private:
    explicit Formula(NodePtr n) : root_(std::move(n)) {}

    static void collect_vars(const Node* n, std::set<std::string>& out) {
        if (!n) return;
        switch (n->kind) {
            case Kind::atom:
                for (const Term& t : n->atom.args)
                    if (t.is_variable()) out.insert(t.name);
                break;
            case Kind::neg:
                collect_vars(n->lhs.get(), out);
                break;
            case Kind::conj:
            case Kind::disj:
                collect_vars(n->lhs.get(), out);
                collect_vars(n->rhs.get(), out);
                break;
            case Kind::cmp:
                if (n->t1.is_variable()) out.insert(n->t1.name);
                if (n->t2.is_variable()) out.insert(n->t2.name);
                break;
        }
    }

    static void collect_consts(const Node* n, std::set<Term>& out) {
        if (!n) return;
        switch (n->kind) {
            case Kind::atom:
                for (const Term& t : n->atom.args)
                    if (t.is_constant()) out.insert(t);
                break;
            case Kind::neg:
                collect_consts(n->lhs.get(), out);
                break;
            case Kind::conj:
            case Kind::disj:
                collect_consts(n->lhs.get(), out);
                collect_consts(n->rhs.get(), out);
                break;
            case Kind::cmp:
                if (n->t1.is_constant()) out.insert(n->t1);
                if (n->t2.is_constant()) out.insert(n->t2);
                break;
        }
    }

    static NodePtr subst_node(const NodePtr& n, const Substitution& s) {
        if (!n) return nullptr;
        auto out = std::make_shared<Node>(*n);
        switch (n->kind) {
            case Kind::atom:
                out->atom = s.apply(n->atom);
                break;
            case Kind::neg:
                out->lhs = subst_node(n->lhs, s);
                break;
            case Kind::conj:
            case Kind::disj:
                out->lhs = subst_node(n->lhs, s);
                out->rhs = subst_node(n->rhs, s);
                break;
            case Kind::cmp:
                out->t1 = s.apply(n->t1);
                out->t2 = s.apply(n->t2);
                break;
        }
        return out;
    }

    static bool node_equals(const Node* a, const Node* b) {
        if (a == b) return true;
        if (!a || !b) return false;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case Kind::atom: return a->atom == b->atom;
            case Kind::neg: return node_equals(a->lhs.get(), b->lhs.get());
            case Kind::conj:
            case Kind::disj:
                return node_equals(a->lhs.get(), b->lhs.get()) && node_equals(a->rhs.get(), b->rhs.get());
            case Kind::cmp: return a->op == b->op && a->t1 == b->t1 && a->t2 == b->t2;
        }
        return false;
    }

    // precedence: 0 = disjunction context, 1 = conjunction, 2 = unary
    static std::string print(const Node* n, int ctx) {
        switch (n->kind) {
            case Kind::atom:
                return n->atom.to_string();
            case Kind::cmp:
                return n->t1.to_string() + " " + std::string(cmp_op_text(n->op)) + " " + n->t2.to_string();
            case Kind::neg: {
                std::string inner = print(n->lhs.get(), 2);
                if (n->lhs->kind == Kind::conj || n->lhs->kind == Kind::disj || n->lhs->kind == Kind::cmp)
                    inner = "(" + inner + ")";
                return "not " + inner;
            }
            case Kind::conj: {
                std::string s = print(n->lhs.get(), 1) + " & " + print(n->rhs.get(), 1);
                if (ctx > 1) s = "(" + s + ")";
                return s;
            }
            case Kind::disj: {
                std::string s = print(n->lhs.get(), 0) + " | " + print(n->rhs.get(), 0);
                if (ctx > 0) s = "(" + s + ")";
                return s;
            }
        }
        return "";
    }

    NodePtr root_;
};

// ---------------------------------------------------------------------------
// Rule-language parser
//
//   formula := disj ; disj := conj { "|" conj } ; conj := unary { "&" unary }
//   unary   := "not" unary | "(" formula ")" | atom | compare
//   atom    := IDENT [ "(" term { "," term } ")" ]
//   compare := term OP term, OP in { ==, !=, <, <=, >, >= }
//   term    := VARIABLE | IDENT | NUMBER
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
    enum class Kind : uint8_t {
        ident, variable, number, lparen, rparen, comma, amp, pipe, not_kw,
        op_eq, op_ne, op_lt, op_le, op_gt, op_ge, end
    };
    Kind kind;
    std::string text;
    double number = 0;
    std::size_t line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
            if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
            ++pos_;
        }
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) { tok_.kind = Token::Kind::end; tok_.text = "<end>"; return; }
        char c = src_[pos_];
        auto take = [&](Token::Kind k, std::size_t n) {
            tok_.kind = k;
            tok_.text = std::string(src_.substr(pos_, n));
            pos_ += n;
            col_ += n;
        };
        switch (c) {
            case '(': take(Token::Kind::lparen, 1); return;
            case ')': take(Token::Kind::rparen, 1); return;
            case ',': take(Token::Kind::comma, 1); return;
            case '&': take(Token::Kind::amp, 1); return;
            case '|': take(Token::Kind::pipe, 1); return;
            case '=':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') { take(Token::Kind::op_eq, 2); return; }
                throw ParseError(line_, col_, "expected '=='");
            case '!':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') { take(Token::Kind::op_ne, 2); return; }
                throw ParseError(line_, col_, "expected '!='");
            case '<':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') { take(Token::Kind::op_le, 2); return; }
                take(Token::Kind::op_lt, 1);
                return;
            case '>':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') { take(Token::Kind::op_ge, 2); return; }
                take(Token::Kind::op_gt, 1);
                return;
            default: break;
        }
        if ((c >= '0' && c <= '9') || (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] >= '0' && src_[pos_ + 1] <= '9')) {
            std::size_t start = pos_;
            if (c == '-') ++pos_;
            while (pos_ < src_.size() && ((src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '.')) ++pos_;
            std::string text(src_.substr(start, pos_ - start));
            tok_.kind = Token::Kind::number;
            tok_.text = text;
            auto res = std::from_chars(text.data(), text.data() + text.size(), tok_.number);
            if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
                throw ParseError(line_, col_, "malformed number '" + text + "'");
            col_ += pos_ - start;
            return;
        }
        if (c >= 'a' && c <= 'z') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            tok_.kind = tok_.text == "not" ? Token::Kind::not_kw : Token::Kind::ident;
            col_ += pos_ - start;
            return;
        }
        if (c >= 'A' && c <= 'Z') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            tok_.kind = Token::Kind::variable;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            col_ += pos_ - start;
            return;
        }
        if (c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            tok_.kind = Token::Kind::ident;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            col_ += pos_ - start;
            return;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    static bool is_ident_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1, col_ = 1;
    Token tok_;
};

class FormulaParser {
public:
    explicit FormulaParser(std::string_view src) : lex_(src) {}

    Formula parse_formula_all() {
        Formula f = parse_disj();
        expect(Token::Kind::end, "end of input");
        return f;
    }

    Atom parse_atom_all() {
        Atom a = parse_atom();
        expect(Token::Kind::end, "end of input");
        return a;
    }

    Term parse_term() {
        Token t = lex_.next();
        switch (t.kind) {
            case Token::Kind::variable: return Term::variable(t.text);
            case Token::Kind::ident: return Term::constant(t.text);
            case Token::Kind::number: return Term::number_constant(t.number);
            default: throw ParseError(t.line, t.col, "expected a term, got '" + t.text + "'");
        }
    }

    Atom parse_atom() {
        Token t = lex_.next();
        if (t.kind != Token::Kind::ident)
            throw ParseError(t.line, t.col, "expected a predicate identifier, got '" + t.text + "'");
        Atom a;
        a.predicate = normalize_constant_name(t.text);  // deviceStatus == devicestatus
        if (lex_.peek().kind == Token::Kind::lparen) {
            lex_.next();
            a.args.push_back(parse_term());
            while (lex_.peek().kind == Token::Kind::comma) {
                lex_.next();
                a.args.push_back(parse_term());
            }
            expect(Token::Kind::rparen, "')'");
        }
        return a;
    }

    void expect(Token::Kind k, const char* what) {
        Token t = lex_.next();
        if (t.kind != k) throw ParseError(t.line, t.col, std::string("expected ") + what + ", got '" + t.text + "'");
    }

    Formula parse_disj() {
        Formula f = parse_conj();
        while (lex_.peek().kind == Token::Kind::pipe) {
            lex_.next();
            f = Formula::make_or(std::move(f), parse_conj());
        }
        return f;
    }

    Formula parse_conj() {
        Formula f = parse_unary();
        while (lex_.peek().kind == Token::Kind::amp) {
            lex_.next();
            f = Formula::make_and(std::move(f), parse_unary());
        }
        return f;
    }

    static std::optional<CmpOp> cmp_of(Token::Kind k) {
        switch (k) {
            case Token::Kind::op_eq: return CmpOp::eq;
            case Token::Kind::op_ne: return CmpOp::ne;
            case Token::Kind::op_lt: return CmpOp::lt;
            case Token::Kind::op_le: return CmpOp::le;
            case Token::Kind::op_gt: return CmpOp::gt;
            case Token::Kind::op_ge: return CmpOp::ge;
            default: return std::nullopt;
        }
    }

    Formula parse_unary() {
        const Token& t = lex_.peek();
        switch (t.kind) {
            case Token::Kind::not_kw:
                lex_.next();
                return Formula::make_not(parse_unary());
            case Token::Kind::lparen: {
                lex_.next();
                Formula f = parse_disj();
                expect(Token::Kind::rparen, "')'");
                return f;
            }
            case Token::Kind::variable:
            case Token::Kind::number: {
                Term lhs = parse_term();
                Token op = lex_.next();
                auto cmp = cmp_of(op.kind);
                if (!cmp) throw ParseError(op.line, op.col, "expected a comparison operator, got '" + op.text + "'");
                return Formula::make_cmp(*cmp, std::move(lhs), parse_term());
            }
            case Token::Kind::ident: {
                Atom a = parse_atom();
                if (a.args.empty()) {
                    if (auto cmp = cmp_of(lex_.peek().kind)) {
                        lex_.next();
                        return Formula::make_cmp(*cmp, Term::constant(a.predicate), parse_term());
                    }
                }
                return Formula::make_atom(std::move(a));
            }
            default:
                throw ParseError(t.line, t.col, "expected a formula, got '" + t.text + "'");
        }
    }

private:
    Lexer lex_;
};

// Variables guaranteed to be bound by positive structure.
inline void bindable_vars(const Formula::Node* n, std::set<std::string>& out) {
    if (!n) return;
    switch (n->kind) {
        case Formula::Kind::atom:
            for (const Term& t : n->atom.args)
                if (t.is_variable()) out.insert(t.name);
            break;
        case Formula::Kind::conj: {
            bindable_vars(n->lhs.get(), out);
            bindable_vars(n->rhs.get(), out);
            break;
        }
        case Formula::Kind::disj: {
            std::set<std::string> l, r, both;
            bindable_vars(n->lhs.get(), l);
            bindable_vars(n->rhs.get(), r);
            std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::inserter(both, both.begin()));
            out.merge(both);
            break;
        }
        case Formula::Kind::neg:
        case Formula::Kind::cmp:
            break;
    }
}

inline std::set<std::string> bindable_vars(const Formula::Node* n) {
    std::set<std::string> out;
    bindable_vars(n, out);
    return out;
}

inline void node_vars(const Formula::Node* n, std::set<std::string>& out) {
    if (!n) return;
    switch (n->kind) {
        case Formula::Kind::atom:
            for (const Term& t : n->atom.args)
                if (t.is_variable()) out.insert(t.name);
            break;
        case Formula::Kind::neg:
            node_vars(n->lhs.get(), out);
            break;
        case Formula::Kind::conj:
        case Formula::Kind::disj:
            node_vars(n->lhs.get(), out);
            node_vars(n->rhs.get(), out);
            break;
        case Formula::Kind::cmp:
            if (n->t1.is_variable()) out.insert(n->t1.name);
            if (n->t2.is_variable()) out.insert(n->t2.name);
            break;
    }
}

inline void check_range_restriction(const Formula::Node* n, const std::set<std::string>& avail) {
    if (!n) return;
    switch (n->kind) {
        case Formula::Kind::atom:
            return;
        case Formula::Kind::neg:
        case Formula::Kind::cmp: {
            std::set<std::string> vars;
            node_vars(n, vars);
            for (const std::string& v : vars)
                if (!avail.count(v)) throw RangeRestrictionError(v);
            if (n->kind == Formula::Kind::neg) check_range_restriction(n->lhs.get(), avail);
            return;
        }
        case Formula::Kind::conj: {
            std::set<std::string> avail_l = avail, avail_r = avail;
            bindable_vars(n->rhs.get(), avail_l);
            bindable_vars(n->lhs.get(), avail_r);
            check_range_restriction(n->lhs.get(), avail_l);
            check_range_restriction(n->rhs.get(), avail_r);
            return;
        }
        case Formula::Kind::disj:
            check_range_restriction(n->lhs.get(), avail);
            check_range_restriction(n->rhs.get(), avail);
            return;
    }
}

}  // namespace detail

inline Formula parse_formula(std::string_view text) {
    detail::FormulaParser p(text);
    Formula f = p.parse_formula_all();
    detail::check_range_restriction(f.root(), {});
    return f;
}

// For conditions attached to a parameterised head (action models,
// refinements): the head's parameters count as bound.
inline Formula parse_formula(std::string_view text, const std::set<std::string>& bound_vars) {
    detail::FormulaParser p(text);
    Formula f = p.parse_formula_all();
    detail::check_range_restriction(f.root(), bound_vars);
    return f;
}

inline std::string print_formula(const Formula& f) { return f.to_string(); }

// Parses "pred(t1, t2)"; variables allowed.
inline Atom parse_atom(std::string_view text) {
    detail::FormulaParser p(text);
    return p.parse_atom_all();
}

inline Atom parse_ground_atom(std::string_view text) {
    Atom a = parse_atom(text);
    if (!a.ground()) throw ParseError(1, 1, "expected a ground atom: " + a.to_string());
    return a;
}

// ---------------------------------------------------------------------------
// Evaluation
//
// evaluate(f, b) yields every total grounding of f's variables (drawn from
// the constants of b and f) under which f holds. Negation is
// negation-as-failure on the grounded subformula. The result order is
// lexicographic by bound constants.
// ---------------------------------------------------------------------------

namespace detail {

inline bool truth(const Formula::Node* n, const BeliefBase& b, const Substitution& s) {
    if (!n) return true;
    switch (n->kind) {
        case Formula::Kind::atom: {
            Atom g = s.apply(n->atom);
            if (!g.ground()) throw EvalError("atom not ground during truth check: " + g.to_string());
            return b.contains(g);
        }
        case Formula::Kind::neg:
            return !truth(n->lhs.get(), b, s);
        case Formula::Kind::conj:
            return truth(n->lhs.get(), b, s) && truth(n->rhs.get(), b, s);
        case Formula::Kind::disj:
            return truth(n->lhs.get(), b, s) || truth(n->rhs.get(), b, s);
        case Formula::Kind::cmp: {
            Term a = s.apply(n->t1);
            Term c = s.apply(n->t2);
            if (a.is_variable() || c.is_variable())
                throw EvalError("comparison over unbound variable");
            bool numeric = a.number.has_value() && c.number.has_value();
            switch (n->op) {
                case CmpOp::eq: return numeric ? *a.number == *c.number : a.name == c.name;
                case CmpOp::ne: return numeric ? *a.number != *c.number : a.name != c.name;
                default: break;
            }
            if (!numeric)
                throw EvalError("ordering comparison requires numeric terms: " + a.name + " vs " + c.name);
            switch (n->op) {
                case CmpOp::lt: return *a.number < *c.number;
                case CmpOp::le: return *a.number <= *c.number;
                case CmpOp::gt: return *a.number > *c.number;
                case CmpOp::ge: return *a.number >= *c.number;
                default: return false;
            }
        }
    }
    return false;
}

// Variables a node needs bound from outside before it can be evaluated.
inline std::set<std::string> required_vars(const Formula::Node* n) {
    std::set<std::string> out;
    if (!n) return out;
    switch (n->kind) {
        case Formula::Kind::atom:
            return out;
        case Formula::Kind::neg:
        case Formula::Kind::cmp:
            node_vars(n, out);
            return out;
        case Formula::Kind::conj: {
            std::set<std::string> l = required_vars(n->lhs.get());
            std::set<std::string> r = required_vars(n->rhs.get());
            std::set<std::string> bl = bindable_vars(n->lhs.get());
            std::set<std::string> br = bindable_vars(n->rhs.get());
            for (const auto& v : l)
                if (!br.count(v)) out.insert(v);
            for (const auto& v : r)
                if (!bl.count(v)) out.insert(v);
            return out;
        }
        case Formula::Kind::disj: {
            out = required_vars(n->lhs.get());
            std::set<std::string> r = required_vars(n->rhs.get());
            out.merge(r);
            return out;
        }
    }
    return out;
}

class Evaluator {
public:
    Evaluator(const BeliefBase& b) : b_(b) {}

    std::vector<Substitution> eval(const Formula::Node* n, const Substitution& s) {
        if (!n) return {s};
        switch (n->kind) {
            case Formula::Kind::atom: {
                std::vector<Substitution> out;
                Atom pat = s.apply(n->atom);
                for (const Atom& belief : b_.atoms()) {
                    Substitution ext = s;
                    if (unify(pat, belief, ext)) out.push_back(std::move(ext));
                }
                return out;
            }
            case Formula::Kind::neg:
                return truth(n->lhs.get(), b_, s) ? std::vector<Substitution>{} : std::vector<Substitution>{s};
            case Formula::Kind::cmp:
                return truth(n, b_, s) ? std::vector<Substitution>{s} : std::vector<Substitution>{};
            case Formula::Kind::disj: {
                std::vector<Substitution> out = eval(n->lhs.get(), s);
                std::vector<Substitution> r = eval(n->rhs.get(), s);
                out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
                return out;
            }
            case Formula::Kind::conj: {
                // schedule conjuncts so filters run only once their variables
                // are bound (the range restriction guarantees progress)
                std::vector<const Formula::Node*> conjuncts;
                flatten(n, conjuncts);
                std::vector<bool> done(conjuncts.size(), false);
                std::set<std::string> avail;
                for (const auto& [var, term] : s.bindings) avail.insert(var);
                std::vector<const Formula::Node*> order;
                for (std::size_t picked = 0; picked < conjuncts.size(); ++picked) {
                    bool progressed = false;
                    for (std::size_t i = 0; i < conjuncts.size(); ++i) {
                        if (done[i]) continue;
                        std::set<std::string> req = required_vars(conjuncts[i]);
                        bool ready = std::all_of(req.begin(), req.end(),
                                                 [&](const std::string& v) { return avail.count(v) != 0; });
                        if (ready) {
                            order.push_back(conjuncts[i]);
                            done[i] = true;
                            bindable_vars(conjuncts[i], avail);
                            progressed = true;
                            break;
                        }
                    }
                    if (!progressed) throw EvalError("formula is not range-restricted");
                }
                std::vector<Substitution> current{s};
                for (const Formula::Node* c : order) {
                    std::vector<Substitution> next;
                    for (const Substitution& cur : current) {
                        std::vector<Substitution> ext = eval(c, cur);
                        next.insert(next.end(), std::make_move_iterator(ext.begin()), std::make_move_iterator(ext.end()));
                    }
                    current = std::move(next);
                    if (current.empty()) break;
                }
                return current;
            }
        }
        return {};
    }

private:
    static void flatten(const Formula::Node* n, std::vector<const Formula::Node*>& out) {
        if (n->kind == Formula::Kind::conj) {
            flatten(n->lhs.get(), out);
            flatten(n->rhs.get(), out);
        } else {
            out.push_back(n);
        }
    }

    const BeliefBase& b_;
};

}  // namespace detail

inline std::vector<Substitution> evaluate(const Formula& f, const BeliefBase& b) {
    detail::check_range_restriction(f.root(), {});
    detail::Evaluator ev(b);
    std::vector<Substitution> partials = ev.eval(f.root(), Substitution{});

    std::set<std::string> vars = f.variables();

    // complete partially-bound results (possible under disjunction) over the
    // constant universe; a satisfying partial stays satisfying under any
    // completion of variables it does not mention
    std::set<Term> universe_set;
    f.collect_constants(universe_set);
    for (const Atom& a : b.atoms())
        for (const Term& t : a.args) universe_set.insert(t);
    std::vector<Term> universe(universe_set.begin(), universe_set.end());

    std::set<Substitution> result;
    for (const Substitution& p : partials) {
        std::vector<std::string> missing;
        for (const std::string& v : vars)
            if (!p.bound(v)) missing.push_back(v);
        if (missing.empty()) {
            result.insert(p);
            continue;
        }
        if (universe.empty()) continue;
        std::vector<std::size_t> idx(missing.size(), 0);
        while (true) {
            Substitution full = p;
            for (std::size_t i = 0; i < missing.size(); ++i) full.bind(missing[i], universe[idx[i]]);
            result.insert(std::move(full));
            std::size_t k = 0;
            while (k < idx.size()) {
                if (++idx[k] < universe.size()) break;
                idx[k] = 0;
                ++k;
            }
            if (k == idx.size()) break;
        }
    }
    return {result.begin(), result.end()};
}

// True iff f holds under at least one grounding.
inline bool holds(const Formula& f, const BeliefBase& b) {
    if (f.is_true()) return true;
    return !evaluate(f, b).empty();
}

}  // namespace smash
