#pragma once

// Value-reasoning layer: the 19-value enumeration, importance orders as
// ranked buckets (a total preorder), and the value-ordering rule machinery.

#include "smash/logic.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smash {

enum class Value : uint8_t {
    self_direction_thought,
    self_direction_action,
    stimulation,
    hedonism,
    achievement,
    power_dominance,
    power_resources,
    face,
    security_personal,
    security_societal,
    tradition,
    conformity_rules,
    conformity_interpersonal,
    humility,
    benevolence_caring,
    benevolence_dependability,
    universalism_concern,
    universalism_nature,
    universalism_tolerance,
};

inline constexpr std::size_t kValueCount = 19;

inline constexpr std::array<std::string_view, kValueCount> kValueNames = {
    "self_direction_thought", "self_direction_action", "stimulation", "hedonism",
    "achievement", "power_dominance", "power_resources", "face",
    "security_personal", "security_societal", "tradition", "conformity_rules",
    "conformity_interpersonal", "humility", "benevolence_caring",
    "benevolence_dependability", "universalism_concern", "universalism_nature",
    "universalism_tolerance",
};

inline std::string_view value_name(Value v) { return kValueNames[static_cast<std::size_t>(v)]; }

inline Value parse_value(std::string_view name) {
    for (std::size_t i = 0; i < kValueCount; ++i)
        if (kValueNames[i] == name) return static_cast<Value>(i);
    throw ConfigError("unknown value identifier '" + std::string(name) + "'");
}

// Trace notes collected by reasoning functions (rule skips, duplicates, ...).
using TraceNotes = std::vector<std::string>;

inline void trace(TraceNotes* notes, std::string msg) {
    if (notes) notes->push_back(std::move(msg));
}

// ---------------------------------------------------------------------------
// Importance order: ranked buckets, position 0 most important. Values tied in
// importance share a bucket. An order may omit values entirely.
// ---------------------------------------------------------------------------

struct ImportanceOrder {
    std::vector<std::vector<Value>> buckets;

    bool contains(Value v) const { return rank_of(v).has_value(); }

    std::optional<std::size_t> rank_of(Value v) const {
        for (std::size_t i = 0; i < buckets.size(); ++i)
            for (Value u : buckets[i])
                if (u == v) return i;
        return std::nullopt;
    }

    // Removes v wherever it is; drops a bucket it leaves empty.
    bool erase(Value v) {
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            auto& bucket = buckets[i];
            for (std::size_t j = 0; j < bucket.size(); ++j) {
                if (bucket[j] == v) {
                    bucket.erase(bucket.begin() + j);
                    if (bucket.empty()) buckets.erase(buckets.begin() + i);
                    return true;
                }
            }
        }
        return false;
    }

    // Buckets must be non-empty and value-disjoint.
    bool well_formed() const {
        std::array<bool, kValueCount> seen{};
        for (const auto& bucket : buckets) {
            if (bucket.empty()) return false;
            for (Value v : bucket) {
                auto i = static_cast<std::size_t>(v);
                if (seen[i]) return false;
                seen[i] = true;
            }
        }
        return true;
    }

    std::string to_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            if (i) s.append(" > ");
            s.push_back('{');
            for (std::size_t j = 0; j < buckets[i].size(); ++j) {
                if (j) s.append(", ");
                s.append(value_name(buckets[i][j]));
            }
            s.push_back('}');
        }
        s.push_back(']');
        return s;
    }

    friend bool operator==(const ImportanceOrder& a, const ImportanceOrder& b) {
        return a.buckets == b.buckets;
    }
};

// ---------------------------------------------------------------------------
// Order operators
// ---------------------------------------------------------------------------

struct OrderOp {
    enum class Kind : uint8_t { make_least, make_most, above, below, same, remove };

    Kind kind;
    Value v1;
    Value v2 = Value::self_direction_thought;  // binary operators only

    static bool binary(Kind k) { return k == Kind::above || k == Kind::below || k == Kind::same; }

    std::string to_string() const {
        auto name = [](Kind k) {
            switch (k) {
                case Kind::make_least: return "make_least";
                case Kind::make_most: return "make_most";
                case Kind::above: return "above";
                case Kind::below: return "below";
                case Kind::same: return "same";
                case Kind::remove: return "remove";
            }
            return "?";
        };
        std::string s = name(kind);
        s.push_back('(');
        s.append(value_name(v1));
        if (binary(kind)) {
            s.append(", ");
            s.append(value_name(v2));
        }
        s.push_back(')');
        return s;
    }
};

// Parses the ASCII operator syntax, e.g. "above(hedonism, face)".
inline OrderOp parse_order_op(std::string_view text) {
    Atom a = parse_atom(text);
    auto expect_arity = [&](std::size_t n) {
        if (a.args.size() != n)
            throw ConfigError("operator " + a.predicate + " expects " + std::to_string(n) + " value(s)");
        for (const Term& t : a.args)
            if (!t.is_constant()) throw ConfigError("operator arguments must be value names");
    };
    OrderOp op{};
    if (a.predicate == "make_least") op.kind = OrderOp::Kind::make_least;
    else if (a.predicate == "make_most") op.kind = OrderOp::Kind::make_most;
    else if (a.predicate == "above") op.kind = OrderOp::Kind::above;
    else if (a.predicate == "below") op.kind = OrderOp::Kind::below;
    else if (a.predicate == "same") op.kind = OrderOp::Kind::same;
    else if (a.predicate == "remove") op.kind = OrderOp::Kind::remove;
    else throw ConfigError("unknown order operator '" + a.predicate + "'");
    expect_arity(OrderOp::binary(op.kind) ? 2 : 1);
    op.v1 = parse_value(a.args[0].name);
    if (OrderOp::binary(op.kind)) op.v2 = parse_value(a.args[1].name);
    return op;
}

struct ValueOrderingRule {
    Formula condition;
    std::vector<OrderOp> body;
};

// ---------------------------------------------------------------------------
// Operator application
// ---------------------------------------------------------------------------

inline ImportanceOrder apply_order_op(ImportanceOrder iv, const OrderOp& op, TraceNotes* notes = nullptr) {
    using K = OrderOp::Kind;
    switch (op.kind) {
        case K::make_most: {
            iv.erase(op.v1);
            iv.buckets.insert(iv.buckets.begin(), {op.v1});
            break;
        }
        case K::make_least: {
            iv.erase(op.v1);
            iv.buckets.push_back({op.v1});
            break;
        }
        case K::above:
        case K::below: {
            if (op.v1 == op.v2) {
                trace(notes, "skipped " + op.to_string() + ": operands are the same value");
                return iv;
            }
            if (!iv.contains(op.v2)) {
                trace(notes, "skipped " + op.to_string() + ": " + std::string(value_name(op.v2)) + " not in the order");
                return iv;
            }
            iv.erase(op.v1);
            std::size_t anchor = *iv.rank_of(op.v2);
            std::size_t at = op.kind == K::above ? anchor : anchor + 1;
            iv.buckets.insert(iv.buckets.begin() + at, {op.v1});
            break;
        }
        case K::same: {
            if (op.v1 == op.v2) return iv;
            if (!iv.contains(op.v2)) {
                trace(notes, "skipped " + op.to_string() + ": " + std::string(value_name(op.v2)) + " not in the order");
                return iv;
            }
            iv.erase(op.v1);
            iv.buckets[*iv.rank_of(op.v2)].push_back(op.v1);
            break;
        }
        case K::remove: {
            iv.erase(op.v1);  // absent value: no-op
            break;
        }
    }
    return iv;
}

// ---------------------------------------------------------------------------
// Eq. 1 — reorder the default importance of values against the context.
// Rules apply in declaration order, one firing per condition substitution
// (substitutions in lexicographic order), body operators in body order.
// ---------------------------------------------------------------------------

inline ImportanceOrder value_reasoning(const BeliefBase& b, const ImportanceOrder& iv_d,
                                       const std::vector<ValueOrderingRule>& vo,
                                       TraceNotes* notes = nullptr) {
    ImportanceOrder iv = iv_d;
    for (std::size_t r = 0; r < vo.size(); ++r) {
        const ValueOrderingRule& rule = vo[r];
        std::size_t firings = rule.condition.is_true() ? 1 : evaluate(rule.condition, b).size();
        for (std::size_t k = 0; k < firings; ++k) {
            for (const OrderOp& op : rule.body) {
                iv = apply_order_op(std::move(iv), op, notes);
                if (!iv.well_formed())
                    throw Error("importance order corrupted by " + op.to_string() + " in VO rule " + std::to_string(r));
            }
        }
    }
    return iv;
}

}  // namespace smash
