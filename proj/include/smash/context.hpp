#pragma once

// Triple-style context store kept bijective with the belief base: a binary
// atom p(a,b) maps to (a, p, b), a unary atom p(a) to (a, "type", p). Atoms
// of other arities stay belief-only.

#include "smash/logic.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace smash {

using Triple = std::array<std::string, 3>;  // subject, predicate, object

inline std::optional<Triple> atom_to_triple(const Atom& a) {
    if (a.arity() == 1) return Triple{a.args[0].name, "type", a.predicate};
    if (a.arity() == 2) return Triple{a.args[0].name, a.predicate, a.args[1].name};
    return std::nullopt;
}

class ContextStore {
public:
    void apply_assert(const Atom& a) {
        if (auto t = atom_to_triple(a)) triples_.insert(*t);
    }
    void apply_retract(const Atom& a) {
        if (auto t = atom_to_triple(a)) triples_.erase(*t);
    }

    void sync_from(const BeliefBase& b) {
        triples_.clear();
        for (const Atom& a : b.atoms()) apply_assert(a);
    }

    // Triple-pattern query; empty optionals are wildcards. Deterministic order.
    std::vector<Triple> query(const std::optional<std::string>& s, const std::optional<std::string>& p,
                              const std::optional<std::string>& o) const {
        std::vector<Triple> out;
        for (const Triple& t : triples_) {
            if (s && t[0] != *s) continue;
            if (p && t[1] != *p) continue;
            if (o && t[2] != *o) continue;
            out.push_back(t);
        }
        return out;
    }

    const std::set<Triple>& triples() const { return triples_; }

    // Bijection check against the mappable subset of a belief base.
    bool mirrors(const BeliefBase& b) const {
        std::set<Triple> expect;
        for (const Atom& a : b.atoms())
            if (auto t = atom_to_triple(a)) expect.insert(*t);
        return expect == triples_;
    }

private:
    std::set<Triple> triples_;
};

}  // namespace smash
