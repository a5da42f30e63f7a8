#pragma once

#include "pdms/model.hpp"

#include <map>

namespace pdms {

/// Rewrites a query into its comparison normal form:
///   - EQ predicates between two variables are resolved by unification;
///   - head constants are lifted to fresh variables pinned by an EQ predicate;
///   - constants inside body atoms are likewise lifted, and all variables
///     pinned to the same constant collapse into one, so every restriction
///     lives in the predicate set and atoms carry only variables;
///   - NEQ predicates made vacuous by a pin are dropped;
///   - variables are renamed v0, v1, ... and atoms, predicates, and
///     disjuncts are deterministically ordered; duplicates are removed.
/// The result is idempotent and invariant under variable renaming and under
/// reordering of atoms, predicates, and disjuncts.
Query canonicalize(const Query& q);

/// True iff the two queries have identical canonical forms.
/// Throws ValidationError when the arities differ.
bool query_equal(const Query& a, const Query& b);

/// Alpha-equivalence of rules: same head relation/peer and identical
/// structure modulo variable naming.
bool rule_equal(const GavRule& a, const GavRule& b);

/// Canonical labeling of a disjunct's head and atoms with predicates
/// stripped; `rename` maps the input variable names to the canonical ones.
/// Two disjuncts describe the same atom structure iff their skeletons
/// compare equal.
struct Skeleton {
    std::vector<Term> head;
    std::vector<Atom> body;
    std::map<std::string, std::string> rename;

    friend bool operator==(const Skeleton& x, const Skeleton& y) {
        return x.head == y.head && x.body == y.body;
    }
};

Skeleton skeleton_of(const Disjunct& d);

/// Canonicalizes one disjunct in isolation (same normalization steps as
/// canonicalize, without the query-level sort/dedup).
Disjunct canonicalize_disjunct(const Disjunct& d);

}  // namespace pdms
