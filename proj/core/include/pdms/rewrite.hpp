#pragma once

#include "pdms/model.hpp"

#include <utility>

namespace pdms {

/// Result of reformulating a query across one mapping edge and back.
struct RoundTrip {
    Query original;
    Query forward;
    Query back;

    struct Dropped {
        std::size_t disjunct = 0;  // index into the forward query
        std::string reason;
    };
    std::vector<Dropped> dropped;
};

/// Reformulates `q` onto `target`, the mapping's other peer. Atoms whose
/// relation heads a rule on the query's side are unfolded through every
/// applicable rule (one output disjunct per combination of rule choices);
/// the remaining atoms are covered by matching rule bodies of the opposite
/// orientation into the disjunct and replacing them with the rule head.
/// Disjuncts that cannot be translated are dropped; throws RewriteError
/// with the blocking atoms when nothing survives.
Query unfold_forward(const Query& q, const Mapping& mapping, const std::string& target);

/// Same translation with per-disjunct drop reporting; throws only when
/// every disjunct is dropped.
std::pair<Query, std::vector<RoundTrip::Dropped>> translate_back(const Query& q,
                                                                 const Mapping& mapping,
                                                                 const std::string& target);

/// unfold_forward across the edge, then translate_back to the origin.
RoundTrip roundtrip(const Query& q, const Mapping& mapping);

/// True when the rule's head unifies with the atom (same relation, arities
/// match, constants compatible).
bool rule_applicable(const GavRule& rule, const Atom& atom);

}  // namespace pdms
