#pragma once

#include "pdms/model.hpp"
#include "pdms/parser.hpp"

namespace pdms {

/// Renders a query back to the SQL fragment, in canonical form. Reparsing
/// the result yields a query canonically equal to the input. Throws when
/// the query cannot be expressed in the fragment (repeated relation in one
/// disjunct; the fragment has no aliases).
std::string render_query_sql(const Query& q, const PeerSchema& peer);

/// Datalog-style rendering, one line per disjunct. Always succeeds; used
/// for diagnostics when SQL rendering is impossible.
std::string render_query_datalog(const Query& q);

/// `Peer : Rel(x, y) :- Peer2 : S(x, z), y != "c"` without a trailing dot.
std::string render_rule(const GavRule& r);

/// Full scenario document; reparsing reproduces the network, data, and
/// canonically equal queries.
std::string render_scenario(const Scenario& sc);

}  // namespace pdms
