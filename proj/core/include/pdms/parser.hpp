#pragma once

#include "pdms/instance.hpp"
#include "pdms/model.hpp"

#include <string_view>

namespace pdms {

/// A parsed scenario document: the peer network, stored data per peer, and
/// named queries with their owning peer.
struct Scenario {
    PeerNetwork network;
    Instance instance;

    struct NamedQuery {
        std::string name;
        std::string peer;
        Query query;
    };
    std::vector<NamedQuery> queries;

    const NamedQuery* find_query(std::string_view name) const;
};

/// Parses a scenario document. Grammar:
///
///   peer <id> { [virtual] relation Name(a1, ..., an) ... }
///   mapping A <- B  { <rule>. ... }     rules head-over-A, body-over-B
///   mapping A <-> B { <rule>. ... }     rule heads qualified explicitly
///   data Peer.Rel { ("v1", ...) ... }
///   query Name @ Peer { <SQL> }
///
/// Rules use  Head(args) :- Atom(args), ..., x != "c", x = y .  with
/// peer-qualified atoms (`H : Doctor(...)`); shared variables express join
/// and head equalities. `#` starts a comment. Keywords are matched case
/// insensitively; identifiers and constants are case sensitive.
Scenario parse_scenario(std::string_view text);

/// Parses the SQL fragment over one peer's schema:
///   SELECT item (, item)* FROM rel (, rel)* [WHERE cond (AND cond)*]
///   (UNION <block>)*
/// where item is an attribute, rel.attr, or a quoted literal, and cond
/// compares an attribute reference with `=`, `!=`, or `≠` against an
/// attribute reference or a quoted literal.
Query parse_query_sql(std::string_view text, const PeerSchema& peer);

/// Parses one rule with explicit peer qualifiers against an existing
/// network, e.g.  9DC : SkilledPerson(SID, "Doctor") :- H : Doctor(SID, h, l, s, e)
GavRule parse_rule(std::string_view text, const PeerNetwork& net);

}  // namespace pdms
