#pragma once

#include "pdms/loss.hpp"
#include "pdms/model.hpp"

#include <optional>
#include <set>

namespace pdms {

/// Attribute-level evidence that two attributes denote the same thing,
/// harvested from mapping rules.
struct AttributeCorrespondence {
    std::string source_attr;
    std::string candidate_attr;
    enum class Provenance { shared_variable, name_similarity } provenance =
        Provenance::shared_variable;
};

struct MatchResult {
    RelationSchema relation;
    double score = 0.0;
    std::vector<AttributeCorrespondence> correspondences;
};

/// Levenshtein distance and the normalized similarity used by the matcher
/// (1 - distance/maxLen over lowercased strings).
std::size_t edit_distance(std::string_view a, std::string_view b);
double name_similarity(std::string_view a, std::string_view b);

/// Relations of `neighbor` reachable from the source relation by chaining
/// rules of the two mappings source-peer<->host and host<->neighbor:
/// a rule whose head (resp. body) mentions a connected relation connects
/// every relation of its body (resp. head), to a fixpoint.
std::set<std::string> transitive_candidates(const PeerNetwork& net, const std::string& source_peer,
                                            const std::string& source_relation,
                                            const std::string& host, const std::string& neighbor);

/// Convenience overload: infers the host as the unique peer mapped to both
/// the source peer and the neighbor.
std::set<std::string> transitive_candidates(const PeerNetwork& net, const std::string& source_peer,
                                            const std::string& source_relation,
                                            const std::string& neighbor);

/// (source attribute, candidate relation, candidate attribute) triples
/// connected through the two edges' rules, where positions sharing a rule
/// variable or carrying equal constants are linked.
using EvidenceTriple = std::tuple<std::string, std::string, std::string>;
std::set<EvidenceTriple> correspondence_evidence(const PeerNetwork& net,
                                                 const std::string& source_peer,
                                                 const std::string& source_relation,
                                                 const std::string& host,
                                                 const std::string& neighbor);

/// Picks the candidate with the best combined name/attribute similarity.
/// Attribute pairs backed by evidence score 1; the rest fall back to edit
/// similarity under a greedy injective assignment (highest first, ties by
/// attribute name). Relation-name ties break lexicographically.
MatchResult schema_match(const RelationSchema& source, const std::vector<RelationSchema>& candidates,
                         const std::set<EvidenceTriple>& evidence = {});

/// Builds the rule linking the complement relation to the matched neighbor
/// relation, repositioning the NEQ restrictions through the attribute
/// correspondences. Throws when a restricted attribute has none.
GavRule derive_neighbor_rule(const ComplementSpec& spec, const MatchResult& match,
                             const std::string& neighbor);

struct NeighborOutcome {
    std::string neighbor;
    std::vector<std::string> candidates;
    std::optional<MatchResult> match;
    std::optional<GavRule> rule;
    bool verified = false;
    std::string reason;  // empty on success
};

/// For every neighbor of the host except the recovery's origin: candidates,
/// match, rule derivation, and re-verification of the host-side query across
/// that edge. Failing edges stay unmodified; outcomes record why.
std::pair<PeerNetwork, std::vector<NeighborOutcome>> propagate_complement(
    const PeerNetwork& net, const ComplementSpec& spec, const std::string& host,
    const Query& origin_query);

/// Overload using the full projection of the source relation as the origin
/// query.
std::pair<PeerNetwork, std::vector<NeighborOutcome>> propagate_complement(
    const PeerNetwork& net, const ComplementSpec& spec, const std::string& host);

}  // namespace pdms
