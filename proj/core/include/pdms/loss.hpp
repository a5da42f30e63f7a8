#pragma once

#include "pdms/model.hpp"
#include "pdms/rewrite.hpp"

#include <optional>

namespace pdms {

/// How one disjunct of the translated-back query relates to a disjunct of
/// the original: same atom structure plus zero or more extra restrictions.
struct LossMatch {
    std::size_t query_disjunct = 0;
    struct Back {
        std::size_t back_disjunct = 0;
        std::vector<Predicate> extra;  // over the skeleton's variable names
    };
    std::vector<Back> backs;
};

/// The single head position whose constant restrictions constitute the
/// detected loss.
struct Discriminator {
    std::size_t position = 0;
    std::string variable;
    std::vector<std::string> excluded;  // sorted
};

struct LossReport {
    std::vector<LossMatch> matches;
    std::vector<std::size_t> lost_disjuncts;  // original disjuncts with no counterpart
    std::vector<RoundTrip::Dropped> dropped;
    std::optional<Discriminator> discriminator;
    bool empty = false;
};

/// Compares the original query with its round-trip translation. Each back
/// disjunct is matched to the original disjunct with the same atom skeleton;
/// extra predicates beyond the original's are the loss. The report is empty
/// when nothing was lost or dropped and every original disjunct is either
/// matched without extras or covered by an exhaustive EQ/NEQ group over one
/// variable (the c1..cn pins together with the all-excluding NEQ disjunct).
LossReport detect_loss(const Query& q, const Query& q_back,
                       std::vector<RoundTrip::Dropped> dropped = {});

/// The virtual complement relation and the two rules that repair a
/// discriminator-shaped loss.
struct ComplementSpec {
    RelationSchema relation;
    std::string host_peer;
    GavRule definition_rule;    // complement over the host, defined by the source
    GavRule contribution_rule;  // source over the origin, defined by the complement
};

class LossShapeError : public PdmsError {
public:
    LossShapeError(const std::string& message, LossReport report)
        : PdmsError(message), report_(std::move(report)) {}
    const LossReport& report() const { return report_; }

private:
    LossReport report_;
};

/// Builds the complement for a non-empty report whose discriminator names a
/// single head position and whose lossy disjunct has one body atom
/// projecting the full relation. Throws LossShapeError otherwise.
ComplementSpec synthesize_complement(const LossReport& report, const Mapping& edge,
                                     const Query& q, const PeerNetwork& net);

/// Returns a copy of the network with the complement relation added to the
/// host's schema (flagged virtual) and both rules appended to the mapping.
PeerNetwork apply_recovery(const PeerNetwork& net, const ComplementSpec& spec);

/// True iff the round-trip of q across (peer_a, peer_b) reports empty loss.
bool verify_recovery(const Query& q, const PeerNetwork& net, const std::string& peer_a,
                     const std::string& peer_b);

struct RecoveryResult {
    LossReport report;
    std::optional<ComplementSpec> spec;
    PeerNetwork network;
    RoundTrip trip;
};

/// The end-to-end loss pipeline across one edge: round-trip, detect,
/// synthesize when the shape allows it, apply, and re-verify. A loss whose
/// shape has no repair returns the report with the network unchanged.
RecoveryResult track_and_replace(const Query& q, const PeerNetwork& net, const std::string& p1,
                                 const std::string& p2);

}  // namespace pdms
