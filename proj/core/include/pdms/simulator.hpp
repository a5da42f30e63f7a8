#pragma once

#include "pdms/instance.hpp"
#include "pdms/loss.hpp"
#include "pdms/model.hpp"

#include <cstdint>
#include <optional>

namespace pdms {

struct GeneratorConfig {
    std::uint64_t seed = 1;
    std::size_t rows_per_relation = 10;
    /// Per attribute name: constants to draw from.
    std::map<std::string, std::vector<std::string>> value_pools;
    /// Attributes generated as sequential unique ids; relations of one peer
    /// sharing such an attribute name draw from the same id set.
    std::set<std::string> key_attributes;
};

/// Deterministic synthetic data for every non-virtual relation. Identical
/// (seed, config, network) inputs produce identical instances.
Instance generate_data(const PeerNetwork& net, const GeneratorConfig& cfg);

/// Set-semantics UCQ evaluation: join the body atoms, apply the
/// predicates, project the head, union the disjuncts. Virtual relations
/// expand through their defining rules against the origin peer's data in
/// the same instance; without one they contribute nothing.
TupleSet evaluate(const Query& q, const Instance& data, const PeerNetwork& net);

struct PropagationTrace {
    struct Hop {
        std::string peer;
        Query query;
        std::optional<LossReport> loss;  // present when recovery ran on the incoming edge
        bool recovered = false;          // a complement was synthesized on that edge
        TupleSet answers;
        std::string error;  // non-empty for dead hops
    };
    std::vector<std::string> path;  // visit order
    std::vector<Hop> hops;
    TupleSet origin_answers;
};

struct PropagateOptions {
    bool recover = false;
};

/// Breadth-first propagation from the origin: each peer is visited once
/// (sorted neighbor expansion), the query is reformulated along each edge,
/// and every peer's answers union into the origin's. With recovery enabled,
/// the loss pipeline runs on each edge first and synthesized complements
/// are propagated to the host's neighbors before forwarding.
PropagationTrace propagate_query(const PeerNetwork& net, const std::string& origin, const Query& q,
                                 const Instance& data, const PropagateOptions& opts);

struct Metrics {
    std::size_t count_a = 0;
    std::size_t count_b = 0;
    TupleSet gained;  // answers of b not in a
    TupleSet lost;    // answers of a not in b
    std::optional<double> recall;  // of b against the oracle answers, when given
};

Metrics compare_runs(const PropagationTrace& a, const PropagationTrace& b,
                     const std::optional<TupleSet>& oracle_answers = std::nullopt);

}  // namespace pdms
