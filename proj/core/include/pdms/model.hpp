#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdms {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class PdmsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public PdmsError {
public:
    using PdmsError::PdmsError;
};

/// Position of a token inside a parsed document, 1-based line/column.
struct SourceSpan {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t offset = 0;
    std::size_t length = 0;
};

class ParseError : public PdmsError {
public:
    ParseError(const std::string& message, SourceSpan span)
        : PdmsError(message), span_(span) {}
    const SourceSpan& span() const { return span_; }

private:
    SourceSpan span_;
};

class RewriteError : public PdmsError {
public:
    RewriteError(const std::string& message, std::vector<std::string> blocking_atoms = {})
        : PdmsError(message), blocking_atoms_(std::move(blocking_atoms)) {}
    const std::vector<std::string>& blocking_atoms() const { return blocking_atoms_; }

private:
    std::vector<std::string> blocking_atoms_;
};

// ---------------------------------------------------------------------------
// Terms, atoms, predicates
// ---------------------------------------------------------------------------

/// A term is either a variable or a string constant. Variable names and
/// constant values live in disjoint lexical spaces; constants are always
/// quoted in surface syntax.
class Term {
public:
    Term() = default;

    static Term var(std::string name) { return Term(true, std::move(name)); }
    static Term constant(std::string value) { return Term(false, std::move(value)); }

    bool is_var() const { return is_var_; }
    bool is_const() const { return !is_var_; }
    const std::string& text() const { return text_; }

    auto operator<=>(const Term&) const = default;

private:
    Term(bool is_var, std::string text) : is_var_(is_var), text_(std::move(text)) {}

    bool is_var_ = false;
    std::string text_;
};

/// A relational atom qualified by the peer that owns the relation.
struct Atom {
    std::string peer;
    std::string relation;
    std::vector<Term> args;

    auto operator<=>(const Atom&) const = default;
};

enum class PredOp { eq, neq };

/// Comparison of a variable against a constant or another variable.
/// The fragment admits EQ/NEQ against constants and EQ between variables.
struct Predicate {
    std::string var;
    PredOp op = PredOp::eq;
    Term rhs;

    auto operator<=>(const Predicate&) const = default;
};

// ---------------------------------------------------------------------------
// Queries and rules
// ---------------------------------------------------------------------------

/// One conjunctive block of a union query: head projection, joined atoms,
/// and constant restrictions.
struct Disjunct {
    std::vector<Term> head;
    std::vector<Atom> body;
    std::vector<Predicate> predicates;

    auto operator<=>(const Disjunct&) const = default;
};

/// A union of conjunctive queries. All disjuncts share the head arity.
struct Query {
    std::vector<Disjunct> disjuncts;

    std::size_t arity() const { return disjuncts.empty() ? 0 : disjuncts.front().head.size(); }
    /// Peer the query ranges over; taken from the first body atom.
    std::string peer() const;

    auto operator<=>(const Query&) const = default;
};

/// A GAV view definition: the head relation of one peer defined by a
/// conjunction of atoms over a single other peer.
struct GavRule {
    Atom head;
    std::vector<Atom> body;
    std::vector<Predicate> predicates;

    std::string body_peer() const { return body.empty() ? std::string() : body.front().peer; }

    auto operator<=>(const GavRule&) const = default;
};

/// All rules connecting one unordered pair of peers. Rule heads may face
/// either side; rule order is stable and only affects output ordering.
struct Mapping {
    std::string peer_a;
    std::string peer_b;
    std::vector<GavRule> rules;

    bool connects(std::string_view x, std::string_view y) const {
        return (peer_a == x && peer_b == y) || (peer_a == y && peer_b == x);
    }
    std::string other(std::string_view peer) const {
        return peer_a == peer ? peer_b : peer_a;
    }
};

// ---------------------------------------------------------------------------
// Schemas and the peer network
// ---------------------------------------------------------------------------

struct RelationSchema {
    std::string name;
    std::vector<std::string> attributes;

    std::size_t arity() const { return attributes.size(); }
    std::optional<std::size_t> attribute_index(std::string_view attr) const;

    auto operator<=>(const RelationSchema&) const = default;
};

struct PeerSchema {
    std::string peer_id;
    std::vector<RelationSchema> relations;
    std::set<std::string> virtual_relations;

    const RelationSchema* find_relation(std::string_view name) const;
    bool is_virtual(std::string_view name) const { return virtual_relations.count(std::string(name)) > 0; }
};

struct PeerNetwork {
    std::vector<PeerSchema> peers;
    std::vector<Mapping> mappings;

    const PeerSchema* find_peer(std::string_view id) const;
    const RelationSchema* find_relation(std::string_view peer, std::string_view relation) const;
    const Mapping* find_mapping(std::string_view a, std::string_view b) const;
    Mapping* find_mapping(std::string_view a, std::string_view b);

    /// Peer ids sharing a mapping with `peer`, sorted.
    std::vector<std::string> neighbors(std::string_view peer) const;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Diagnostic {
    std::string code;
    std::string message;
};

/// Structural check of every network invariant. Returns one diagnostic per
/// violation; an empty list means the network is well formed.
std::vector<Diagnostic> validate_network(const PeerNetwork& net);

/// Throws ValidationError unless `q` is a well-formed query over a single
/// peer of `net` (atoms resolve, arities match, safety holds). A head
/// variable is considered safe when it occurs in the body or is pinned by
/// an EQ-constant predicate.
void validate_query(const Query& q, const PeerNetwork& net);

/// Safety/shape check independent of any schema.
void validate_query_shape(const Query& q);

// Rendering helpers shared across modules (full renderers live in render.hpp).
std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Predicate& p);

}  // namespace pdms
