#include "pdms/model.hpp"

#include <algorithm>
#include <sstream>

namespace pdms {

std::string Query::peer() const {
    for (const auto& d : disjuncts) {
        if (!d.body.empty()) return d.body.front().peer;
    }
    return {};
}

std::optional<std::size_t> RelationSchema::attribute_index(std::string_view attr) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i] == attr) return i;
    }
    return std::nullopt;
}

const RelationSchema* PeerSchema::find_relation(std::string_view name) const {
    for (const auto& r : relations) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

const PeerSchema* PeerNetwork::find_peer(std::string_view id) const {
    for (const auto& p : peers) {
        if (p.peer_id == id) return &p;
    }
    return nullptr;
}

const RelationSchema* PeerNetwork::find_relation(std::string_view peer, std::string_view relation) const {
    const PeerSchema* p = find_peer(peer);
    return p ? p->find_relation(relation) : nullptr;
}

const Mapping* PeerNetwork::find_mapping(std::string_view a, std::string_view b) const {
    for (const auto& m : mappings) {
        if (m.connects(a, b)) return &m;
    }
    return nullptr;
}

Mapping* PeerNetwork::find_mapping(std::string_view a, std::string_view b) {
    for (auto& m : mappings) {
        if (m.connects(a, b)) return &m;
    }
    return nullptr;
}

std::vector<std::string> PeerNetwork::neighbors(std::string_view peer) const {
    std::set<std::string> out;
    for (const auto& m : mappings) {
        if (m.peer_a == peer) out.insert(m.peer_b);
        if (m.peer_b == peer) out.insert(m.peer_a);
    }
    return {out.begin(), out.end()};
}

std::string to_string(const Term& t) {
    if (t.is_var()) return t.text();
    std::string out = "\"";
    for (char c : t.text()) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string to_string(const Atom& a) {
    std::ostringstream os;
    os << a.peer << " : " << a.relation << "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) os << ", ";
        os << to_string(a.args[i]);
    }
    os << ")";
    return os.str();
}

std::string to_string(const Predicate& p) {
    return p.var + (p.op == PredOp::eq ? " = " : " != ") + to_string(p.rhs);
}

namespace {

void check_rule(const PeerNetwork& net, const Mapping& m, const GavRule& r,
                std::vector<Diagnostic>& out) {
    const std::string where = "rule '" + to_string(r.head) + " :- ...' in mapping " +
                              m.peer_a + "/" + m.peer_b;
    if (r.body.empty()) {
        out.push_back({"empty-rule-body", where + ": body is empty"});
        return;
    }
    const std::string head_peer = r.head.peer;
    const std::string body_peer = r.body.front().peer;
    if (head_peer == body_peer) {
        out.push_back({"bad-rule-endpoints", where + ": head and body are over the same peer"});
    }
    if (!m.connects(head_peer, body_peer)) {
        out.push_back({"bad-rule-endpoints",
                       where + ": rule connects " + head_peer + "/" + body_peer +
                           " instead of the mapping's peers"});
    }
    for (const auto& a : r.body) {
        if (a.peer != body_peer) {
            out.push_back({"mixed-body-peers", where + ": body atom over " + a.peer +
                                                   " mixed with atoms over " + body_peer});
        }
    }
    std::set<std::string> body_vars;
    for (const auto& a : r.body) {
        for (const auto& t : a.args) {
            if (t.is_var()) body_vars.insert(t.text());
        }
    }
    for (const auto& t : r.head.args) {
        if (t.is_var() && !body_vars.count(t.text())) {
            out.push_back({"unsafe-rule", where + ": head variable " + t.text() +
                                              " does not occur in the body"});
        }
    }
    for (const auto& p : r.predicates) {
        if (!body_vars.count(p.var)) {
            out.push_back({"unsafe-rule", where + ": predicate variable " + p.var +
                                              " does not occur in the body"});
        }
        if (p.op == PredOp::neq && p.rhs.is_var()) {
            out.push_back({"bad-predicate", where + ": != between two variables is not supported"});
        }
    }
    auto check_atom = [&](const Atom& a) {
        const RelationSchema* rel = net.find_relation(a.peer, a.relation);
        if (!rel) {
            out.push_back({"unknown-relation", where + ": relation " + a.peer + "." + a.relation +
                                                   " is not declared"});
            return;
        }
        if (rel->arity() != a.args.size()) {
            out.push_back({"arity-mismatch",
                           where + ": " + a.peer + "." + a.relation + " expects " +
                               std::to_string(rel->arity()) + " arguments, got " +
                               std::to_string(a.args.size())});
        }
    };
    check_atom(r.head);
    for (const auto& a : r.body) check_atom(a);
}

}  // namespace

std::vector<Diagnostic> validate_network(const PeerNetwork& net) {
    std::vector<Diagnostic> out;
    std::set<std::string> peer_ids;
    for (const auto& p : net.peers) {
        if (!peer_ids.insert(p.peer_id).second) {
            out.push_back({"duplicate-peer", "peer " + p.peer_id + " declared twice"});
        }
        std::set<std::string> rel_names;
        for (const auto& r : p.relations) {
            if (!rel_names.insert(r.name).second) {
                out.push_back({"duplicate-relation",
                               "relation " + p.peer_id + "." + r.name + " declared twice"});
            }
            if (r.attributes.empty()) {
                out.push_back({"empty-relation",
                               "relation " + p.peer_id + "." + r.name + " has no attributes"});
            }
            std::set<std::string> attrs;
            for (const auto& a : r.attributes) {
                if (!attrs.insert(a).second) {
                    out.push_back({"duplicate-attribute", "attribute " + a + " duplicated in " +
                                                              p.peer_id + "." + r.name});
                }
            }
        }
        for (const auto& v : p.virtual_relations) {
            if (!rel_names.count(v)) {
                out.push_back({"unknown-relation",
                               "virtual flag on undeclared relation " + p.peer_id + "." + v});
            }
        }
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& m : net.mappings) {
        for (const auto* end : {&m.peer_a, &m.peer_b}) {
            if (!net.find_peer(*end)) {
                out.push_back({"unknown-peer", "mapping endpoint " + *end + " is not a declared peer"});
            }
        }
        auto key = std::minmax(m.peer_a, m.peer_b);
        if (!pairs.insert({key.first, key.second}).second) {
            out.push_back({"duplicate-mapping",
                           "more than one mapping between " + key.first + " and " + key.second});
        }
        for (const auto& r : m.rules) check_rule(net, m, r, out);
    }
    return out;
}

void validate_query_shape(const Query& q) {
    if (q.disjuncts.empty()) throw ValidationError("query has no disjuncts");
    const std::size_t arity = q.disjuncts.front().head.size();
    for (const auto& d : q.disjuncts) {
        if (d.head.size() != arity) {
            throw ValidationError("disjuncts disagree on head arity");
        }
        if (d.body.empty()) throw ValidationError("disjunct has an empty body");
        std::set<std::string> body_vars;
        for (const auto& a : d.body) {
            for (const auto& t : a.args) {
                if (t.is_var()) body_vars.insert(t.text());
            }
        }
        std::set<std::string> pinned;
        std::set<std::string> head_vars;
        for (const auto& t : d.head) {
            if (t.is_var()) head_vars.insert(t.text());
        }
        for (const auto& p : d.predicates) {
            if (p.op == PredOp::eq && p.rhs.is_const()) pinned.insert(p.var);
            if (p.op == PredOp::neq && p.rhs.is_var()) {
                throw ValidationError("!= between two variables is not supported");
            }
        }
        for (const auto& t : d.head) {
            if (t.is_var() && !body_vars.count(t.text()) && !pinned.count(t.text())) {
                throw ValidationError("unsafe head variable " + t.text());
            }
        }
        for (const auto& p : d.predicates) {
            if (!body_vars.count(p.var) && !head_vars.count(p.var)) {
                throw ValidationError("unsafe predicate variable " + p.var);
            }
            if (p.rhs.is_var() && !body_vars.count(p.rhs.text()) && !head_vars.count(p.rhs.text())) {
                throw ValidationError("unsafe predicate variable " + p.rhs.text());
            }
        }
    }
}

void validate_query(const Query& q, const PeerNetwork& net) {
    validate_query_shape(q);
    std::string peer;
    for (const auto& d : q.disjuncts) {
        for (const auto& a : d.body) {
            if (peer.empty()) peer = a.peer;
            if (a.peer != peer) {
                throw ValidationError("query atoms span peers " + peer + " and " + a.peer);
            }
            const RelationSchema* rel = net.find_relation(a.peer, a.relation);
            if (!rel) {
                throw ValidationError("unknown relation " + a.peer + "." + a.relation);
            }
            if (rel->arity() != a.args.size()) {
                throw ValidationError("arity mismatch on " + a.peer + "." + a.relation);
            }
        }
    }
}

}  // namespace pdms
