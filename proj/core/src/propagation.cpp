#include "pdms/propagation.hpp"

#include "pdms/canonical.hpp"
#include "pdms/rewrite.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <tuple>

namespace pdms {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double name_similarity(std::string_view a, std::string_view b) {
    const std::string la = lower(std::string(a));
    const std::string lb = lower(std::string(b));
    const std::size_t max_len = std::max(la.size(), lb.size());
    if (max_len == 0) return 1.0;
    return 1.0 - static_cast<double>(edit_distance(la, lb)) / static_cast<double>(max_len);
}

namespace {

const Mapping* require_mapping(const PeerNetwork& net, const std::string& a, const std::string& b) {
    const Mapping* m = net.find_mapping(a, b);
    if (!m) throw ValidationError("no mapping between " + a + " and " + b);
    return m;
}

}  // namespace

std::set<std::string> transitive_candidates(const PeerNetwork& net, const std::string& source_peer,
                                            const std::string& source_relation,
                                            const std::string& host, const std::string& neighbor) {
    const Mapping* edge1 = require_mapping(net, source_peer, host);
    const Mapping* edge2 = require_mapping(net, host, neighbor);

    std::set<std::pair<std::string, std::string>> connected{{source_peer, source_relation}};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Mapping* m : {edge1, edge2}) {
            for (const auto& r : m->rules) {
                const bool head_in = connected.count({r.head.peer, r.head.relation}) > 0;
                bool body_in = false;
                for (const auto& a : r.body) {
                    body_in = body_in || connected.count({a.peer, a.relation}) > 0;
                }
                if (head_in) {
                    for (const auto& a : r.body) {
                        grew = connected.insert({a.peer, a.relation}).second || grew;
                    }
                }
                if (body_in) {
                    grew = connected.insert({r.head.peer, r.head.relation}).second || grew;
                }
            }
        }
    }
    std::set<std::string> out;
    for (const auto& [peer, rel] : connected) {
        if (peer == neighbor) out.insert(rel);
    }
    return out;
}

std::set<std::string> transitive_candidates(const PeerNetwork& net, const std::string& source_peer,
                                            const std::string& source_relation,
                                            const std::string& neighbor) {
    std::vector<std::string> hosts;
    for (const std::string& h : net.neighbors(source_peer)) {
        if (h != neighbor && net.find_mapping(h, neighbor)) hosts.push_back(h);
    }
    if (hosts.empty()) {
        throw ValidationError("no peer is mapped to both " + source_peer + " and " + neighbor);
    }
    if (hosts.size() > 1) {
        throw ValidationError("host between " + source_peer + " and " + neighbor +
                              " is ambiguous; name it explicitly");
    }
    return transitive_candidates(net, source_peer, source_relation, hosts.front(), neighbor);
}

std::set<EvidenceTriple> correspondence_evidence(const PeerNetwork& net,
                                                 const std::string& source_peer,
                                                 const std::string& source_relation,
                                                 const std::string& host,
                                                 const std::string& neighbor) {
    const Mapping* edge1 = require_mapping(net, source_peer, host);
    const Mapping* edge2 = require_mapping(net, host, neighbor);

    // Union-find over attribute positions plus one node per constant value.
    // Within a rule, positions holding the same variable unite; a position
    // holding a constant unites with the constant's node, linking equal
    // constants across rules.
    std::map<std::string, std::string> parent;
    std::function<std::string(std::string)> find = [&](std::string x) {
        auto it = parent.find(x);
        while (it != parent.end() && it->second != x) {
            x = it->second;
            it = parent.find(x);
        }
        return x;
    };
    auto unite = [&](const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    };
    auto pos_node = [](const Atom& a, std::size_t i) {
        return "p:" + a.peer + "." + a.relation + "." + std::to_string(i);
    };

    std::size_t rule_seq = 0;
    for (const Mapping* m : {edge1, edge2}) {
        for (const auto& r : m->rules) {
            const std::string scope = std::to_string(rule_seq++) + ":";
            std::vector<const Atom*> atoms{&r.head};
            for (const auto& a : r.body) atoms.push_back(&a);
            for (const Atom* a : atoms) {
                for (std::size_t i = 0; i < a->args.size(); ++i) {
                    const Term& t = a->args[i];
                    if (t.is_var()) {
                        unite(pos_node(*a, i), "v:" + scope + t.text());
                    } else {
                        unite(pos_node(*a, i), "c:" + t.text());
                    }
                }
            }
        }
    }

    std::set<EvidenceTriple> out;
    const RelationSchema* src = net.find_relation(source_peer, source_relation);
    const PeerSchema* np = net.find_peer(neighbor);
    if (!src || !np) return out;
    Atom src_atom{source_peer, source_relation, {}};
    for (std::size_t i = 0; i < src->arity(); ++i) {
        const std::string src_node = find(pos_node(src_atom, i));
        for (const auto& cand : np->relations) {
            Atom cand_atom{neighbor, cand.name, {}};
            for (std::size_t j = 0; j < cand.arity(); ++j) {
                if (src_node == find(pos_node(cand_atom, j))) {
                    out.insert({src->attributes[i], cand.name, cand.attributes[j]});
                }
            }
        }
    }
    return out;
}

MatchResult schema_match(const RelationSchema& source, const std::vector<RelationSchema>& candidates,
                         const std::set<EvidenceTriple>& evidence) {
    if (candidates.empty()) throw ValidationError("schema_match needs at least one candidate");

    std::optional<MatchResult> best;
    for (const auto& cand : candidates) {
        // Pair similarities: evidence-backed pairs count as exact.
        struct Pair {
            double sim;
            std::string src, dst;
            bool evid;
        };
        std::vector<Pair> pairs;
        for (const auto& sa : source.attributes) {
            for (const auto& ca : cand.attributes) {
                const bool ev = evidence.count({sa, cand.name, ca}) > 0;
                const double sim = ev ? 1.0 : name_similarity(sa, ca);
                pairs.push_back({sim, sa, ca, ev});
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            return std::tie(b.sim, a.src, a.dst) < std::tie(a.sim, b.src, b.dst);
        });
        std::set<std::string> used_src, used_dst;
        std::map<std::string, Pair> assigned;
        for (const auto& p : pairs) {
            if (p.sim <= 0.0) break;
            if (used_src.count(p.src) || used_dst.count(p.dst)) continue;
            used_src.insert(p.src);
            used_dst.insert(p.dst);
            assigned.emplace(p.src, p);
        }
        double attr_sum = 0.0;
        for (const auto& sa : source.attributes) {
            auto it = assigned.find(sa);
            if (it != assigned.end()) attr_sum += it->second.sim;
        }
        const double attr_sim = source.attributes.empty()
                                    ? 0.0
                                    : attr_sum / static_cast<double>(source.attributes.size());
        const double score = 0.5 * name_similarity(source.name, cand.name) + 0.5 * attr_sim;

        MatchResult mr;
        mr.relation = cand;
        mr.score = score;
        for (const auto& sa : source.attributes) {
            auto it = assigned.find(sa);
            if (it == assigned.end()) continue;
            mr.correspondences.push_back(
                {sa, it->second.dst,
                 it->second.evid ? AttributeCorrespondence::Provenance::shared_variable
                                 : AttributeCorrespondence::Provenance::name_similarity});
        }
        if (!best || score > best->score ||
            (score == best->score && cand.name < best->relation.name)) {
            best = std::move(mr);
        }
    }
    return *best;
}

GavRule derive_neighbor_rule(const ComplementSpec& spec, const MatchResult& match,
                             const std::string& neighbor) {
    std::map<std::string, std::string> corr;  // source attr -> candidate attr
    for (const auto& c : match.correspondences) corr[c.source_attr] = c.candidate_attr;

    // Restricted attributes must carry over, or the rule cannot express the
    // exclusion.
    std::set<std::string> restricted;
    for (const auto& p : spec.definition_rule.predicates) restricted.insert(p.var);
    for (const auto& r : restricted) {
        if (!corr.count(r)) {
            throw ValidationError("no correspondence for " + r + " in " + match.relation.name);
        }
    }

    GavRule rule;
    Atom body{neighbor, match.relation.name, {}};
    for (const auto& attr : match.relation.attributes) body.args.push_back(Term::var(attr));

    rule.head.peer = spec.host_peer;
    rule.head.relation = spec.relation.name;
    for (const auto& attr : spec.relation.attributes) {
        auto it = corr.find(attr);
        if (it != corr.end()) {
            rule.head.args.push_back(Term::var(it->second));
        } else {
            throw ValidationError("no correspondence for " + attr + " in " + match.relation.name);
        }
    }
    rule.body.push_back(std::move(body));
    for (const auto& p : spec.definition_rule.predicates) {
        rule.predicates.push_back({corr.at(p.var), p.op, p.rhs});
    }

    // Safety: head variables come from the body by construction.
    std::set<std::string> body_vars;
    for (const auto& t : rule.body.front().args) body_vars.insert(t.text());
    for (const auto& t : rule.head.args) {
        if (!body_vars.count(t.text())) {
            throw ValidationError("derived rule would be unsafe on " + t.text());
        }
    }
    return rule;
}

std::pair<PeerNetwork, std::vector<NeighborOutcome>> propagate_complement(
    const PeerNetwork& net, const ComplementSpec& spec, const std::string& host,
    const Query& origin_query) {
    const std::string origin = spec.definition_rule.body_peer();
    const std::string source_relation = spec.definition_rule.body.front().relation;

    PeerNetwork current = net;
    std::vector<NeighborOutcome> outcomes;

    for (const std::string& neighbor : net.neighbors(host)) {
        if (neighbor == origin) continue;
        NeighborOutcome oc;
        oc.neighbor = neighbor;
        try {
            auto cands = transitive_candidates(current, origin, source_relation, host, neighbor);
            oc.candidates.assign(cands.begin(), cands.end());
            if (cands.empty()) {
                oc.reason = "skipped: no transitive candidates";
                outcomes.push_back(std::move(oc));
                continue;
            }
            const PeerSchema* np = current.find_peer(neighbor);
            std::vector<RelationSchema> schemas;
            for (const auto& name : oc.candidates) {
                schemas.push_back(*np->find_relation(name));
            }
            const RelationSchema* src = current.find_relation(origin, source_relation);
            auto evidence = correspondence_evidence(current, origin, source_relation, host, neighbor);
            oc.match = schema_match(*src, schemas, evidence);
            GavRule rule = derive_neighbor_rule(spec, *oc.match, neighbor);
            oc.rule = rule;

            PeerNetwork trial = current;
            trial.find_mapping(host, neighbor)->rules.push_back(rule);

            // The host-side version of the recovery query drives the
            // re-verification across this edge.
            Query host_query =
                unfold_forward(origin_query, *trial.find_mapping(origin, host), host);
            oc.verified = verify_recovery(host_query, trial, host, neighbor);
            if (oc.verified) {
                current = std::move(trial);
            } else {
                oc.reason = "verification failed: the round trip still loses semantics";
            }
        } catch (const PdmsError& e) {
            oc.reason = e.what();
        }
        outcomes.push_back(std::move(oc));
    }
    return {std::move(current), std::move(outcomes)};
}

std::pair<PeerNetwork, std::vector<NeighborOutcome>> propagate_complement(
    const PeerNetwork& net, const ComplementSpec& spec, const std::string& host) {
    // Default probe: the full projection of the source relation.
    const Atom& src = spec.definition_rule.body.front();
    Disjunct d;
    d.body.push_back(src);
    d.head = src.args;
    return propagate_complement(net, spec, host, Query{{d}});
}

}  // namespace pdms
