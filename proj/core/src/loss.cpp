#include "pdms/loss.hpp"

#include "pdms/canonical.hpp"
#include "pdms/render.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pdms {

namespace {

std::vector<Predicate> rename_preds(const std::vector<Predicate>& preds,
                                    const std::map<std::string, std::string>& rename) {
    std::vector<Predicate> out;
    for (const auto& p : preds) {
        Predicate q = p;
        auto it = rename.find(p.var);
        if (it != rename.end()) q.var = it->second;
        if (p.rhs.is_var()) {
            auto jt = rename.find(p.rhs.text());
            if (jt != rename.end()) q.rhs = Term::var(jt->second);
        }
        out.push_back(std::move(q));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// An exhaustive match group: one extra-free match, or EQ pins {v=c1}...{v=cn}
// together with exactly the NEQ set {v!=c1,...,v!=cn} on a shared variable.
bool group_exhaustive(const std::vector<LossMatch::Back>& backs) {
    for (const auto& b : backs) {
        if (b.extra.empty()) return true;
    }
    if (backs.empty()) return false;
    std::string var;
    std::set<std::string> eq_consts;
    std::optional<std::set<std::string>> neq_consts;
    for (const auto& b : backs) {
        bool all_eq = true, all_neq = true;
        for (const auto& p : b.extra) {
            if (p.rhs.is_var()) return false;
            if (var.empty()) var = p.var;
            if (p.var != var) return false;
            all_eq = all_eq && p.op == PredOp::eq;
            all_neq = all_neq && p.op == PredOp::neq;
        }
        if (all_eq && b.extra.size() == 1) {
            eq_consts.insert(b.extra.front().rhs.text());
        } else if (all_neq) {
            if (neq_consts) return false;  // at most one excluding disjunct
            std::set<std::string> cs;
            for (const auto& p : b.extra) cs.insert(p.rhs.text());
            neq_consts = std::move(cs);
        } else {
            return false;
        }
    }
    return neq_consts && !eq_consts.empty() && *neq_consts == eq_consts;
}

}  // namespace

LossReport detect_loss(const Query& q_in, const Query& back_in,
                       std::vector<RoundTrip::Dropped> dropped) {
    if (q_in.arity() != back_in.arity()) {
        throw ValidationError("cannot compare queries of different arity");
    }
    const Query q = canonicalize(q_in);
    const Query back = canonicalize(back_in);

    struct Side {
        Skeleton skel;
        std::vector<Predicate> preds;  // renamed to skeleton variables
    };
    auto sides = [](const Query& query) {
        std::vector<Side> out;
        for (const auto& d : query.disjuncts) {
            Skeleton s = skeleton_of(d);
            out.push_back({s, rename_preds(d.predicates, s.rename)});
        }
        return out;
    };
    const std::vector<Side> qs = sides(q);
    const std::vector<Side> bs = sides(back);

    LossReport report;
    report.dropped = std::move(dropped);

    std::map<std::size_t, std::vector<LossMatch::Back>> groups;
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
        std::vector<std::size_t> candidates;
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            if (qs[qi].skel == bs[bi].skel) candidates.push_back(qi);
        }
        if (candidates.empty()) continue;  // extra content on the back side is not loss
        std::optional<std::size_t> chosen;
        if (candidates.size() > 1) {
            // Prefer an exact twin (identical predicates as well).
            for (std::size_t qi : candidates) {
                if (qs[qi].preds == bs[bi].preds) {
                    chosen = qi;
                    break;
                }
            }
            if (!chosen) {
                throw ValidationError(
                    "ambiguous loss matching: two original disjuncts share the same atom "
                    "structure");
            }
        } else {
            chosen = candidates.front();
        }
        std::vector<Predicate> extra;
        const auto& qpreds = qs[*chosen].preds;
        for (const auto& p : bs[bi].preds) {
            if (std::find(qpreds.begin(), qpreds.end(), p) == qpreds.end()) extra.push_back(p);
        }
        groups[*chosen].push_back({bi, std::move(extra)});
    }

    bool all_exhaustive = true;
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        auto it = groups.find(qi);
        if (it == groups.end()) {
            report.lost_disjuncts.push_back(qi);
            all_exhaustive = false;
            continue;
        }
        report.matches.push_back({qi, it->second});
        if (!group_exhaustive(it->second)) all_exhaustive = false;
    }

    report.empty = report.lost_disjuncts.empty() && report.dropped.empty() && all_exhaustive;

    if (!report.empty) {
        // Discriminator: every extra predicate is an EQ pin on one shared
        // head position.
        std::optional<std::size_t> position;
        std::string variable;
        std::set<std::string> excluded;
        bool ok = false;
        for (const auto& m : report.matches) {
            const auto& head = qs[m.query_disjunct].skel.head;
            for (const auto& b : m.backs) {
                for (const auto& p : b.extra) {
                    if (p.op != PredOp::eq || p.rhs.is_var()) {
                        ok = false;
                        goto done;
                    }
                    std::optional<std::size_t> pos;
                    for (std::size_t hi = 0; hi < head.size(); ++hi) {
                        if (head[hi].is_var() && head[hi].text() == p.var) {
                            pos = hi;
                            break;
                        }
                    }
                    if (!pos || (position && *position != *pos)) {
                        ok = false;
                        goto done;
                    }
                    position = pos;
                    variable = p.var;
                    excluded.insert(p.rhs.text());
                    ok = true;
                }
            }
        }
    done:
        if (ok && position) {
            report.discriminator =
                Discriminator{*position, variable, {excluded.begin(), excluded.end()}};
        }
    }
    return report;
}

namespace {

std::string escape_for_name(const std::string& value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '_') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

}  // namespace

ComplementSpec synthesize_complement(const LossReport& report, const Mapping& edge, const Query& q,
                                     const PeerNetwork& net) {
    auto fail = [&](const std::string& why) -> ComplementSpec {
        throw LossShapeError("cannot synthesize a complement: " + why, report);
    };
    if (report.empty) fail("the report is empty");
    if (!report.discriminator) fail("no discriminator (extras are not EQ pins on one head position)");
    if (!report.lost_disjuncts.empty() || !report.dropped.empty()) {
        fail("lost or dropped disjuncts have no complement-based repair");
    }

    // The lossy disjunct: the unique original disjunct whose matches carry
    // the discriminator's extra pins.
    const Query canonical = canonicalize(q);
    std::optional<std::size_t> lossy;
    for (const auto& m : report.matches) {
        bool has_extras = false;
        for (const auto& b : m.backs) has_extras = has_extras || !b.extra.empty();
        if (!has_extras) continue;
        if (lossy && *lossy != m.query_disjunct) fail("extras spread over several disjuncts");
        lossy = m.query_disjunct;
    }
    if (!lossy) fail("no disjunct carries extra restrictions");
    const Disjunct& d = canonical.disjuncts[*lossy];
    if (d.body.size() != 1) fail("the lossy disjunct joins several atoms");
    const Atom& source = d.body.front();

    const std::string origin = source.peer;
    if (!edge.connects(origin, edge.other(origin))) fail("edge does not touch the query's peer");
    const std::string host = edge.other(origin);

    const RelationSchema* source_schema = net.find_relation(origin, source.relation);
    if (!source_schema) fail("unknown source relation " + origin + "." + source.relation);

    // Head variables must cover the atom bijectively so the complement and
    // the source are mutual inverses.
    if (d.head.size() != source.args.size()) {
        fail("the lossy disjunct does not project the full source relation");
    }
    std::vector<std::size_t> head_to_atom(d.head.size());
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < d.head.size(); ++i) {
        if (!d.head[i].is_var()) fail("the lossy disjunct's head holds a constant");
        bool found = false;
        for (std::size_t j = 0; j < source.args.size(); ++j) {
            if (used.count(j)) continue;
            if (source.args[j] == d.head[i]) {
                head_to_atom[i] = j;
                used.insert(j);
                found = true;
                break;
            }
        }
        if (!found) fail("head variable " + d.head[i].text() + " does not map onto the source atom");
    }

    const Discriminator& disc = *report.discriminator;
    if (disc.position >= d.head.size()) fail("discriminator position out of range");
    if (disc.excluded.empty()) fail("empty excluded constant set");

    ComplementSpec spec;
    spec.host_peer = host;

    std::string name = "CO_";
    std::vector<std::string> excluded = disc.excluded;
    std::sort(excluded.begin(), excluded.end());
    for (std::size_t i = 0; i < excluded.size(); ++i) {
        if (i) name += "+";
        name += escape_for_name(excluded[i]);
    }
    spec.relation.name = name;
    for (std::size_t i = 0; i < d.head.size(); ++i) {
        spec.relation.attributes.push_back(source_schema->attributes[head_to_atom[i]]);
    }

    // Definition: complement tuples are the source tuples outside the
    // excluded constants.
    GavRule def;
    def.head.peer = host;
    def.head.relation = spec.relation.name;
    Atom body{origin, source.relation, std::vector<Term>(source.args.size())};
    for (std::size_t i = 0; i < d.head.size(); ++i) {
        Term v = Term::var(spec.relation.attributes[i]);
        def.head.args.push_back(v);
        body.args[head_to_atom[i]] = v;
    }
    def.body.push_back(body);
    for (const auto& c : excluded) {
        def.predicates.push_back(
            {spec.relation.attributes[disc.position], PredOp::neq, Term::constant(c)});
    }
    spec.definition_rule = std::move(def);

    // Contribution: the source relation regains the complement's tuples.
    GavRule contrib;
    contrib.head = body;
    Atom cbody{host, spec.relation.name, {}};
    for (std::size_t i = 0; i < d.head.size(); ++i) {
        cbody.args.push_back(Term::var(spec.relation.attributes[i]));
    }
    contrib.body.push_back(std::move(cbody));
    spec.contribution_rule = std::move(contrib);
    return spec;
}

PeerNetwork apply_recovery(const PeerNetwork& net, const ComplementSpec& spec) {
    PeerNetwork out = net;
    PeerSchema* host = nullptr;
    for (auto& p : out.peers) {
        if (p.peer_id == spec.host_peer) host = &p;
    }
    if (!host) throw ValidationError("unknown host peer " + spec.host_peer);
    if (host->find_relation(spec.relation.name)) {
        throw ValidationError("relation " + spec.host_peer + "." + spec.relation.name +
                              " already exists");
    }
    host->relations.push_back(spec.relation);
    host->virtual_relations.insert(spec.relation.name);

    const std::string origin = spec.definition_rule.body_peer();
    Mapping* m = out.find_mapping(origin, spec.host_peer);
    if (!m) throw ValidationError("no mapping between " + origin + " and " + spec.host_peer);
    m->rules.push_back(spec.definition_rule);
    m->rules.push_back(spec.contribution_rule);
    return out;
}

bool verify_recovery(const Query& q, const PeerNetwork& net, const std::string& peer_a,
                     const std::string& peer_b) {
    const Mapping* m = net.find_mapping(peer_a, peer_b);
    if (!m) throw ValidationError("no mapping between " + peer_a + " and " + peer_b);
    RoundTrip rt = roundtrip(q, *m);
    return detect_loss(rt.original, rt.back, rt.dropped).empty;
}

RecoveryResult track_and_replace(const Query& q, const PeerNetwork& net, const std::string& p1,
                                 const std::string& p2) {
    const Mapping* m = net.find_mapping(p1, p2);
    if (!m) throw ValidationError("no mapping between " + p1 + " and " + p2);

    RecoveryResult res{{}, std::nullopt, net, {}};
    res.trip = roundtrip(q, *m);
    res.report = detect_loss(res.trip.original, res.trip.back, res.trip.dropped);
    if (res.report.empty) return res;

    ComplementSpec spec;
    try {
        spec = synthesize_complement(res.report, *m, q, net);
    } catch (const LossShapeError&) {
        return res;  // diagnosis without repair
    }
    PeerNetwork recovered = apply_recovery(net, spec);
    if (!verify_recovery(q, recovered, p1, p2)) {
        throw PdmsError("internal consistency: recovery for " + spec.relation.name +
                        " did not eliminate the loss");
    }
    res.spec = std::move(spec);
    res.network = std::move(recovered);
    return res;
}

}  // namespace pdms
