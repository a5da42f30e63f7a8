#include "pdms/simulator.hpp"

#include "pdms/canonical.hpp"
#include "pdms/propagation.hpp"

#include <algorithm>
#include <deque>
#include <random>

namespace pdms {

Instance generate_data(const PeerNetwork& net, const GeneratorConfig& cfg) {
    Instance out;
    std::mt19937_64 rng(cfg.seed);
    const std::size_t rows = cfg.rows_per_relation;
    for (const auto& peer : net.peers) {
        for (const auto& rel : peer.relations) {
            if (peer.is_virtual(rel.name)) continue;
            auto& tuples = out.relations[{peer.peer_id, rel.name}];
            for (std::size_t row = 0; row < rows; ++row) {
                Tuple t;
                for (const auto& attr : rel.attributes) {
                    if (cfg.key_attributes.count(attr)) {
                        t.push_back(attr + "_" + std::to_string(row));
                        continue;
                    }
                    auto pool = cfg.value_pools.find(attr);
                    if (pool != cfg.value_pools.end() && !pool->second.empty()) {
                        t.push_back(pool->second[rng() % pool->second.size()]);
                    } else {
                        // Shared naming across relations keeps same-named
                        // attributes joinable.
                        t.push_back(attr + "_" + std::to_string(rng() % std::max<std::size_t>(rows, 1)));
                    }
                }
                tuples.insert(std::move(t));
            }
        }
    }
    return out;
}

namespace {

using Binding = std::map<std::string, std::string>;

class Evaluator {
public:
    Evaluator(const Instance& data, const PeerNetwork& net) : data_(data), net_(net) {}

    TupleSet evaluate_query(const Query& q) {
        TupleSet out;
        for (const auto& d : q.disjuncts) {
            TupleSet part = evaluate_disjunct(d.head, d.body, d.predicates);
            out.insert(part.begin(), part.end());
        }
        return out;
    }

    TupleSet evaluate_disjunct(const std::vector<Term>& head, const std::vector<Atom>& body,
                               const std::vector<Predicate>& preds) {
        TupleSet out;
        Binding binding;
        join(body, 0, binding, preds, head, out);
        return out;
    }

private:
    void join(const std::vector<Atom>& body, std::size_t i, Binding& binding,
              const std::vector<Predicate>& preds, const std::vector<Term>& head, TupleSet& out) {
        if (i == body.size()) {
            finish(binding, preds, head, out);
            return;
        }
        const Atom& a = body[i];
        for (const Tuple& t : extension(a.peer, a.relation, a.args.size())) {
            Binding saved = binding;
            bool ok = true;
            for (std::size_t k = 0; k < a.args.size() && ok; ++k) {
                const Term& arg = a.args[k];
                if (arg.is_const()) {
                    ok = arg.text() == t[k];
                } else {
                    auto it = binding.find(arg.text());
                    if (it == binding.end()) {
                        binding[arg.text()] = t[k];
                    } else {
                        ok = it->second == t[k];
                    }
                }
            }
            if (ok) join(body, i + 1, binding, preds, head, out);
            binding = std::move(saved);
        }
    }

    void finish(Binding binding, const std::vector<Predicate>& preds, const std::vector<Term>& head,
                TupleSet& out) {
        auto value = [&](const Term& t) -> std::optional<std::string> {
            if (t.is_const()) return t.text();
            auto it = binding.find(t.text());
            if (it == binding.end()) return std::nullopt;
            return it->second;
        };
        // EQ predicates are equality constraints: they bind free variables
        // (a pinned head variable has no body occurrence) and may cascade,
        // so iterate to a fixpoint before filtering.
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& p : preds) {
                if (p.op != PredOp::eq) continue;
                auto lhs = value(Term::var(p.var));
                auto rhs = value(p.rhs);
                if (lhs && rhs) {
                    if (*lhs != *rhs) return;
                } else if (!lhs && rhs) {
                    binding[p.var] = *rhs;
                    changed = true;
                } else if (lhs && p.rhs.is_var()) {
                    binding[p.rhs.text()] = *lhs;
                    changed = true;
                }
            }
        }
        for (const auto& p : preds) {
            auto lhs = value(Term::var(p.var));
            auto rhs = value(p.rhs);
            if (!lhs || !rhs) return;  // unconstrained variable: nothing to return
            if (p.op == PredOp::eq && *lhs != *rhs) return;
            if (p.op == PredOp::neq && *lhs == *rhs) return;
        }
        Tuple row;
        for (const auto& t : head) {
            if (t.is_const()) {
                row.push_back(t.text());
            } else {
                auto it = binding.find(t.text());
                if (it == binding.end()) return;  // unbound head variable
                row.push_back(it->second);
            }
        }
        out.insert(std::move(row));
    }

    const TupleSet& extension(const std::string& peer, const std::string& relation,
                              std::size_t arity) {
        const PeerSchema* ps = net_.find_peer(peer);
        if (ps && ps->is_virtual(relation)) {
            auto key = std::make_pair(peer, relation);
            auto it = virtual_cache_.find(key);
            if (it != virtual_cache_.end()) return it->second;
            if (expanding_.count(key)) {
                static const TupleSet empty;
                return empty;  // cyclic definitions contribute nothing
            }
            expanding_.insert(key);
            TupleSet ext;
            for (const auto& m : net_.mappings) {
                for (const auto& r : m.rules) {
                    if (r.head.peer != peer || r.head.relation != relation ||
                        r.head.args.size() != arity) {
                        continue;
                    }
                    TupleSet part = evaluate_disjunct(r.head.args, r.body, r.predicates);
                    ext.insert(part.begin(), part.end());
                }
            }
            expanding_.erase(key);
            return virtual_cache_[key] = std::move(ext);
        }
        return data_.tuples(peer, relation);
    }

    const Instance& data_;
    const PeerNetwork& net_;
    std::map<std::pair<std::string, std::string>, TupleSet> virtual_cache_;
    std::set<std::pair<std::string, std::string>> expanding_;
};

}  // namespace

TupleSet evaluate(const Query& q, const Instance& data, const PeerNetwork& net) {
    for (const auto& d : q.disjuncts) {
        for (const auto& a : d.body) {
            if (!net.find_relation(a.peer, a.relation)) {
                throw ValidationError("unknown relation " + a.peer + "." + a.relation);
            }
        }
    }
    Evaluator ev(data, net);
    return ev.evaluate_query(q);
}

PropagationTrace propagate_query(const PeerNetwork& net, const std::string& origin, const Query& q,
                                 const Instance& data, const PropagateOptions& opts) {
    if (!net.find_peer(origin)) throw ValidationError("unknown peer " + origin);

    PropagationTrace trace;
    PeerNetwork working = net;

    struct Pending {
        std::string peer;
        Query query;
    };
    std::deque<Pending> frontier;
    std::set<std::string> visited{origin};

    {
        PropagationTrace::Hop hop;
        hop.peer = origin;
        hop.query = canonicalize(q);
        hop.answers = evaluate(hop.query, data, working);
        trace.path.push_back(origin);
        trace.origin_answers.insert(hop.answers.begin(), hop.answers.end());
        trace.hops.push_back(hop);
        frontier.push_back({origin, hop.query});
    }

    while (!frontier.empty()) {
        Pending cur = frontier.front();
        frontier.pop_front();
        for (const std::string& next : working.neighbors(cur.peer)) {
            if (visited.count(next)) continue;
            visited.insert(next);

            PropagationTrace::Hop hop;
            hop.peer = next;
            trace.path.push_back(next);

            if (opts.recover) {
                try {
                    RecoveryResult rec = track_and_replace(cur.query, working, cur.peer, next);
                    hop.loss = rec.report;
                    if (rec.spec) {
                        hop.recovered = true;
                        working = rec.network;
                        auto [after, outcomes] =
                            propagate_complement(working, *rec.spec, next, cur.query);
                        (void)outcomes;
                        working = std::move(after);
                    }
                } catch (const PdmsError& e) {
                    // The round trip may fail outright; forwarding below can
                    // still succeed.
                    hop.error = e.what();
                }
            }

            const Mapping* m = working.find_mapping(cur.peer, next);
            try {
                hop.query = unfold_forward(cur.query, *m, next);
                hop.answers = evaluate(hop.query, data, working);
                trace.origin_answers.insert(hop.answers.begin(), hop.answers.end());
                hop.error.clear();
                frontier.push_back({next, hop.query});
            } catch (const PdmsError& e) {
                hop.error = e.what();  // dead hop
            }
            trace.hops.push_back(std::move(hop));
        }
    }
    return trace;
}

Metrics compare_runs(const PropagationTrace& a, const PropagationTrace& b,
                     const std::optional<TupleSet>& oracle_answers) {
    Metrics m;
    m.count_a = a.origin_answers.size();
    m.count_b = b.origin_answers.size();
    std::set_difference(b.origin_answers.begin(), b.origin_answers.end(), a.origin_answers.begin(),
                        a.origin_answers.end(), std::inserter(m.gained, m.gained.end()));
    std::set_difference(a.origin_answers.begin(), a.origin_answers.end(), b.origin_answers.begin(),
                        b.origin_answers.end(), std::inserter(m.lost, m.lost.end()));
    if (oracle_answers) {
        if (oracle_answers->empty()) {
            m.recall = 1.0;
        } else {
            TupleSet hit;
            std::set_intersection(b.origin_answers.begin(), b.origin_answers.end(),
                                  oracle_answers->begin(), oracle_answers->end(),
                                  std::inserter(hit, hit.end()));
            m.recall = static_cast<double>(hit.size()) / static_cast<double>(oracle_answers->size());
        }
    }
    return m;
}

}  // namespace pdms
