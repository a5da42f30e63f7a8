#include "pdms/rewrite.hpp"

#include "pdms/canonical.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>

namespace pdms {

namespace {

// ---------------------------------------------------------------------------
// Working form: pinned variables inlined back into head and atoms, so all
// restriction constants are visible to matching. Predicates are then NEQ
// against constants plus any EQ pins that could not be inlined.
// ---------------------------------------------------------------------------

using Subst = std::map<std::string, Term>;

Term resolve(const Subst& s, Term t) {
    while (t.is_var()) {
        auto it = s.find(t.text());
        if (it == s.end()) break;
        t = it->second;
    }
    return t;
}

struct Work {
    std::vector<Term> head;
    std::vector<Atom> atoms;
    std::vector<Predicate> neqs;  // NEQ var-const only
    bool alive = true;
};

// Applies a binding to the whole working disjunct. Ground NEQ predicates
// evaluate immediately; a violated one kills the disjunct.
void apply_binding(Work& w, const Subst& s) {
    for (auto& t : w.head) t = resolve(s, t);
    for (auto& a : w.atoms) {
        for (auto& t : a.args) t = resolve(s, t);
    }
    std::vector<Predicate> kept;
    for (auto& p : w.neqs) {
        Term lhs = resolve(s, Term::var(p.var));
        Term rhs = resolve(s, p.rhs);
        if (lhs.is_const() && rhs.is_const()) {
            if (lhs.text() == rhs.text()) {
                w.alive = false;
                return;
            }
            continue;
        }
        if (lhs.is_var()) {
            kept.push_back({lhs.text(), PredOp::neq, rhs});
        } else {
            kept.push_back({rhs.text(), PredOp::neq, lhs});
        }
    }
    w.neqs = std::move(kept);
}

// Builds the working form of a canonical disjunct; nullopt when the
// disjunct is unsatisfiable.
std::optional<Work> to_work(const Disjunct& d) {
    std::map<std::string, std::set<std::string>> pins;
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::eq && p.rhs.is_const()) pins[p.var].insert(p.rhs.text());
    }
    Subst inline_pins;
    for (const auto& [v, cs] : pins) {
        if (cs.size() > 1) return std::nullopt;  // pinned to two constants
        inline_pins[v] = Term::constant(*cs.begin());
    }
    Work w;
    w.head = d.head;
    w.atoms = d.body;
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::neq) w.neqs.push_back(p);
    }
    apply_binding(w, inline_pins);
    if (!w.alive) return std::nullopt;
    return w;
}

// ---------------------------------------------------------------------------
// Direct unfolding: unify a rule head with a query atom. Rule variables map
// to query terms; rule head constants bind query variables (or must equal
// query constants); repeated rule variables force query-side unification.
// ---------------------------------------------------------------------------

struct HeadUnifier {
    Subst theta;  // rule var -> query term
    Subst sigma;  // query var -> term (narrowing)
    bool ok = true;

    void unify_query_terms(Term a, Term b) {
        a = resolve(sigma, a);
        b = resolve(sigma, b);
        if (a == b) return;
        if (a.is_var()) {
            sigma[a.text()] = b;
        } else if (b.is_var()) {
            sigma[b.text()] = a;
        } else {
            ok = false;
        }
    }

    void step(const Term& rule_term, const Term& query_term) {
        if (!ok) return;
        Term q = resolve(sigma, query_term);
        if (rule_term.is_const()) {
            if (q.is_const()) {
                if (q.text() != rule_term.text()) ok = false;
            } else {
                sigma[q.text()] = rule_term;
            }
            return;
        }
        auto it = theta.find(rule_term.text());
        if (it == theta.end()) {
            theta[rule_term.text()] = q;
        } else {
            unify_query_terms(it->second, q);
        }
    }
};

std::optional<HeadUnifier> unify_head(const GavRule& rule, const Atom& atom) {
    if (rule.head.relation != atom.relation || rule.head.peer != atom.peer ||
        rule.head.args.size() != atom.args.size()) {
        return std::nullopt;
    }
    HeadUnifier u;
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        u.step(rule.head.args[i], atom.args[i]);
    }
    if (!u.ok) return std::nullopt;
    // Normalize theta through sigma.
    for (auto& [_, t] : u.theta) t = resolve(u.sigma, t);
    return u;
}

// ---------------------------------------------------------------------------
// Inverse application: homomorphisms from a rule body into the disjunct.
// Strict matching — each rule variable maps to exactly one query term and
// rule constants only match equal query constants.
// ---------------------------------------------------------------------------

struct Translator {
    const Mapping& mapping;
    std::string from, to;
    std::size_t fresh = 0;

    std::vector<const GavRule*> direct_rules;   // head over `from`, body over `to`
    std::vector<const GavRule*> inverse_rules;  // head over `to`, body over `from`

    Translator(const Mapping& m, std::string from_peer, std::string to_peer)
        : mapping(m), from(std::move(from_peer)), to(std::move(to_peer)) {
        for (const auto& r : m.rules) {
            if (r.head.peer == from && r.body_peer() == to) direct_rules.push_back(&r);
            if (r.head.peer == to && r.body_peer() == from) inverse_rules.push_back(&r);
        }
    }

    Term fresh_var() { return Term::var("~f" + std::to_string(fresh++)); }

    bool is_direct_atom(const Atom& a) const {
        for (const auto* r : direct_rules) {
            if (r->head.relation == a.relation) return true;
        }
        return false;
    }

    // Whether a replaced head-constant position keeps its restriction. The
    // pin stays when the constant is projected by the disjunct's head (the
    // canonical form then ties it to the head variable, which is where a
    // restriction is a real loss of answers), or when a sibling rule of the
    // same relation could put a different value at that position (then the
    // relation's extension does not force the constant and dropping the pin
    // would widen the translation). A constant forced by every defining
    // rule and invisible to the head restates an invariant of the extension
    // and only manufactures spurious loss.
    bool needs_pin(const GavRule& rule, std::size_t pos,
                   const std::vector<Term>& out_head) const {
        const Term& c = rule.head.args[pos];
        for (const auto& h : out_head) {
            if (h.is_const() && h.text() == c.text()) return true;
        }
        for (const auto* r : inverse_rules) {
            if (r == &rule || r->head.relation != rule.head.relation ||
                r->head.args.size() != rule.head.args.size()) {
                continue;
            }
            const Term& t = r->head.args[pos];
            if (t.is_var() || t.text() != c.text()) return true;
        }
        return false;
    }

    // --- direct route ---

    struct DirectResult {
        std::vector<Atom> replacement;
        std::vector<Predicate> preds;
        Subst sigma;
        bool dead = false;
    };

    std::optional<DirectResult> apply_direct(const GavRule& rule, const Atom& atom) {
        auto u = unify_head(rule, atom);
        if (!u) return std::nullopt;
        DirectResult res;
        res.sigma = u->sigma;
        Subst all = u->theta;
        // Body variables outside the head get fresh names per application.
        for (const auto& a : rule.body) {
            for (const auto& t : a.args) {
                if (t.is_var() && !all.count(t.text())) all[t.text()] = fresh_var();
            }
        }
        for (const auto& p : rule.predicates) {
            if (!all.count(p.var)) all[p.var] = fresh_var();
            if (p.rhs.is_var() && !all.count(p.rhs.text())) all[p.rhs.text()] = fresh_var();
        }
        for (Atom a : rule.body) {
            for (auto& t : a.args) t = resolve(all, t);
            res.replacement.push_back(std::move(a));
        }
        for (const auto& p : rule.predicates) {
            Term lhs = resolve(all, Term::var(p.var));
            Term rhs = p.rhs.is_var() ? resolve(all, p.rhs) : p.rhs;
            if (lhs.is_const() && rhs.is_const()) {
                const bool holds = (p.op == PredOp::eq) == (lhs.text() == rhs.text());
                if (!holds) {
                    res.dead = true;
                    return res;
                }
                continue;
            }
            if (lhs.is_var()) {
                res.preds.push_back({lhs.text(), p.op, rhs});
            } else {
                if (p.op == PredOp::neq) res.preds.push_back({rhs.text(), PredOp::neq, lhs});
                else res.preds.push_back({rhs.text(), PredOp::eq, lhs});
            }
        }
        return res;
    }

    // --- inverse route ---

    struct InverseMatch {
        std::vector<std::size_t> covered;     // indices into the remaining atom list
        std::set<std::size_t> consumed_neqs;  // indices into w.neqs
        std::set<std::string> covered_vars;
        std::set<std::string> exposed_vars;   // covered vars carried by the head
        Atom replacement;
        std::vector<Predicate> pins;
    };

    // Matches the rule body onto distinct atoms, one rule variable per query
    // variable and vice versa, with constants aligned exactly. A looser
    // instance match (repeated query variables or constants at variable
    // positions) would replace a specialization of the body by the full
    // head, widening the translation beyond the original query's answers.
    void enumerate_matches(const GavRule& rule, const Work& w,
                           const std::vector<std::size_t>& remaining,
                           std::vector<InverseMatch>& out) {
        std::vector<std::size_t> chosen;
        Subst theta;
        std::map<std::string, std::string> inverse;  // query var -> rule var

        std::function<void(std::size_t)> assign = [&](std::size_t bi) {
            if (bi == rule.body.size()) {
                // Predicate entailment under theta.
                std::set<std::size_t> consumed;
                for (const auto& p : rule.predicates) {
                    Term lhs = resolve(theta, Term::var(p.var));
                    Term rhs = p.rhs.is_var() ? resolve(theta, p.rhs) : p.rhs;
                    if (lhs.is_const() && rhs.is_const()) {
                        const bool holds = (p.op == PredOp::eq) == (lhs.text() == rhs.text());
                        if (!holds) return;
                        continue;
                    }
                    if (p.op == PredOp::eq) return;  // no EQ facts survive inlining
                    bool found = false;
                    for (std::size_t ni = 0; ni < w.neqs.size() && !found; ++ni) {
                        const auto& qn = w.neqs[ni];
                        if (lhs.is_var() && qn.var == lhs.text() && qn.rhs == rhs) {
                            consumed.insert(ni);
                            found = true;
                        }
                    }
                    if (!found) return;
                }
                InverseMatch m;
                m.covered = chosen;
                m.consumed_neqs = std::move(consumed);
                for (std::size_t idx : chosen) {
                    for (const auto& t : w.atoms[idx].args) {
                        if (t.is_var()) m.covered_vars.insert(t.text());
                    }
                }
                Atom rep{rule.head.peer, rule.head.relation, {}};
                for (std::size_t i = 0; i < rule.head.args.size(); ++i) {
                    const Term& t = rule.head.args[i];
                    if (t.is_var()) {
                        Term img = resolve(theta, t);
                        rep.args.push_back(img);
                        if (img.is_var()) m.exposed_vars.insert(img.text());
                    } else {
                        Term g = fresh_var();
                        rep.args.push_back(g);
                        if (needs_pin(rule, i, w.head)) {
                            m.pins.push_back({g.text(), PredOp::eq, t});
                        }
                    }
                }
                m.replacement = std::move(rep);
                out.push_back(std::move(m));
                return;
            }
            const Atom& pat = rule.body[bi];
            for (std::size_t idx : remaining) {
                if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end()) continue;
                const Atom& cand = w.atoms[idx];
                if (cand.relation != pat.relation || cand.peer != pat.peer ||
                    cand.args.size() != pat.args.size()) {
                    continue;
                }
                Subst saved_theta = theta;
                auto saved_inverse = inverse;
                bool ok = true;
                for (std::size_t i = 0; i < pat.args.size() && ok; ++i) {
                    const Term& rt = pat.args[i];
                    const Term& qt = cand.args[i];
                    if (rt.is_const()) {
                        ok = qt.is_const() && qt.text() == rt.text();
                    } else if (qt.is_const()) {
                        ok = false;  // the atom is narrower than the body pattern
                    } else {
                        auto it = theta.find(rt.text());
                        if (it == theta.end()) {
                            auto back = inverse.find(qt.text());
                            if (back != inverse.end() && back->second != rt.text()) {
                                ok = false;  // two rule variables onto one query variable
                            } else {
                                theta[rt.text()] = qt;
                                inverse[qt.text()] = rt.text();
                            }
                        } else {
                            ok = it->second == qt;
                        }
                    }
                }
                if (ok) {
                    chosen.push_back(idx);
                    assign(bi + 1);
                    chosen.pop_back();
                }
                theta = std::move(saved_theta);
                inverse = std::move(saved_inverse);
            }
        };
        assign(0);
    }

    // --- per-disjunct translation ---

    struct Failure {
        std::vector<std::string> blocking;
    };

    void translate_disjunct(const Disjunct& d, std::vector<Disjunct>& outputs, Failure& failure) {
        auto w0 = to_work(d);
        if (!w0) {
            failure.blocking.push_back("(unsatisfiable disjunct)");
            return;
        }

        std::vector<std::size_t> direct_idx, inverse_idx;
        for (std::size_t i = 0; i < w0->atoms.size(); ++i) {
            (is_direct_atom(w0->atoms[i]) ? direct_idx : inverse_idx).push_back(i);
        }

        bool emitted = false;

        // Stage 1: choose a rule per direct atom (cartesian).
        std::function<void(std::size_t, Work, std::vector<Atom>, std::vector<Predicate>)> stage1 =
            [&](std::size_t di, Work w, std::vector<Atom> repl, std::vector<Predicate> preds) {
                if (!w.alive) return;
                if (di == direct_idx.size()) {
                    stage2(w, std::move(repl), std::move(preds), inverse_idx, emitted, outputs);
                    return;
                }
                const Atom atom = w.atoms[direct_idx[di]];
                bool any = false;
                for (const auto* rule : direct_rules) {
                    auto res = apply_direct(*rule, atom);
                    if (!res || res->dead) continue;
                    any = true;
                    Work w2 = w;
                    apply_binding(w2, res->sigma);
                    if (!w2.alive) continue;
                    // The binding covers everything accumulated so far: the
                    // unification of a later atom can equate variables that
                    // earlier replacements already mention.
                    std::vector<Atom> repl2 = repl;
                    for (auto& a : repl2) {
                        for (auto& t : a.args) t = resolve(res->sigma, t);
                    }
                    for (Atom a : res->replacement) {
                        for (auto& t : a.args) t = resolve(res->sigma, t);
                        repl2.push_back(std::move(a));
                    }
                    std::vector<Predicate> preds2;
                    bool dead = false;
                    auto push_pred = [&](const Predicate& p) {
                        Term lhs = resolve(res->sigma, Term::var(p.var));
                        Term rhs = resolve(res->sigma, p.rhs);
                        if (lhs.is_const() && rhs.is_const()) {
                            const bool holds = (p.op == PredOp::eq) == (lhs.text() == rhs.text());
                            if (!holds) dead = true;
                            return;
                        }
                        if (lhs.is_var()) preds2.push_back({lhs.text(), p.op, rhs});
                        else preds2.push_back({rhs.text(), p.op, lhs});
                    };
                    for (const auto& p : preds) push_pred(p);
                    for (const auto& p : res->preds) push_pred(p);
                    if (dead) continue;
                    stage1(di + 1, std::move(w2), std::move(repl2), std::move(preds2));
                }
                if (!any) {
                    failure.blocking.push_back(to_string(atom));
                }
            };

        stage1(0, *w0, {}, {});

        if (!emitted) {
            if (failure.blocking.empty()) {
                for (std::size_t i : inverse_idx) failure.blocking.push_back(to_string(w0->atoms[i]));
            }
        }
    }

    // Stage 2: cover the remaining atoms with inverse rule applications.
    void stage2(const Work& w, std::vector<Atom> repl, std::vector<Predicate> preds,
                const std::vector<std::size_t>& inverse_idx, bool& emitted,
                std::vector<Disjunct>& outputs) {
        std::function<void(std::vector<std::size_t>, std::vector<Atom>, std::vector<Predicate>,
                           std::set<std::size_t>)>
            cover = [&](std::vector<std::size_t> remaining, std::vector<Atom> acc,
                        std::vector<Predicate> acc_preds, std::set<std::size_t> consumed) {
                if (remaining.empty()) {
                    emit(w, repl, acc, preds, acc_preds, consumed, emitted, outputs);
                    return;
                }
                // Some application must cover the first remaining atom, so
                // restricting to those avoids re-deriving the same cover in
                // every application order.
                const std::size_t anchor = remaining.front();
                for (const auto* rule : inverse_rules) {
                    std::vector<InverseMatch> matches;
                    enumerate_matches(*rule, w, remaining, matches);
                    for (auto& m : matches) {
                        if (std::find(m.covered.begin(), m.covered.end(), anchor) ==
                            m.covered.end()) {
                            continue;
                        }
                        std::vector<std::size_t> rest;
                        for (std::size_t idx : remaining) {
                            if (std::find(m.covered.begin(), m.covered.end(), idx) == m.covered.end()) {
                                rest.push_back(idx);
                            }
                        }
                        // A covered variable the head does not carry is gone
                        // from the translation; if anything else still
                        // mentions it, the join it expressed would be lost,
                        // so the application is not a valid cover.
                        std::set<std::string> outside;
                        auto collect_atom = [&](const Atom& a) {
                            for (const auto& t : a.args) {
                                if (t.is_var()) outside.insert(t.text());
                            }
                        };
                        for (const auto& t : w.head) {
                            if (t.is_var()) outside.insert(t.text());
                        }
                        for (const auto& a : repl) collect_atom(a);
                        for (const auto& a : acc) collect_atom(a);
                        for (std::size_t idx : rest) collect_atom(w.atoms[idx]);
                        for (const auto& p : preds) outside.insert(p.var);
                        for (const auto& p : acc_preds) outside.insert(p.var);
                        for (std::size_t ni = 0; ni < w.neqs.size(); ++ni) {
                            if (!consumed.count(ni) && !m.consumed_neqs.count(ni)) {
                                outside.insert(w.neqs[ni].var);
                            }
                        }
                        bool forgets_join = false;
                        for (const auto& v : m.covered_vars) {
                            if (!m.exposed_vars.count(v) && outside.count(v)) forgets_join = true;
                        }
                        if (forgets_join) continue;

                        std::vector<Atom> acc2 = acc;
                        acc2.push_back(m.replacement);
                        std::vector<Predicate> preds2 = acc_preds;
                        preds2.insert(preds2.end(), m.pins.begin(), m.pins.end());
                        std::set<std::size_t> consumed2 = consumed;
                        consumed2.insert(m.consumed_neqs.begin(), m.consumed_neqs.end());
                        cover(std::move(rest), std::move(acc2), std::move(preds2),
                              std::move(consumed2));
                    }
                }
            };
        cover(inverse_idx, {}, {}, {});
    }

    void emit(const Work& w, const std::vector<Atom>& direct_repl,
              const std::vector<Atom>& inverse_repl, const std::vector<Predicate>& direct_preds,
              const std::vector<Predicate>& inverse_preds, const std::set<std::size_t>& consumed,
              bool& emitted, std::vector<Disjunct>& outputs) {
        Disjunct out;
        out.head = w.head;
        out.body = direct_repl;
        out.body.insert(out.body.end(), inverse_repl.begin(), inverse_repl.end());
        out.predicates = direct_preds;
        out.predicates.insert(out.predicates.end(), inverse_preds.begin(), inverse_preds.end());
        for (std::size_t i = 0; i < w.neqs.size(); ++i) {
            if (!consumed.count(i)) out.predicates.push_back(w.neqs[i]);
        }
        // Leftover restrictions on variables that no longer occur anywhere
        // cannot be expressed over the target schema; such a branch is not a
        // valid translation.
        Query probe{{out}};
        try {
            validate_query_shape(probe);
        } catch (const ValidationError&) {
            return;
        }
        outputs.push_back(std::move(out));
        emitted = true;
    }
};

std::pair<Query, std::vector<RoundTrip::Dropped>> translate(const Query& q, const Mapping& mapping,
                                                            const std::string& target) {
    const Query canonical = canonicalize(q);
    const std::string origin = canonical.peer();
    if (!mapping.connects(origin, target)) {
        throw RewriteError("mapping " + mapping.peer_a + "/" + mapping.peer_b +
                           " does not connect " + origin + " and " + target);
    }

    Translator tr(mapping, origin, target);
    std::vector<Disjunct> out;
    std::vector<RoundTrip::Dropped> dropped;
    std::vector<std::string> blocking_all;

    for (std::size_t i = 0; i < canonical.disjuncts.size(); ++i) {
        std::vector<Disjunct> outputs;
        Translator::Failure failure;
        tr.translate_disjunct(canonical.disjuncts[i], outputs, failure);
        if (outputs.empty()) {
            std::string reason = "no applicable rule covers: ";
            std::vector<std::string> blocking = failure.blocking;
            std::sort(blocking.begin(), blocking.end());
            blocking.erase(std::unique(blocking.begin(), blocking.end()), blocking.end());
            for (std::size_t b = 0; b < blocking.size(); ++b) {
                if (b) reason += ", ";
                reason += blocking[b];
            }
            dropped.push_back({i, reason});
            blocking_all.insert(blocking_all.end(), blocking.begin(), blocking.end());
        } else {
            out.insert(out.end(), outputs.begin(), outputs.end());
        }
    }

    if (out.empty()) {
        std::sort(blocking_all.begin(), blocking_all.end());
        blocking_all.erase(std::unique(blocking_all.begin(), blocking_all.end()),
                           blocking_all.end());
        std::string msg = "untranslatable query: no disjunct could be reformulated onto " + target;
        throw RewriteError(msg, blocking_all);
    }
    return {canonicalize(Query{std::move(out)}), std::move(dropped)};
}

}  // namespace

bool rule_applicable(const GavRule& rule, const Atom& atom) {
    return unify_head(rule, atom).has_value();
}

Query unfold_forward(const Query& q, const Mapping& mapping, const std::string& target) {
    return translate(q, mapping, target).first;
}

std::pair<Query, std::vector<RoundTrip::Dropped>> translate_back(const Query& q,
                                                                 const Mapping& mapping,
                                                                 const std::string& target) {
    return translate(q, mapping, target);
}

RoundTrip roundtrip(const Query& q, const Mapping& mapping) {
    RoundTrip rt;
    rt.original = canonicalize(q);
    const std::string origin = rt.original.peer();
    if (!mapping.connects(origin, mapping.other(origin))) {
        throw RewriteError("query peer " + origin + " is not an endpoint of the mapping");
    }
    const std::string target = mapping.other(origin);
    rt.forward = unfold_forward(rt.original, mapping, target);
    auto [back, dropped] = translate_back(rt.forward, mapping, origin);
    rt.back = std::move(back);
    rt.dropped = std::move(dropped);
    return rt;
}

}  // namespace pdms
