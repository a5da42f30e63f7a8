#include "pdms/canonical.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace pdms {

namespace {

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

using Subst = std::map<std::string, Term>;

Term subst_term(const Subst& s, const Term& t) {
    if (t.is_var()) {
        auto it = s.find(t.text());
        if (it != s.end()) return it->second;
    }
    return t;
}

void subst_disjunct(const Subst& s, Disjunct& d) {
    for (auto& t : d.head) t = subst_term(s, t);
    for (auto& a : d.body) {
        for (auto& t : a.args) t = subst_term(s, t);
    }
    // Substitutions here are variable-to-variable renamings.
    for (auto& p : d.predicates) {
        p.var = subst_term(s, Term::var(p.var)).text();
        p.rhs = subst_term(s, p.rhs);
    }
}

// Union-find for variable unification.
class VarUnion {
public:
    std::string find(const std::string& v) {
        auto it = parent_.find(v);
        if (it == parent_.end()) return v;
        std::string root = find(it->second);
        parent_[v] = root;
        return root;
    }
    void unite(const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra != rb) parent_[std::max(ra, rb)] = std::min(ra, rb);
    }
    Subst to_subst() {
        Subst s;
        for (const auto& [v, _] : parent_) {
            std::string root = find(v);
            if (root != v) s[v] = Term::var(root);
        }
        return s;
    }

private:
    std::map<std::string, std::string> parent_;
};

// ---------------------------------------------------------------------------
// Canonical labeling
// ---------------------------------------------------------------------------

// Rename-invariant grouping key of an atom.
struct AtomKey {
    std::string peer, relation;
    std::vector<std::pair<int, std::string>> pattern;  // (0,"") for vars, (1,value) for consts
    auto operator<=>(const AtomKey&) const = default;
};

AtomKey key_of(const Atom& a) {
    AtomKey k{a.peer, a.relation, {}};
    for (const auto& t : a.args) {
        k.pattern.emplace_back(t.is_var() ? 0 : 1, t.is_var() ? std::string() : t.text());
    }
    return k;
}

// Term encoded relative to a variable numbering; compares numerically.
struct CodedTerm {
    int tag;  // 0 = variable, 1 = constant
    std::int64_t vid;
    std::string cval;
    auto operator<=>(const CodedTerm&) const = default;
};

using CodedAtom = std::vector<CodedTerm>;  // peer/relation handled by group order

struct Labeling {
    std::map<std::string, std::int64_t> ids;
    std::int64_t next = 0;

    std::int64_t id_of(const std::string& v) {
        auto it = ids.find(v);
        if (it != ids.end()) return it->second;
        ids[v] = next;
        return next++;
    }
    CodedTerm code(const Term& t) {
        if (t.is_const()) return {1, 0, t.text()};
        return {0, id_of(t.text()), {}};
    }
    // Codes without mutating: unseen variables get provisional ids in
    // positional order starting at `next`.
    CodedAtom preview(const Atom& a) const {
        Labeling copy = *this;
        CodedAtom out;
        for (const auto& t : a.args) out.push_back(copy.code(t));
        return out;
    }
    void commit(const Atom& a) {
        for (const auto& t : a.args) code(t);
    }
};

struct CanonicalResult {
    std::vector<std::size_t> order;                 // atom indices in canonical order
    std::map<std::string, std::string> rename;      // original var -> vN
};

// Chooses the atom order and variable numbering that minimize the coded
// (atoms, predicates) sequence. Head variables are numbered first, so the
// result is invariant under input atom order and variable naming.
CanonicalResult canonical_labeling(const std::vector<Term>& head,
                                   const std::vector<Atom>& atoms,
                                   const std::vector<Predicate>& preds) {
    // Group atom indices by rename-invariant key.
    std::map<AtomKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < atoms.size(); ++i) groups[key_of(atoms[i])].push_back(i);

    Labeling base;
    for (const auto& t : head) {
        if (t.is_var()) base.id_of(t.text());
    }

    struct Best {
        bool set = false;
        std::vector<CodedAtom> atoms;
        std::vector<std::vector<CodedTerm>> preds;
        std::vector<std::size_t> order;
        Labeling labeling;
    } best;

    std::vector<std::pair<AtomKey, std::vector<std::size_t>>> group_list(groups.begin(), groups.end());

    std::vector<std::size_t> order;
    std::vector<CodedAtom> coded;

    std::function<void(std::size_t, std::vector<std::size_t>, Labeling)> walk =
        [&](std::size_t gi, std::vector<std::size_t> remaining, Labeling lab) {
            if (gi == group_list.size()) {
                // Code predicates under this labeling, sorted.
                std::vector<std::vector<CodedTerm>> cpreds;
                Labeling plab = lab;
                for (const auto& p : preds) {
                    std::vector<CodedTerm> cp;
                    cp.push_back(plab.code(Term::var(p.var)));
                    cp.push_back({2 + (p.op == PredOp::neq ? 1 : 0), 0, {}});
                    cp.push_back(plab.code(p.rhs));
                    cpreds.push_back(std::move(cp));
                }
                std::sort(cpreds.begin(), cpreds.end());
                if (!best.set || std::tie(coded, cpreds) < std::tie(best.atoms, best.preds)) {
                    best.set = true;
                    best.atoms = coded;
                    best.preds = cpreds;
                    best.order = order;
                    best.labeling = plab;
                }
                return;
            }
            if (remaining.empty()) {
                remaining = group_list[gi].second;
            }
            // Pick the minimal next atom under the current labeling; branch
            // on ties (they can differ in later effects).
            CodedAtom min_code;
            std::vector<std::size_t> picks;
            for (std::size_t idx : remaining) {
                CodedAtom c = lab.preview(atoms[idx]);
                if (picks.empty() || c < min_code) {
                    min_code = c;
                    picks = {idx};
                } else if (c == min_code) {
                    picks.push_back(idx);
                }
            }
            for (std::size_t pick : picks) {
                Labeling lab2 = lab;
                lab2.commit(atoms[pick]);
                order.push_back(pick);
                coded.push_back(min_code);
                std::vector<std::size_t> rest;
                for (std::size_t idx : remaining) {
                    if (idx != pick) rest.push_back(idx);
                }
                if (rest.empty()) {
                    walk(gi + 1, {}, lab2);
                } else {
                    walk(gi, rest, lab2);
                }
                order.pop_back();
                coded.pop_back();
            }
        };

    if (group_list.empty()) {
        walk(0, {}, base);
    } else {
        walk(0, group_list.front().second, base);
    }

    CanonicalResult res;
    res.order = best.order;
    // Also number any predicate-only variables (possible in rule bodies where
    // a pin survives on a variable outside the atom list; queries anchor all
    // predicate variables in head or body).
    for (const auto& [v, id] : best.labeling.ids) {
        res.rename[v] = "v" + std::to_string(id);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Disjunct normalization
// ---------------------------------------------------------------------------

bool pred_less(const Predicate& a, const Predicate& b) {
    auto num = [](const std::string& v) {
        // canonical names vN sort numerically
        if (v.size() > 1 && v[0] == 'v') {
            bool digits = true;
            for (std::size_t i = 1; i < v.size(); ++i) digits = digits && std::isdigit((unsigned char)v[i]);
            if (digits) return std::pair<int, std::string>(std::stoi(v.substr(1)), std::string());
        }
        return std::pair<int, std::string>(INT32_MAX, v);
    };
    return std::tuple(num(a.var), a.op, a.rhs) < std::tuple(num(b.var), b.op, b.rhs);
}

Disjunct normalize_constants(const Disjunct& in) {
    Disjunct d = in;

    // Resolve variable-variable equalities by unification.
    VarUnion uf;
    std::vector<Predicate> kept;
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::eq && p.rhs.is_var()) {
            uf.unite(p.var, p.rhs.text());
        } else {
            kept.push_back(p);
        }
    }
    d.predicates = std::move(kept);
    subst_disjunct(uf.to_subst(), d);

    // Lift constants out of the head and out of atom arguments.
    std::size_t fresh = 0;
    auto lift = [&](Term& t) {
        if (t.is_const()) {
            std::string v = "~c" + std::to_string(fresh++);
            d.predicates.push_back({v, PredOp::eq, t});
            t = Term::var(v);
        }
    };
    for (auto& t : d.head) lift(t);
    for (auto& a : d.body) {
        for (auto& t : a.args) lift(t);
    }

    // Collapse variables pinned to the same constant. Variables pinned to
    // two different constants (unsatisfiable) are left alone so the form
    // stays stable.
    std::map<std::string, std::set<std::string>> pins;
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::eq && p.rhs.is_const()) pins[p.var].insert(p.rhs.text());
    }
    std::map<std::string, std::vector<std::string>> by_value;
    for (const auto& [v, cs] : pins) {
        if (cs.size() == 1) by_value[*cs.begin()].push_back(v);
    }
    VarUnion merge;
    for (const auto& [value, vars] : by_value) {
        for (std::size_t i = 1; i < vars.size(); ++i) merge.unite(vars[0], vars[i]);
    }
    subst_disjunct(merge.to_subst(), d);

    // Drop NEQ predicates made vacuous by a pin; recompute pins after the
    // merge so representatives are consistent.
    pins.clear();
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::eq && p.rhs.is_const()) pins[p.var].insert(p.rhs.text());
    }
    std::vector<Predicate> cleaned;
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::neq) {
            auto it = pins.find(p.var);
            if (it != pins.end() && it->second.size() == 1 && *it->second.begin() != p.rhs.text()) {
                continue;
            }
        }
        cleaned.push_back(p);
    }
    std::sort(cleaned.begin(), cleaned.end());
    cleaned.erase(std::unique(cleaned.begin(), cleaned.end()), cleaned.end());
    d.predicates = std::move(cleaned);

    // Duplicate atoms contribute nothing under set semantics.
    std::vector<Atom> atoms;
    for (const auto& a : d.body) {
        if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(a);
    }
    d.body = std::move(atoms);
    return d;
}

}  // namespace

Disjunct canonicalize_disjunct(const Disjunct& in) {
    Disjunct d = normalize_constants(in);

    CanonicalResult lab = canonical_labeling(d.head, d.body, d.predicates);

    Subst rename;
    for (const auto& [from, to] : lab.rename) rename[from] = Term::var(to);

    Disjunct out;
    out.head = d.head;
    for (auto& t : out.head) t = subst_term(rename, t);
    for (std::size_t idx : lab.order) {
        Atom a = d.body[idx];
        for (auto& t : a.args) t = subst_term(rename, t);
        out.body.push_back(std::move(a));
    }
    for (const auto& p : d.predicates) {
        Term lhs = subst_term(rename, Term::var(p.var));
        out.predicates.push_back({lhs.text(), p.op, subst_term(rename, p.rhs)});
    }
    std::sort(out.predicates.begin(), out.predicates.end(), pred_less);
    out.predicates.erase(std::unique(out.predicates.begin(), out.predicates.end()),
                         out.predicates.end());
    return out;
}

Query canonicalize(const Query& q) {
    validate_query_shape(q);
    std::vector<Disjunct> ds;
    for (const auto& d : q.disjuncts) ds.push_back(canonicalize_disjunct(d));
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    return Query{std::move(ds)};
}

bool query_equal(const Query& a, const Query& b) {
    if (a.arity() != b.arity()) {
        throw ValidationError("cannot compare queries of different arity (" +
                              std::to_string(a.arity()) + " vs " + std::to_string(b.arity()) + ")");
    }
    return canonicalize(a) == canonicalize(b);
}

bool rule_equal(const GavRule& a, const GavRule& b) {
    if (a.head.peer != b.head.peer || a.head.relation != b.head.relation) return false;
    auto as_disjunct = [](const GavRule& r) {
        Disjunct d;
        d.head = r.head.args;
        d.body = r.body;
        d.predicates = r.predicates;
        return canonicalize_disjunct(d);
    };
    return as_disjunct(a) == as_disjunct(b);
}

Skeleton skeleton_of(const Disjunct& d) {
    CanonicalResult lab = canonical_labeling(d.head, d.body, {});

    Subst rename;
    for (const auto& [from, to] : lab.rename) rename[from] = Term::var(to);

    Skeleton s;
    s.head = d.head;
    for (auto& t : s.head) t = subst_term(rename, t);
    for (std::size_t idx : lab.order) {
        Atom a = d.body[idx];
        for (auto& t : a.args) t = subst_term(rename, t);
        s.body.push_back(std::move(a));
    }
    s.rename = lab.rename;
    return s;
}

}  // namespace pdms
