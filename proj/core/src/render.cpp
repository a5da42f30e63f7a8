#include "pdms/render.hpp"

#include "pdms/canonical.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace pdms {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

struct Occurrence {
    std::size_t atom;
    std::size_t pos;
};

std::string render_disjunct_sql(const Disjunct& d, const PeerSchema& peer) {
    std::set<std::string> seen_rels;
    std::vector<const RelationSchema*> schemas;
    for (const auto& a : d.body) {
        if (!seen_rels.insert(a.relation).second) {
            throw PdmsError("query is not expressible in the SQL fragment: relation " +
                            a.relation + " occurs twice in one disjunct");
        }
        const RelationSchema* rs = peer.find_relation(a.relation);
        if (!rs || rs->arity() != a.args.size()) {
            throw PdmsError("query does not match the schema of peer " + peer.peer_id);
        }
        schemas.push_back(rs);
    }

    // First occurrence of each variable and ambiguity of attribute names
    // across the FROM list decide how references are printed.
    std::map<std::string, Occurrence> first;
    std::vector<std::pair<Occurrence, Occurrence>> joins;  // later occurrence = first
    for (std::size_t i = 0; i < d.body.size(); ++i) {
        for (std::size_t j = 0; j < d.body[i].args.size(); ++j) {
            const Term& t = d.body[i].args[j];
            if (!t.is_var()) {
                throw PdmsError("query is not in canonical form (constant inside an atom)");
            }
            auto it = first.find(t.text());
            if (it == first.end()) {
                first[t.text()] = {i, j};
            } else {
                joins.push_back({{i, j}, it->second});
            }
        }
    }
    auto ambiguous = [&](const std::string& attr) {
        std::size_t n = 0;
        for (const auto* s : schemas) {
            if (s->attribute_index(attr)) ++n;
        }
        return n > 1;
    };
    auto ref = [&](Occurrence o, bool force_qualified) {
        const std::string& attr = schemas[o.atom]->attributes[o.pos];
        if (force_qualified || ambiguous(attr)) return schemas[o.atom]->name + "." + attr;
        return attr;
    };

    // Pins on head variables that never touch the body render as literals.
    std::map<std::string, std::string> pin;  // var -> constant (single EQ pins)
    std::map<std::string, int> pin_count;
    for (const auto& p : d.predicates) {
        if (p.op == PredOp::eq && p.rhs.is_const()) {
            pin[p.var] = p.rhs.text();
            ++pin_count[p.var];
        }
    }

    std::ostringstream os;
    os << "SELECT ";
    std::set<std::string> consumed_pins;
    for (std::size_t i = 0; i < d.head.size(); ++i) {
        if (i) os << ", ";
        const Term& t = d.head[i];
        if (t.is_const()) {
            os << quote(t.text());
            continue;
        }
        auto occ = first.find(t.text());
        if (occ != first.end()) {
            os << ref(occ->second, false);
        } else {
            auto p = pin.find(t.text());
            if (p == pin.end() || pin_count[t.text()] != 1) {
                throw PdmsError("head variable " + t.text() + " has no attribute and no pin");
            }
            os << quote(p->second);
            consumed_pins.insert(t.text());
        }
    }
    os << " FROM ";
    for (std::size_t i = 0; i < d.body.size(); ++i) {
        if (i) os << ", ";
        os << d.body[i].relation;
    }

    std::vector<std::string> conds;
    for (const auto& [later, first_occ] : joins) {
        conds.push_back(ref(later, true) + " = " + ref(first_occ, true));
    }
    for (const auto& p : d.predicates) {
        if (consumed_pins.count(p.var)) continue;
        auto occ = first.find(p.var);
        if (occ == first.end()) {
            throw PdmsError("predicate variable " + p.var + " has no attribute reference");
        }
        if (p.rhs.is_var()) {
            throw PdmsError("query is not in canonical form (variable equality predicate)");
        }
        conds.push_back(ref(occ->second, false) + (p.op == PredOp::eq ? " = " : " != ") +
                        quote(p.rhs.text()));
    }
    if (!conds.empty()) {
        os << " WHERE ";
        for (std::size_t i = 0; i < conds.size(); ++i) {
            if (i) os << " AND ";
            os << conds[i];
        }
    }
    return os.str();
}

}  // namespace

std::string render_query_sql(const Query& q, const PeerSchema& peer) {
    Query c = canonicalize(q);
    std::ostringstream os;
    for (std::size_t i = 0; i < c.disjuncts.size(); ++i) {
        if (i) os << "\nUNION\n";
        os << render_disjunct_sql(c.disjuncts[i], peer);
    }
    return os.str();
}

std::string render_query_datalog(const Query& q) {
    std::ostringstream os;
    for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
        const auto& d = q.disjuncts[i];
        if (i) os << "\n";
        os << "(";
        for (std::size_t j = 0; j < d.head.size(); ++j) {
            if (j) os << ", ";
            os << to_string(d.head[j]);
        }
        os << ") :- ";
        bool sep = false;
        for (const auto& a : d.body) {
            if (sep) os << ", ";
            os << to_string(a);
            sep = true;
        }
        for (const auto& p : d.predicates) {
            if (sep) os << ", ";
            os << to_string(p);
            sep = true;
        }
    }
    return os.str();
}

std::string render_rule(const GavRule& r) {
    std::ostringstream os;
    os << to_string(r.head) << " :- ";
    bool sep = false;
    for (const auto& a : r.body) {
        if (sep) os << ", ";
        os << to_string(a);
        sep = true;
    }
    for (const auto& p : r.predicates) {
        if (sep) os << ", ";
        os << to_string(p);
        sep = true;
    }
    return os.str();
}

std::string render_scenario(const Scenario& sc) {
    std::ostringstream os;
    for (const auto& p : sc.network.peers) {
        os << "peer " << p.peer_id << " {\n";
        for (const auto& r : p.relations) {
            os << "  ";
            if (p.is_virtual(r.name)) os << "virtual ";
            os << "relation " << r.name << "(";
            for (std::size_t i = 0; i < r.attributes.size(); ++i) {
                if (i) os << ", ";
                os << r.attributes[i];
            }
            os << ")\n";
        }
        os << "}\n\n";
    }
    for (const auto& m : sc.network.mappings) {
        os << "mapping " << m.peer_a << " <-> " << m.peer_b << " {\n";
        for (const auto& r : m.rules) {
            os << "  " << render_rule(r) << ".\n";
        }
        os << "}\n\n";
    }
    for (const auto& [key, tuples] : sc.instance.relations) {
        if (tuples.empty()) continue;
        os << "data " << key.first << "." << key.second << " {\n";
        for (const auto& t : tuples) {
            os << "  (";
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (i) os << ", ";
                os << quote(t[i]);
            }
            os << ")\n";
        }
        os << "}\n\n";
    }
    for (const auto& q : sc.queries) {
        const PeerSchema* peer = sc.network.find_peer(q.peer);
        os << "query " << q.name << " @ " << q.peer << " {\n";
        std::istringstream lines(render_query_sql(q.query, *peer));
        std::string line;
        while (std::getline(lines, line)) os << "  " << line << "\n";
        os << "}\n\n";
    }
    return os.str();
}

}  // namespace pdms
