#include "pdms/parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace pdms {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
    ident,
    string,
    lbrace,
    rbrace,
    lparen,
    rparen,
    comma,
    dot,
    colon,
    colon_dash,  // :-
    at,
    eq,
    neq,         // != or ≠
    arrow,       // <-
    arrow_both,  // <->
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    SourceSpan span;
};

bool ident_start(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_rest(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '%' ||
           c == '-';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }
    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& message, const Token& at) const {
        throw ParseError(message + " at line " + std::to_string(at.span.line) + ", column " +
                             std::to_string(at.span.column),
                         at.span);
    }

private:
    void advance() {
        skip_ws();
        Token t;
        t.span = here(0);
        if (pos_ >= text_.size()) {
            t.kind = Tok::end;
            current_ = t;
            return;
        }
        const char c = text_[pos_];
        auto single = [&](Tok k, std::size_t len) {
            t.kind = k;
            t.text = std::string(text_.substr(pos_, len));
            t.span.length = len;
            consume(len);
        };
        if (c == '{') return set(single, t, Tok::lbrace, 1);
        if (c == '}') return set(single, t, Tok::rbrace, 1);
        if (c == '(') return set(single, t, Tok::lparen, 1);
        if (c == ')') return set(single, t, Tok::rparen, 1);
        if (c == ',') return set(single, t, Tok::comma, 1);
        if (c == '.') return set(single, t, Tok::dot, 1);
        if (c == '@') return set(single, t, Tok::at, 1);
        if (c == '=') return set(single, t, Tok::eq, 1);
        if (c == ':') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') return set(single, t, Tok::colon_dash, 2);
            return set(single, t, Tok::colon, 1);
        }
        if (c == '!') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') return set(single, t, Tok::neq, 2);
            throw ParseError("unexpected character '!'", t.span);
        }
        if (c == '<') {
            if (text_.substr(pos_, 3) == "<->") return set(single, t, Tok::arrow_both, 3);
            if (text_.substr(pos_, 2) == "<-") return set(single, t, Tok::arrow, 2);
            throw ParseError("unexpected character '<'", t.span);
        }
        // UTF-8 "≠"
        if (static_cast<unsigned char>(c) == 0xE2 && pos_ + 2 < text_.size() &&
            static_cast<unsigned char>(text_[pos_ + 1]) == 0x89 &&
            static_cast<unsigned char>(text_[pos_ + 2]) == 0xA0) {
            return set(single, t, Tok::neq, 3);
        }
        if (c == '"') {
            std::string value;
            std::size_t i = pos_ + 1;
            while (i < text_.size() && text_[i] != '"') {
                if (text_[i] == '\\' && i + 1 < text_.size()) {
                    value.push_back(text_[i + 1]);
                    i += 2;
                } else {
                    value.push_back(text_[i]);
                    ++i;
                }
            }
            if (i >= text_.size()) throw ParseError("unterminated string literal", t.span);
            t.kind = Tok::string;
            t.text = value;
            t.span.length = i + 1 - pos_;
            consume(i + 1 - pos_);
            current_ = t;
            return;
        }
        if (ident_start(c)) {
            std::size_t i = pos_;
            while (i < text_.size() && ident_rest(text_[i])) ++i;
            t.kind = Tok::ident;
            t.text = std::string(text_.substr(pos_, i - pos_));
            t.span.length = i - pos_;
            consume(i - pos_);
            current_ = t;
            return;
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", t.span);
    }

    template <typename F>
    void set(F&& single, Token& t, Tok k, std::size_t len) {
        single(k, len);
        current_ = t;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') consume(1);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                consume(1);
            } else {
                break;
            }
        }
    }

    SourceSpan here(std::size_t len) const { return {line_, col_, pos_, len}; }

    void consume(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    Token current_;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_keyword(const Token& t, std::string_view kw) {
    return t.kind == Tok::ident && lower(t.text) == kw;
}

// ---------------------------------------------------------------------------
// Shared parsing machinery
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    Scenario parse_scenario_document() {
        Scenario sc;
        SourceSpan start = lex_.peek().span;
        while (lex_.peek().kind != Tok::end) {
            Token t = lex_.take();
            if (t.kind != Tok::ident) lex_.fail("expected a declaration (peer, mapping, data, query)", t);
            const std::string kw = lower(t.text);
            if (kw == "peer") {
                parse_peer(sc);
            } else if (kw == "mapping") {
                parse_mapping(sc);
            } else if (kw == "data") {
                parse_data(sc);
            } else if (kw == "query") {
                parse_query_decl(sc);
            } else {
                lex_.fail("unknown declaration '" + t.text + "' (expected peer, mapping, data, or query)", t);
            }
        }
        if (sc.network.peers.empty()) {
            throw ParseError("no peers declared", start);
        }
        auto diags = validate_network(sc.network);
        if (!diags.empty()) {
            throw ParseError(diags.front().code + ": " + diags.front().message, start);
        }
        return sc;
    }

    GavRule parse_single_rule(const PeerNetwork& net) {
        GavRule r = parse_rule_body(std::nullopt, std::nullopt);
        if (lex_.peek().kind == Tok::dot) lex_.take();
        expect(Tok::end, "end of rule");
        try {
            check_rule_semantics(net, r, true);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), SourceSpan{});
        }
        return r;
    }

    Query parse_single_query(const PeerSchema& peer) {
        Query q = parse_sql(peer, /*stop_at_rbrace=*/false);
        expect(Tok::end, "end of query");
        return q;
    }

private:
    // ---- scenario declarations ----

    void parse_peer(Scenario& sc) {
        Token name = expect(Tok::ident, "peer name");
        if (sc.network.find_peer(name.text)) lex_.fail("peer " + name.text + " already declared", name);
        PeerSchema peer;
        peer.peer_id = name.text;
        expect(Tok::lbrace, "'{'");
        while (lex_.peek().kind != Tok::rbrace) {
            Token t = lex_.take();
            bool is_virtual = false;
            if (is_keyword(t, "virtual")) {
                is_virtual = true;
                t = lex_.take();
            }
            if (!is_keyword(t, "relation")) lex_.fail("expected 'relation'", t);
            Token rel_name = expect(Tok::ident, "relation name");
            RelationSchema rel;
            rel.name = rel_name.text;
            expect(Tok::lparen, "'('");
            while (true) {
                Token attr = expect(Tok::ident, "attribute name");
                rel.attributes.push_back(attr.text);
                if (lex_.peek().kind == Tok::comma) {
                    lex_.take();
                    continue;
                }
                break;
            }
            expect(Tok::rparen, "')'");
            if (peer.find_relation(rel.name)) {
                lex_.fail("relation " + rel.name + " already declared in peer " + peer.peer_id, rel_name);
            }
            peer.relations.push_back(std::move(rel));
            if (is_virtual) peer.virtual_relations.insert(rel_name.text);
        }
        lex_.take();  // }
        sc.network.peers.push_back(std::move(peer));
    }

    void parse_mapping(Scenario& sc) {
        Token a = expect(Tok::ident, "peer name");
        Token arrow = lex_.take();
        if (arrow.kind != Tok::arrow && arrow.kind != Tok::arrow_both) {
            lex_.fail("expected '<-' or '<->' between mapping peers", arrow);
        }
        Token b = expect(Tok::ident, "peer name");
        for (const Token* t : {&a, &b}) {
            if (!sc.network.find_peer(t->text)) lex_.fail("unknown peer " + t->text, *t);
        }
        if (sc.network.find_mapping(a.text, b.text)) {
            lex_.fail("mapping between " + a.text + " and " + b.text + " already declared", a);
        }
        Mapping m;
        m.peer_a = a.text;
        m.peer_b = b.text;
        const bool directed = arrow.kind == Tok::arrow;
        expect(Tok::lbrace, "'{'");
        while (lex_.peek().kind != Tok::rbrace) {
            Token at = lex_.peek();
            GavRule r = directed
                            ? parse_rule_body(a.text, b.text)
                            : parse_rule_body(std::nullopt, std::nullopt, std::make_pair(a.text, b.text));
            expect(Tok::dot, "'.' after rule");
            try {
                check_rule_semantics(sc.network, r, false);
            } catch (const ValidationError& e) {
                lex_.fail(e.what(), at);
            }
            if (!m.connects(r.head.peer, r.body_peer())) {
                lex_.fail("rule connects " + r.head.peer + " and " + r.body_peer() +
                              ", not the mapping's peers",
                          at);
            }
            m.rules.push_back(std::move(r));
        }
        lex_.take();  // }
        sc.network.mappings.push_back(std::move(m));
    }

    void parse_data(Scenario& sc) {
        Token peer = expect(Tok::ident, "peer name");
        expect(Tok::dot, "'.'");
        Token rel = expect(Tok::ident, "relation name");
        const PeerSchema* ps = sc.network.find_peer(peer.text);
        if (!ps) lex_.fail("unknown peer " + peer.text, peer);
        const RelationSchema* rs = ps->find_relation(rel.text);
        if (!rs) lex_.fail("unknown relation " + peer.text + "." + rel.text, rel);
        if (ps->is_virtual(rel.text)) {
            lex_.fail("virtual relation " + peer.text + "." + rel.text + " cannot hold data", rel);
        }
        expect(Tok::lbrace, "'{'");
        while (lex_.peek().kind != Tok::rbrace) {
            Token open = expect(Tok::lparen, "'('");
            Tuple tuple;
            while (true) {
                Token v = expect(Tok::string, "quoted constant");
                tuple.push_back(v.text);
                if (lex_.peek().kind == Tok::comma) {
                    lex_.take();
                    continue;
                }
                break;
            }
            expect(Tok::rparen, "')'");
            if (tuple.size() != rs->arity()) {
                lex_.fail("tuple of width " + std::to_string(tuple.size()) + " supplied for " +
                              std::to_string(rs->arity()) + "-attribute " + peer.text + "." + rel.text,
                          open);
            }
            sc.instance.add(peer.text, rel.text, std::move(tuple));
        }
        lex_.take();  // }
    }

    void parse_query_decl(Scenario& sc) {
        Token name = expect(Tok::ident, "query name");
        if (sc.find_query(name.text)) lex_.fail("query " + name.text + " already declared", name);
        expect(Tok::at, "'@'");
        Token peer = expect(Tok::ident, "peer name");
        const PeerSchema* ps = sc.network.find_peer(peer.text);
        if (!ps) lex_.fail("unknown peer " + peer.text, peer);
        expect(Tok::lbrace, "'{'");
        Query q = parse_sql(*ps, /*stop_at_rbrace=*/true);
        expect(Tok::rbrace, "'}'");
        sc.queries.push_back({name.text, peer.text, std::move(q)});
    }

    // ---- rules ----

    // default_head/default_body: implied qualifiers for `A <- B` blocks.
    // both_peers: for `A <-> B` blocks the head must be qualified and the
    // body defaults to the opposite side.
    GavRule parse_rule_body(std::optional<std::string> default_head,
                            std::optional<std::string> default_body,
                            std::optional<std::pair<std::string, std::string>> both_peers = std::nullopt) {
        GavRule r;
        Token head_tok = lex_.peek();
        r.head = parse_atom(default_head);
        if (both_peers) {
            if (r.head.peer.empty()) {
                lex_.fail("rule heads in a '<->' mapping block must name their peer", head_tok);
            }
            const auto& [pa, pb] = *both_peers;
            if (r.head.peer == pa) {
                default_body = pb;
            } else if (r.head.peer == pb) {
                default_body = pa;
            } else {
                lex_.fail("rule head over " + r.head.peer + " does not belong to this mapping", head_tok);
            }
        }
        if (r.head.peer.empty()) lex_.fail("rule head must name its peer", head_tok);
        expect(Tok::colon_dash, "':-'");
        while (true) {
            Token t = lex_.peek();
            if (t.kind != Tok::ident) lex_.fail("expected an atom or a predicate", t);
            // Lookahead decides between atom and predicate.
            Token first = lex_.take();
            Tok next = lex_.peek().kind;
            if (next == Tok::eq || next == Tok::neq) {
                Token op = lex_.take();
                Token rhs = lex_.take();
                if (rhs.kind == Tok::string) {
                    r.predicates.push_back({first.text,
                                            op.kind == Tok::eq ? PredOp::eq : PredOp::neq,
                                            Term::constant(rhs.text)});
                } else if (rhs.kind == Tok::ident) {
                    if (op.kind == Tok::neq) {
                        lex_.fail("'!=' between two variables is not supported", op);
                    }
                    r.predicates.push_back({first.text, PredOp::eq, Term::var(rhs.text)});
                } else {
                    lex_.fail("expected a variable or quoted constant after the comparison", rhs);
                }
            } else {
                Atom a = parse_atom_after_name(first, default_body);
                r.body.push_back(std::move(a));
            }
            if (lex_.peek().kind == Tok::comma) {
                lex_.take();
                continue;
            }
            break;
        }
        // Explicit x = y body terms normalize to variable reuse.
        std::map<std::string, std::string> alias;
        std::vector<Predicate> preds;
        for (const auto& p : r.predicates) {
            if (p.op == PredOp::eq && p.rhs.is_var()) {
                alias[std::max(p.var, p.rhs.text())] = std::min(p.var, p.rhs.text());
            } else {
                preds.push_back(p);
            }
        }
        if (!alias.empty()) {
            auto res = [&](const std::string& v) {
                std::string cur = v;
                auto it = alias.find(cur);
                while (it != alias.end()) {
                    cur = it->second;
                    it = alias.find(cur);
                }
                return cur;
            };
            auto fix = [&](Atom& a) {
                for (auto& t : a.args) {
                    if (t.is_var()) t = Term::var(res(t.text()));
                }
            };
            fix(r.head);
            for (auto& a : r.body) fix(a);
            for (auto& p : preds) {
                p.var = res(p.var);
                if (p.rhs.is_var()) p.rhs = Term::var(res(p.rhs.text()));
            }
        }
        r.predicates = std::move(preds);
        return r;
    }

    Atom parse_atom(std::optional<std::string> default_peer) {
        Token first = expect(Tok::ident, "atom");
        return parse_atom_after_name(first, default_peer);
    }

    Atom parse_atom_after_name(Token first, std::optional<std::string> default_peer) {
        Atom a;
        Token rel = first;
        if (lex_.peek().kind == Tok::colon) {
            lex_.take();
            a.peer = first.text;
            rel = expect(Tok::ident, "relation name");
        } else if (default_peer) {
            a.peer = *default_peer;
        }
        a.relation = rel.text;
        expect(Tok::lparen, "'('");
        while (true) {
            Token t = lex_.take();
            if (t.kind == Tok::string) {
                a.args.push_back(Term::constant(t.text));
            } else if (t.kind == Tok::ident) {
                a.args.push_back(Term::var(t.text));
            } else {
                lex_.fail("expected a variable or quoted constant", t);
            }
            if (lex_.peek().kind == Tok::comma) {
                lex_.take();
                continue;
            }
            break;
        }
        expect(Tok::rparen, "')'");
        return a;
    }

    void check_rule_semantics(const PeerNetwork& net, const GavRule& r, bool standalone) {
        Mapping m;
        m.peer_a = r.head.peer;
        m.peer_b = r.body_peer();
        m.rules.push_back(r);
        std::vector<Diagnostic> diags;
        {
            PeerNetwork tmp = net;
            tmp.mappings.clear();
            tmp.mappings.push_back(m);
            diags = validate_network(tmp);
        }
        for (const auto& d : diags) {
            if (d.code == "duplicate-mapping") continue;
            throw ValidationError(d.message);
        }
        if (standalone && r.head.peer == r.body_peer()) {
            throw ValidationError("rule head and body must be over different peers");
        }
    }

    // ---- SQL ----

    struct Slot {
        std::size_t atom;
        std::size_t pos;
    };

    Query parse_sql(const PeerSchema& peer, bool stop_at_rbrace) {
        Query q;
        while (true) {
            q.disjuncts.push_back(parse_sql_block(peer, stop_at_rbrace));
            if (is_keyword(lex_.peek(), "union")) {
                lex_.take();
                continue;
            }
            break;
        }
        for (const auto& d : q.disjuncts) {
            if (d.head.size() != q.disjuncts.front().head.size()) {
                lex_.fail("UNION blocks disagree on the number of selected items", lex_.peek());
            }
        }
        return q;
    }

    Disjunct parse_sql_block(const PeerSchema& peer, bool stop_at_rbrace) {
        Token sel = lex_.take();
        if (!is_keyword(sel, "select")) lex_.fail("expected SELECT", sel);

        struct Item {
            bool is_literal;
            std::string value;       // literal text
            Token ref_name;          // attribute or relation token
            std::optional<Token> ref_attr;
        };
        std::vector<Item> items;
        while (true) {
            Token t = lex_.take();
            if (t.kind == Tok::string) {
                items.push_back({true, t.text, {}, std::nullopt});
            } else if (t.kind == Tok::ident) {
                Item it{false, "", t, std::nullopt};
                if (lex_.peek().kind == Tok::dot) {
                    lex_.take();
                    it.ref_attr = expect(Tok::ident, "attribute name");
                }
                items.push_back(std::move(it));
            } else {
                lex_.fail("expected an attribute, rel.attr, or quoted literal in SELECT", t);
            }
            if (lex_.peek().kind == Tok::comma) {
                lex_.take();
                continue;
            }
            break;
        }

        Token from = lex_.take();
        if (!is_keyword(from, "from")) lex_.fail("expected FROM", from);

        Disjunct d;
        std::vector<const RelationSchema*> schemas;
        while (true) {
            Token rel = expect(Tok::ident, "relation name");
            const RelationSchema* rs = peer.find_relation(rel.text);
            if (!rs) lex_.fail("unknown relation " + peer.peer_id + "." + rel.text, rel);
            Atom a;
            a.peer = peer.peer_id;
            a.relation = rs->name;
            const std::size_t atom_idx = d.body.size();
            for (std::size_t i = 0; i < rs->arity(); ++i) {
                a.args.push_back(Term::var("~q" + std::to_string(atom_idx) + "_" + std::to_string(i)));
            }
            d.body.push_back(std::move(a));
            schemas.push_back(rs);
            if (lex_.peek().kind == Tok::comma) {
                lex_.take();
                continue;
            }
            break;
        }

        auto resolve = [&](const Token& name, const std::optional<Token>& attr) -> Slot {
            if (attr) {
                std::size_t rel_count = 0;
                std::optional<Slot> found;
                for (std::size_t i = 0; i < schemas.size(); ++i) {
                    if (schemas[i]->name != name.text) continue;
                    ++rel_count;
                    auto idx = schemas[i]->attribute_index(attr->text);
                    if (idx) found = Slot{i, *idx};
                }
                if (rel_count == 0) lex_.fail("relation " + name.text + " is not listed in FROM", name);
                if (rel_count > 1) {
                    lex_.fail("ambiguous reference " + name.text + "." + attr->text +
                                  " (relation occurs more than once in FROM)",
                              name);
                }
                if (!found) lex_.fail("unknown attribute " + name.text + "." + attr->text, *attr);
                return *found;
            }
            std::optional<Slot> found;
            bool ambiguous = false;
            for (std::size_t i = 0; i < schemas.size(); ++i) {
                auto idx = schemas[i]->attribute_index(name.text);
                if (idx) {
                    if (found) ambiguous = true;
                    found = Slot{i, *idx};
                }
            }
            if (!found) lex_.fail("unknown attribute " + name.text, name);
            if (ambiguous) {
                lex_.fail("ambiguous unqualified attribute " + name.text +
                              " (qualify it as rel.attr)",
                          name);
            }
            return *found;
        };

        auto var_at = [&](Slot s) { return d.body[s.atom].args[s.pos].text(); };

        for (const auto& it : items) {
            if (it.is_literal) {
                d.head.push_back(Term::constant(it.value));
            } else {
                d.head.push_back(Term::var(var_at(resolve(it.ref_name, it.ref_attr))));
            }
        }

        std::map<std::string, std::string> alias;
        std::function<std::string(std::string)> rep = [&](std::string v) {
            auto i = alias.find(v);
            while (i != alias.end()) {
                v = i->second;
                i = alias.find(v);
            }
            return v;
        };

        if (is_keyword(lex_.peek(), "where")) {
            lex_.take();
            while (true) {
                Token lhs = lex_.take();
                if (lhs.kind == Tok::string) {
                    lex_.fail("the left side of a condition must be an attribute reference", lhs);
                }
                if (lhs.kind != Tok::ident) lex_.fail("expected an attribute reference", lhs);
                std::optional<Token> lhs_attr;
                if (lex_.peek().kind == Tok::dot) {
                    lex_.take();
                    lhs_attr = expect(Tok::ident, "attribute name");
                }
                Token op = lex_.take();
                if (op.kind != Tok::eq && op.kind != Tok::neq) {
                    lex_.fail("expected '=', '!=', or '≠'", op);
                }
                Slot ls = resolve(lhs, lhs_attr);
                Token rhs = lex_.take();
                if (rhs.kind == Tok::string) {
                    d.predicates.push_back({var_at(ls),
                                            op.kind == Tok::eq ? PredOp::eq : PredOp::neq,
                                            Term::constant(rhs.text)});
                } else if (rhs.kind == Tok::ident) {
                    if (op.kind == Tok::neq) {
                        lex_.fail("'!=' between two attributes is not supported", op);
                    }
                    std::optional<Token> rhs_attr;
                    if (lex_.peek().kind == Tok::dot) {
                        lex_.take();
                        rhs_attr = expect(Tok::ident, "attribute name");
                    }
                    Slot rs = resolve(rhs, rhs_attr);
                    std::string a = rep(var_at(ls)), b = rep(var_at(rs));
                    if (a != b) alias[std::max(a, b)] = std::min(a, b);
                } else {
                    lex_.fail("expected an attribute reference or quoted literal", rhs);
                }
                if (is_keyword(lex_.peek(), "and")) {
                    lex_.take();
                    continue;
                }
                break;
            }
        }

        Token tail = lex_.peek();
        const bool ok_end = tail.kind == Tok::end || (stop_at_rbrace && tail.kind == Tok::rbrace) ||
                            is_keyword(tail, "union");
        if (!ok_end) {
            lex_.fail("unsupported construct '" + tail.text +
                          "' (supported: SELECT items FROM relations [WHERE cond [AND cond]...] "
                          "[UNION ...]; no GROUP BY, ORDER BY, JOIN, aliases, or subqueries)",
                      tail);
        }

        if (!alias.empty()) {
            for (auto& a : d.body) {
                for (auto& t : a.args) {
                    if (t.is_var()) t = Term::var(rep(t.text()));
                }
            }
            for (auto& t : d.head) {
                if (t.is_var()) t = Term::var(rep(t.text()));
            }
            for (auto& p : d.predicates) p.var = rep(p.var);
        }
        return d;
    }

    Token expect(Tok kind, const std::string& what) {
        Token t = lex_.take();
        if (t.kind != kind) {
            lex_.fail("expected " + what + (t.text.empty() ? "" : ", got '" + t.text + "'"), t);
        }
        return t;
    }

    Lexer lex_;
};

}  // namespace

const Scenario::NamedQuery* Scenario::find_query(std::string_view name) const {
    for (const auto& q : queries) {
        if (q.name == name) return &q;
    }
    return nullptr;
}

Scenario parse_scenario(std::string_view text) {
    Parser p(text);
    return p.parse_scenario_document();
}

Query parse_query_sql(std::string_view text, const PeerSchema& peer) {
    Parser p(text);
    Query q = p.parse_single_query(peer);
    validate_query_shape(q);
    return q;
}

GavRule parse_rule(std::string_view text, const PeerNetwork& net) {
    Parser p(text);
    return p.parse_single_rule(net);
}

}  // namespace pdms
