#include "pdms/propagation.hpp"

#include "pdms/canonical.hpp"
#include "pdms/parser.hpp"
#include "pdms/render.hpp"
#include "pdms/serialize.hpp"

#include "../support/fixture.hpp"

#include <doctest.h>

using namespace pdms;

namespace {

struct Recovered {
    Scenario sc;
    PeerNetwork net;
    ComplementSpec spec;
};

Recovered recovered_fixture() {
    Recovered r{testsupport::load_fixture(), {}, {}};
    RecoveryResult rec = track_and_replace(r.sc.find_query("Q1")->query, r.sc.network, "9DC", "H");
    REQUIRE(rec.spec.has_value());
    r.net = rec.network;
    r.spec = *rec.spec;
    return r;
}

}  // namespace

TEST_CASE("edit distance and similarity basics") {
    CHECK(edit_distance("skill", "class") == 5);
    CHECK(edit_distance("pid", "sid") == 1);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(name_similarity("Staff", "staff") == doctest::Approx(1.0));
    CHECK(name_similarity("pid", "sid") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("transitive candidates at LH are the three mapped relations") {
    Recovered r = recovered_fixture();
    auto cands = transitive_candidates(r.net, "9DC", "SkilledPerson", "H", "LH");
    CHECK(cands == std::set<std::string>{"InAmbulance", "Schedule", "Staff"});

    // The host can be inferred when unique.
    CHECK(transitive_candidates(r.net, "9DC", "SkilledPerson", "LH") == cands);
}

TEST_CASE("a neighbor sharing no relation yields no candidates") {
    Recovered r = recovered_fixture();
    CHECK(transitive_candidates(r.net, "9DC", "SkilledPerson", "H", "FS").empty());
}

TEST_CASE("a single-relation mapping yields a singleton candidate set") {
    PeerNetwork net;
    net.peers.push_back({"P1", {{"Src", {"id", "cat"}}}, {}});
    net.peers.push_back({"Hst", {{"Mid", {"id", "cat"}}}, {}});
    net.peers.push_back({"N", {{"Only", {"id", "cat"}}}, {}});
    GavRule r1;
    r1.head = {"P1", "Src", {Term::var("x"), Term::var("c")}};
    r1.body.push_back({"Hst", "Mid", {Term::var("x"), Term::var("c")}});
    GavRule r2;
    r2.head = {"Hst", "Mid", {Term::var("x"), Term::var("c")}};
    r2.body.push_back({"N", "Only", {Term::var("x"), Term::var("c")}});
    net.mappings.push_back({"P1", "Hst", {r1}});
    net.mappings.push_back({"Hst", "N", {r2}});

    auto cands = transitive_candidates(net, "P1", "Src", "Hst", "N");
    CHECK(cands == std::set<std::string>{"Only"});
    MatchResult m = schema_match(*net.find_relation("P1", "Src"), {*net.find_relation("N", "Only")});
    CHECK(m.relation.name == "Only");
}

TEST_CASE("schema matching selects Staff with both correspondences") {
    Recovered r = recovered_fixture();
    const PeerSchema* lh = r.net.find_peer("LH");
    std::vector<RelationSchema> cands;
    for (const auto& name : {"InAmbulance", "Schedule", "Staff"}) {
        cands.push_back(*lh->find_relation(name));
    }
    auto evidence = correspondence_evidence(r.net, "9DC", "SkilledPerson", "H", "LH");
    MatchResult m = schema_match(*r.net.find_relation("9DC", "SkilledPerson"), cands, evidence);
    CHECK(m.relation.name == "Staff");
    REQUIRE(m.correspondences.size() == 2);
    CHECK(m.correspondences[0].source_attr == "PID");
    CHECK(m.correspondences[0].candidate_attr == "SID");
    CHECK(m.correspondences[0].provenance == AttributeCorrespondence::Provenance::shared_variable);
    CHECK(m.correspondences[1].source_attr == "skill");
    CHECK(m.correspondences[1].candidate_attr == "class");
    CHECK(m.correspondences[1].provenance == AttributeCorrespondence::Provenance::shared_variable);
}

TEST_CASE("an identical candidate scores 1.0") {
    RelationSchema src{"Staff", {"SID", "fn", "ln", "class"}};
    MatchResult m = schema_match(src, {src, {"Schedule", {"SID", "sstart", "send"}}});
    CHECK(m.relation.name == "Staff");
    CHECK(m.score == doctest::Approx(1.0));
}

TEST_CASE("the derived neighbor rule is the printed one") {
    Recovered r = recovered_fixture();
    const PeerSchema* lh = r.net.find_peer("LH");
    std::vector<RelationSchema> cands;
    for (const auto& name : {"InAmbulance", "Schedule", "Staff"}) {
        cands.push_back(*lh->find_relation(name));
    }
    auto evidence = correspondence_evidence(r.net, "9DC", "SkilledPerson", "H", "LH");
    MatchResult m = schema_match(*r.net.find_relation("9DC", "SkilledPerson"), cands, evidence);
    GavRule rule = derive_neighbor_rule(r.spec, m, "LH");

    GavRule expected = parse_rule(
        "H : CO_Doctor+EMT(SID, class) :- LH : Staff(SID, fn, ln, class), "
        "class != \"Doctor\", class != \"EMT\"",
        r.net);
    CHECK(rule_equal(rule, expected));
}

TEST_CASE("a missing correspondence for a restricted attribute names it") {
    Recovered r = recovered_fixture();
    MatchResult m;
    m.relation = {"Schedule", {"SID", "sstart", "send"}};
    m.correspondences.push_back(
        {"PID", "SID", AttributeCorrespondence::Provenance::shared_variable});
    try {
        derive_neighbor_rule(r.spec, m, "LH");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("skill") != std::string::npos);
    }
}

TEST_CASE("propagation over the fixture: LH verified, FH unmatched, FS skipped") {
    Recovered r = recovered_fixture();
    auto [net, outcomes] = propagate_complement(r.net, r.spec, "H", r.sc.find_query("Q1")->query);

    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].neighbor == "FH");
    CHECK(!outcomes[0].verified);
    CHECK(outcomes[0].reason.find("no correspondence") != std::string::npos);

    CHECK(outcomes[1].neighbor == "FS");
    CHECK(outcomes[1].reason == "skipped: no transitive candidates");
    CHECK(outcomes[1].candidates.empty());

    CHECK(outcomes[2].neighbor == "LH");
    CHECK(outcomes[2].verified);
    REQUIRE(outcomes[2].rule.has_value());

    // Only the verified edge gained a rule.
    CHECK(net.find_mapping("H", "LH")->rules.size() == 3);
    CHECK(net.find_mapping("H", "FH")->rules.size() == 1);
    CHECK(net.find_mapping("H", "FS")->rules.size() == 1);

    // Determinism: a second run renders byte-identical outcomes.
    auto [net2, outcomes2] = propagate_complement(r.net, r.spec, "H", r.sc.find_query("Q1")->query);
    REQUIRE(outcomes2.size() == outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        CHECK(to_json(outcomes[i]).dump() == to_json(outcomes2[i]).dump());
    }
}

TEST_CASE("after propagation the edge round-trips without loss") {
    Recovered r = recovered_fixture();
    auto [net, outcomes] = propagate_complement(r.net, r.spec, "H", r.sc.find_query("Q1")->query);
    Query q2 = unfold_forward(r.sc.find_query("Q1")->query, *net.find_mapping("9DC", "H"), "H");
    RecoveryResult again = track_and_replace(q2, net, "H", "LH");
    CHECK(again.report.empty);
    CHECK(!again.spec.has_value());
}

TEST_CASE("derived rules satisfy safety on generated two-hop chains") {
    // A chain P1 -> Hst -> N where the middle relation is discriminated on
    // one attribute; propagation should derive a safe rule and verify.
    PeerNetwork net;
    net.peers.push_back({"P1", {{"Src", {"id", "cat"}}}, {}});
    net.peers.push_back({"Hst", {{"M1", {"id", "extra"}}, {"M2", {"id", "extra"}}}, {}});
    net.peers.push_back({"N", {{"Deep", {"id", "cat", "extra"}}}, {}});

    GavRule a1;
    a1.head = {"P1", "Src", {Term::var("x"), Term::constant("one")}};
    a1.body.push_back({"Hst", "M1", {Term::var("x"), Term::var("e")}});
    GavRule a2;
    a2.head = {"P1", "Src", {Term::var("x"), Term::constant("two")}};
    a2.body.push_back({"Hst", "M2", {Term::var("x"), Term::var("e")}});
    net.mappings.push_back({"P1", "Hst", {a1, a2}});

    GavRule b1;
    b1.head = {"Hst", "M1", {Term::var("x"), Term::var("e")}};
    b1.body.push_back({"N", "Deep", {Term::var("x"), Term::constant("one"), Term::var("e")}});
    GavRule b2;
    b2.head = {"Hst", "M2", {Term::var("x"), Term::var("e")}};
    b2.body.push_back({"N", "Deep", {Term::var("x"), Term::constant("two"), Term::var("e")}});
    net.mappings.push_back({"Hst", "N", {b1, b2}});

    Disjunct d;
    d.head = {Term::var("i"), Term::var("c")};
    d.body.push_back({"P1", "Src", {Term::var("i"), Term::var("c")}});
    Query q{{d}};

    RecoveryResult rec = track_and_replace(q, net, "P1", "Hst");
    REQUIRE(rec.spec.has_value());
    auto [net2, outcomes] = propagate_complement(rec.network, *rec.spec, "Hst", q);
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].neighbor == "N");
    REQUIRE(outcomes[0].rule.has_value());
    // Head variables all come from the body.
    std::set<std::string> body_vars;
    for (const auto& t : outcomes[0].rule->body.front().args) body_vars.insert(t.text());
    for (const auto& t : outcomes[0].rule->head.args) CHECK(body_vars.count(t.text()));
}
