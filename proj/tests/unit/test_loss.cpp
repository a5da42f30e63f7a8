#include "pdms/loss.hpp"

#include "pdms/canonical.hpp"
#include "pdms/parser.hpp"
#include "pdms/render.hpp"

#include "../support/fixture.hpp"
#include "../support/generators.hpp"

#include <doctest.h>

#include <random>

using namespace pdms;

namespace {

RoundTrip q1_trip(const Scenario& sc) {
    return roundtrip(sc.find_query("Q1")->query, *sc.network.find_mapping("9DC", "H"));
}

}  // namespace

TEST_CASE("loss of the motivating query has the Doctor/EMT discriminator") {
    Scenario sc = testsupport::load_fixture();
    RoundTrip rt = q1_trip(sc);
    LossReport rep = detect_loss(rt.original, rt.back, rt.dropped);
    CHECK(!rep.empty);
    REQUIRE(rep.discriminator.has_value());
    CHECK(rep.discriminator->position == 1);
    CHECK(rep.discriminator->excluded == std::vector<std::string>{"Doctor", "EMT"});
    REQUIRE(rep.matches.size() == 1);
    CHECK(rep.matches.front().backs.size() == 2);
    CHECK(rep.lost_disjuncts.empty());
}

TEST_CASE("the exhaustive EQ/NEQ group counts as no loss") {
    Scenario sc = testsupport::load_fixture();
    const PeerSchema& p = *sc.network.find_peer("9DC");
    Query q1 = sc.find_query("Q1")->query;
    Query back = parse_query_sql(
        "SELECT PID, skill FROM SkilledPerson WHERE skill = \"Doctor\" "
        "UNION SELECT PID, skill FROM SkilledPerson WHERE skill = \"EMT\" "
        "UNION SELECT PID, skill FROM SkilledPerson WHERE skill != \"Doctor\" AND skill != \"EMT\"",
        p);
    LossReport rep = detect_loss(q1, back);
    CHECK(rep.empty);

    // Without the excluding branch the group is not exhaustive.
    Query partial = parse_query_sql(
        "SELECT PID, skill FROM SkilledPerson WHERE skill = \"Doctor\" "
        "UNION SELECT PID, skill FROM SkilledPerson WHERE skill = \"EMT\"",
        p);
    CHECK(!detect_loss(q1, partial).empty);

    // A mismatched exclusion set does not count either.
    Query wrong = parse_query_sql(
        "SELECT PID, skill FROM SkilledPerson WHERE skill = \"Doctor\" "
        "UNION SELECT PID, skill FROM SkilledPerson WHERE skill != \"Doctor\" AND skill != \"EMT\"",
        p);
    CHECK(!detect_loss(q1, wrong).empty);
}

TEST_CASE("detect_loss is reflexively empty") {
    Scenario sc = testsupport::load_fixture();
    const PeerSchema& lh = *sc.network.find_peer("LH");
    Query q = parse_query_sql(
        "SELECT SID, class FROM Staff WHERE class = \"Doctor\" "
        "UNION SELECT SID, class FROM Staff WHERE class = \"EMT\" "
        "UNION SELECT Staff.SID, class FROM Staff, Schedule WHERE Staff.SID = Schedule.SID",
        lh);
    CHECK(detect_loss(q, q).empty);
}

TEST_CASE("dropped disjuncts keep the report non-empty") {
    Scenario sc = testsupport::load_fixture();
    Query q1 = sc.find_query("Q1")->query;
    LossReport rep = detect_loss(q1, q1, {{0, "no applicable rule"}});
    CHECK(!rep.empty);
    CHECK_THROWS_AS(
        synthesize_complement(rep, *sc.network.find_mapping("9DC", "H"), q1, sc.network),
        LossShapeError);
}

TEST_CASE("synthesis reproduces the complement relation and both rules") {
    Scenario sc = testsupport::load_fixture();
    RoundTrip rt = q1_trip(sc);
    Query q1 = sc.find_query("Q1")->query;
    LossReport rep = detect_loss(rt.original, rt.back, rt.dropped);
    ComplementSpec spec =
        synthesize_complement(rep, *sc.network.find_mapping("9DC", "H"), q1, sc.network);

    CHECK(spec.relation.name == "CO_Doctor+EMT");
    CHECK(spec.relation.attributes == std::vector<std::string>{"PID", "skill"});
    CHECK(spec.host_peer == "H");

    PeerNetwork with_co = apply_recovery(sc.network, spec);
    GavRule expected_def = parse_rule(
        "H : CO_Doctor+EMT(PID, skill) :- 9DC : SkilledPerson(PID, skill), "
        "skill != \"Doctor\", skill != \"EMT\"",
        with_co);
    GavRule expected_contrib = parse_rule(
        "9DC : SkilledPerson(PID, skill) :- H : CO_Doctor+EMT(PID, skill)", with_co);
    CHECK(rule_equal(spec.definition_rule, expected_def));
    CHECK(rule_equal(spec.contribution_rule, expected_contrib));
}

TEST_CASE("a single excluded constant still synthesizes") {
    PeerNetwork net;
    net.peers.push_back({"P1", {{"Src", {"id", "cat"}}}, {}});
    net.peers.push_back({"P2", {{"R0", {"id"}}}, {}});
    GavRule r;
    r.head = {"P1", "Src", {Term::var("x"), Term::constant("only")}};
    r.body.push_back({"P2", "R0", {Term::var("x")}});
    net.mappings.push_back({"P1", "P2", {r}});

    Disjunct d;
    d.head = {Term::var("i"), Term::var("c")};
    d.body.push_back({"P1", "Src", {Term::var("i"), Term::var("c")}});
    Query q{{d}};

    RecoveryResult rec = track_and_replace(q, net, "P1", "P2");
    REQUIRE(rec.spec.has_value());
    CHECK(rec.spec->relation.name == "CO_only");
    CHECK(rec.spec->definition_rule.predicates.size() == 1);
    CHECK(verify_recovery(q, rec.network, "P1", "P2"));
}

TEST_CASE("extras on two different head positions cannot be synthesized") {
    Scenario sc = testsupport::load_fixture();
    const PeerSchema& p = *sc.network.find_peer("9DC");
    Query q = sc.find_query("Q1")->query;
    Query back = parse_query_sql(
        "SELECT PID, skill FROM SkilledPerson WHERE skill = \"Doctor\" "
        "UNION SELECT PID, skill FROM SkilledPerson WHERE PID = \"p1\"",
        p);
    LossReport rep = detect_loss(q, back);
    CHECK(!rep.empty);
    CHECK(!rep.discriminator.has_value());
    CHECK_THROWS_AS(synthesize_complement(rep, *sc.network.find_mapping("9DC", "H"), q, sc.network),
                    LossShapeError);
}

TEST_CASE("recovery applies the virtual relation and is collision-checked") {
    Scenario sc = testsupport::load_fixture();
    RoundTrip rt = q1_trip(sc);
    Query q1 = sc.find_query("Q1")->query;
    LossReport rep = detect_loss(rt.original, rt.back, rt.dropped);
    ComplementSpec spec =
        synthesize_complement(rep, *sc.network.find_mapping("9DC", "H"), q1, sc.network);

    PeerNetwork recovered = apply_recovery(sc.network, spec);
    const PeerSchema* h = recovered.find_peer("H");
    CHECK(h->find_relation("CO_Doctor+EMT"));
    CHECK(h->is_virtual("CO_Doctor+EMT"));
    CHECK(recovered.find_mapping("9DC", "H")->rules.size() == 4);
    CHECK(validate_network(recovered).empty());
    // The original network value is untouched.
    CHECK(sc.network.find_mapping("9DC", "H")->rules.size() == 2);
    CHECK_THROWS_AS(apply_recovery(recovered, spec), ValidationError);
}

TEST_CASE("verify_recovery before and after") {
    Scenario sc = testsupport::load_fixture();
    Query q1 = sc.find_query("Q1")->query;
    CHECK(!verify_recovery(q1, sc.network, "9DC", "H"));
    RecoveryResult rec = track_and_replace(q1, sc.network, "9DC", "H");
    REQUIRE(rec.spec.has_value());
    CHECK(verify_recovery(q1, rec.network, "9DC", "H"));
}

TEST_CASE("track_and_replace returns diagnosis without repair for lost disjuncts") {
    // Only one of the two branches speaks FS's language; the other is lost
    // and that shape has no complement repair.
    Scenario sc = testsupport::load_fixture();
    Disjunct amb;
    amb.head = {Term::var("v")};
    amb.body.push_back({"H", "Ambulance", {Term::var("v"), Term::var("st")}});
    Disjunct doc;
    doc.head = {Term::var("s")};
    doc.body.push_back({"H", "Doctor",
                        {Term::var("s"), Term::var("h"), Term::var("l"), Term::var("a"),
                         Term::var("b")}});
    Query q{{amb, doc}};
    RecoveryResult rec = track_and_replace(q, sc.network, "H", "FS");
    CHECK(!rec.report.empty);
    CHECK(rec.report.lost_disjuncts.size() == 1);
    CHECK(!rec.spec.has_value());
    CHECK(rec.network.find_mapping("H", "FS")->rules.size() == 1);
}

TEST_CASE("a fully untranslatable query propagates a rewrite error") {
    Scenario sc = testsupport::load_fixture();
    Disjunct d;
    d.head = {Term::var("s")};
    d.body.push_back({"H", "Doctor",
                      {Term::var("s"), Term::var("h"), Term::var("l"), Term::var("a"),
                       Term::var("b")}});
    Query q{{d}};
    CHECK_THROWS_AS(track_and_replace(q, sc.network, "H", "FS"), RewriteError);
}

TEST_CASE("lossless edges report empty and change nothing") {
    PeerNetwork net;
    net.peers.push_back({"A", {{"R", {"a", "b"}}}, {}});
    net.peers.push_back({"B", {{"Rp", {"a", "b"}}}, {}});
    GavRule id;
    id.head = {"A", "R", {Term::var("x"), Term::var("y")}};
    id.body.push_back({"B", "Rp", {Term::var("x"), Term::var("y")}});
    net.mappings.push_back({"A", "B", {id}});
    Disjunct d;
    d.head = {Term::var("x"), Term::var("y")};
    d.body.push_back({"A", "R", {Term::var("x"), Term::var("y")}});
    Query q{{d}};

    RecoveryResult rec = track_and_replace(q, net, "A", "B");
    CHECK(rec.report.empty);
    CHECK(!rec.spec.has_value());
    CHECK(rec.network.find_mapping("A", "B")->rules.size() == 1);
}

TEST_CASE("empty loss whenever the back translation is syntactically equal") {
    std::mt19937_64 rng(20240814);
    testsupport::Gen gen(rng);
    for (int i = 0; i < 100; ++i) {
        testsupport::GenScenario g = gen.scenario();
        RoundTrip rt;
        try {
            rt = roundtrip(g.query, g.net.mappings.front());
        } catch (const RewriteError&) {
            continue;
        }
        if (query_equal(rt.original, rt.back) && rt.dropped.empty()) {
            CHECK(detect_loss(rt.original, rt.back, rt.dropped).empty);
        }
    }
}

TEST_CASE("property: discriminator-shaped losses always recover") {
    std::mt19937_64 rng(20240815);
    testsupport::Gen gen(rng);
    for (int i = 0; i < 60; ++i) {
        testsupport::GenScenario g = gen.discriminator_scenario();
        RecoveryResult rec = track_and_replace(g.query, g.net, "P1", "P2");
        REQUIRE_MESSAGE(rec.spec.has_value(), "expected a complement for the generated loss");
        CHECK(verify_recovery(g.query, rec.network, "P1", "P2"));
    }
}
