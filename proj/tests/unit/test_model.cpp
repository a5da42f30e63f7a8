#include "pdms/model.hpp"

#include "../support/fixture.hpp"

#include <doctest.h>

using namespace pdms;

TEST_CASE("the bundled scenario validates cleanly") {
    Scenario sc = testsupport::load_fixture();
    CHECK(validate_network(sc.network).empty());
    CHECK(sc.network.peers.size() == 5);
    CHECK(sc.network.mappings.size() == 4);
}

TEST_CASE("single-fault mutations are each diagnosed") {
    Scenario base = testsupport::load_fixture();

    SUBCASE("head variable absent from the body") {
        PeerNetwork net = base.network;
        GavRule bad;
        bad.head = {"9DC", "SkilledPerson", {Term::var("nowhere"), Term::constant("X")}};
        bad.body.push_back({"H", "Ambulance", {Term::var("v"), Term::var("s")}});
        net.find_mapping("9DC", "H")->rules.push_back(bad);
        auto diags = validate_network(net);
        REQUIRE(diags.size() == 1);
        CHECK(diags.front().code == "unsafe-rule");
    }

    SUBCASE("arity mismatch against the schema") {
        PeerNetwork net = base.network;
        GavRule bad;
        bad.head = {"9DC", "SkilledPerson", {Term::var("x"), Term::var("x")}};
        bad.body.push_back({"H", "Doctor", {Term::var("x")}});  // Doctor has five attributes
        net.find_mapping("9DC", "H")->rules.push_back(bad);
        auto diags = validate_network(net);
        REQUIRE(diags.size() == 1);
        CHECK(diags.front().code == "arity-mismatch");
    }

    SUBCASE("unknown relation") {
        PeerNetwork net = base.network;
        GavRule bad;
        bad.head = {"9DC", "Nonexistent", {Term::var("x")}};
        bad.body.push_back({"H", "Ambulance", {Term::var("x"), Term::var("s")}});
        net.find_mapping("9DC", "H")->rules.push_back(bad);
        auto diags = validate_network(net);
        REQUIRE(diags.size() == 1);
        CHECK(diags.front().code == "unknown-relation");
    }

    SUBCASE("duplicate mapping for a peer pair") {
        PeerNetwork net = base.network;
        net.mappings.push_back({"H", "9DC", {}});
        auto diags = validate_network(net);
        REQUIRE(diags.size() == 1);
        CHECK(diags.front().code == "duplicate-mapping");
    }

    SUBCASE("mixed body peers") {
        PeerNetwork net = base.network;
        GavRule bad;
        bad.head = {"9DC", "SkilledPerson", {Term::var("x"), Term::var("c")}};
        bad.body.push_back({"H", "Doctor",
                            {Term::var("x"), Term::var("h"), Term::var("l"), Term::var("s"),
                             Term::var("e")}});
        bad.body.push_back({"LH", "Staff",
                            {Term::var("x"), Term::var("f"), Term::var("ln"), Term::var("c")}});
        net.find_mapping("9DC", "H")->rules.push_back(bad);
        auto diags = validate_network(net);
        REQUIRE(!diags.empty());
        CHECK(diags.front().code == "mixed-body-peers");
    }

    SUBCASE("duplicate attribute in a relation") {
        PeerNetwork net = base.network;
        for (auto& p : net.peers) {
            if (p.peer_id == "FS") p.relations.push_back({"Crew", {"id", "id"}});
        }
        auto diags = validate_network(net);
        REQUIRE(diags.size() == 1);
        CHECK(diags.front().code == "duplicate-attribute");
    }
}

TEST_CASE("neighbors are sorted and mapping lookup is unordered") {
    Scenario sc = testsupport::load_fixture();
    CHECK(sc.network.neighbors("H") == std::vector<std::string>{"9DC", "FH", "FS", "LH"});
    CHECK(sc.network.find_mapping("H", "9DC") == sc.network.find_mapping("9DC", "H"));
    CHECK(sc.network.find_mapping("9DC", "LH") == nullptr);
}

TEST_CASE("query validation catches span errors") {
    Scenario sc = testsupport::load_fixture();
    Query q;
    Disjunct d;
    d.head = {Term::var("x")};
    d.body.push_back({"9DC", "SkilledPerson", {Term::var("x"), Term::var("s")}});
    d.body.push_back({"H", "Ambulance", {Term::var("v"), Term::var("st")}});
    q.disjuncts.push_back(d);
    CHECK_THROWS_AS(validate_query(q, sc.network), ValidationError);
}
