#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "random_kb.hpp"
#include "spook/bench.hpp"
#include "spook/kbmc.hpp"

using namespace spook;

TEST_CASE("grounded node names are paths") {
    auto idx = fixture_index("diamond.spook");
    auto q = parse_query("i.alarm | i.a.c.level = high", *idx);
    auto g = ground(*idx, &q);
    CHECK(g.net.find("i.alarm").has_value());
    CHECK(g.net.size() == 3);
    // i.a.c, i.b and j.c all reach the one node for k
    CHECK(g.chains.at(q.evidence[0].target) == g.net.id("k.level"));
    CHECK_NOTHROW(g.net.check());
}

TEST_CASE("generic fillers are grounded under their owner") {
    auto idx = KbIndex::build(parse_kb(generate_battalion_kb({1, 1, 1, true})));
    auto g = ground(*idx);
    bool generic = false;
    for (size_t i = 0; i < g.net.size(); ++i)
        if (g.net.node(static_cast<VarId>(i)).name.rfind("battalion-charlie/has-battery[1].hit", 0) == 0) generic = true;
    CHECK(generic);
}

TEST_CASE("reference uncertainty grounds one copy per hypothesis and a multiplexer") {
    auto idx = fixture_index("reference.spook");
    auto g = ground(*idx);
    CHECK(g.net.find("patrol-1/site@Swamp.hazard").has_value());
    CHECK(g.net.find("patrol-1/site@Field.hazard").has_value());
    auto mux = g.net.id("patrol-1/site{hazard}");
    CHECK(g.net.node(mux).parents.size() == 4);
}

TEST_CASE("flat answers equal enumeration on the small fixtures") {
    struct Case {
        const char* file;
        const char* query;
    };
    for (auto c : {Case{"diamond.spook", "i.alarm | k.level = high"},
                   Case{"diamond.spook", "i.alarm, j.signal"},
                   Case{"shared_location.spook", "alpha.moving, bravo.moving | alpha.under-fire = yes"},
                   Case{"inverse_ring.spook", "ann.tired, red-team.morale | bo.skill = poor"},
                   Case{"number.spook", "array-1.coverage | array-1.climate = harsh"},
                   Case{"reference.spook", "patrol-1.delayed, patrol-1.site-choice | patrol-1.season = wet"},
                   Case{"quantifier.spook", "ship-1.ready | ship-1.weather = storm"}}) {
        CAPTURE(c.query);
        auto idx = fixture_index(c.file);
        auto q = parse_query(c.query, *idx);
        auto flat = answer_query_kbmc(*idx, q);
        auto brute = testing::enumerate_answer(*idx, q);
        REQUIRE(flat.joint.size() == brute.size());
        for (size_t i = 0; i < brute.size(); ++i) CHECK(std::abs(flat.joint[i] - brute[i]) < 1e-12);
    }
}

TEST_CASE("shared instance correlates its two users") {
    auto idx = fixture_index("shared_location.spook");
    auto prior = answer_query_kbmc(*idx, parse_query("bravo.under-fire", *idx));
    auto post = answer_query_kbmc(*idx, parse_query("bravo.under-fire | alpha.under-fire = yes", *idx));
    CHECK(post.probability(0, "yes") > prior.probability(0, "yes"));
}

TEST_CASE("asserted values act as evidence") {
    auto idx = KbIndex::build(parse_kb(R"(
class A { simple x {f, t} cpd [[0.5, 0.5]] simple y {f, t} parents(x) cpd [[0.9, 0.1], [0.2, 0.8]] }
instance a : A
assert a.x = t
)"));
    auto r = answer_query_kbmc(*idx, parse_query("a.y", *idx));
    CHECK(r.probability(0, "t") == doctest::Approx(0.8).epsilon(1e-12));
    try {
        answer_query_kbmc(*idx, parse_query("a.y | a.x = f", *idx));
        FAIL("expected ImpossibleEvidence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ImpossibleEvidence);
    }
}

TEST_CASE("depth cap stops runaway generic chains") {
    auto idx = KbIndex::build(parse_kb(generate_battalion_kb({2, 2, 2, true})));
    KbmcOptions opts;
    opts.depth_cap = 1;
    CHECK_THROWS_AS(answer_query_kbmc(*idx, battalion_probe_query(), opts), Error);
}

TEST_CASE("two instances chaining into one location share its node") {
    auto idx = fixture_index("shared_location.spook");
    auto g = ground(*idx);
    auto terrain = g.net.id("location-a.terrain");
    int children = 0;
    for (size_t i = 0; i < g.net.size(); ++i)
        for (auto p : g.net.node(static_cast<VarId>(i)).parents) children += p == terrain;
    CHECK(children == 4);
    CHECK(g.net.size() == 5);
}
