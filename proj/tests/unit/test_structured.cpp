#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clamped.hpp"
#include "fixtures.hpp"
#include "spook/bench.hpp"
#include "spook/kbmc.hpp"
#include "spook/structured.hpp"

using namespace spook;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

QueryResult structured(const KbHandle& idx, const std::string& text, StructuredOptions opts = {}) {
    StructuredEngine engine(idx, opts);
    return engine.solve_top_level(parse_query(text, *idx));
}

KbHandle build(const std::string& text) { return KbIndex::build(parse_kb(text)); }

}  // namespace

TEST_CASE("structured answers equal the flat network on the fixtures") {
    struct Case {
        const char* file;
        const char* query;
    };
    for (auto c : {Case{"diamond.spook", "i.alarm | k.level = high"},
                   Case{"diamond.spook", "i.alarm, j.signal"},
                   Case{"shared_location.spook", "alpha.moving, bravo.moving | alpha.under-fire = yes"},
                   Case{"inverse_ring.spook", "ann.tired, red-team.morale | bo.skill = poor"},
                   Case{"inverse_ring.spook", "bo.tired"},
                   Case{"number.spook", "array-1.coverage, array-1.num-sensors | array-1.climate = harsh"},
                   Case{"reference.spook", "patrol-1.delayed, patrol-1.site-choice | patrol-1.season = wet"},
                   Case{"reference.spook", "patrol-1.delayed | base-camp.hazard = high"},
                   Case{"quantifier.spook", "ship-1.ready | ship-1.weather = storm"},
                   Case{"quantifier.spook", "ship-1.fit-count, ship-1.trained-count"}}) {
        CAPTURE(c.query);
        auto idx = fixture_index(c.file);
        auto flat = answer_query_kbmc(*idx, parse_query(c.query, *idx));
        for (bool reuse : {true, false}) {
            for (bool naive : {false, true}) {
                StructuredOptions opts;
                opts.reuse = reuse;
                opts.naive_quantifiers = naive;
                CHECK(max_diff(structured(idx, c.query, opts).joint, flat.joint) < 1e-12);
            }
        }
    }
}

TEST_CASE("number uncertainty equals the explicit mixture over clamped counts") {
    std::vector<double> p_m{0.1, 0.2, 0.3, 0.4};
    auto full = structured(build(testing::array_kb("[[0.1, 0.2, 0.3, 0.4]]")), "array-1.coverage").joint;
    std::vector<double> mix(2, 0.0);
    for (int m = 0; m <= 3; ++m) {
        std::string row = "[[";
        for (int k = 0; k <= 3; ++k) row += std::string(k ? ", " : "") + (k == m ? "1" : "0");
        auto clamped = structured(build(testing::array_kb(row + "]]")), "array-1.coverage").joint;
        for (size_t i = 0; i < 2; ++i) mix[i] += p_m[static_cast<size_t>(m)] * clamped[i];
    }
    CHECK(max_diff(full, mix) <= 1e-12);

    // and through evidence on the count with a parented number attribute
    auto idx = fixture_index("number.spook");
    auto prior = structured(idx, "array-1.num-sensors").joint;
    auto direct = structured(idx, "array-1.coverage").joint;
    std::vector<double> total(2, 0.0);
    for (int m = 0; m <= 3; ++m) {
        auto cond = structured(idx, "array-1.coverage | array-1.num-sensors = " + std::to_string(m)).joint;
        for (size_t i = 0; i < 2; ++i) total[i] += prior[static_cast<size_t>(m)] * cond[i];
    }
    CHECK(max_diff(direct, total) <= 1e-12);
}

TEST_CASE("reference uncertainty obeys the law of total probability") {
    std::vector<std::pair<std::string, double>> hypotheses{{"Swamp", 0.25}, {"Field", 0.45}, {"base-camp", 0.3}};
    auto full = structured(build(testing::patrol_kb("")), "patrol-1.delayed").joint;
    std::vector<double> total(2, 0.0);
    for (const auto& [h, p] : hypotheses) {
        auto clamped = structured(build(testing::patrol_kb(h)), "patrol-1.delayed").joint;
        for (size_t i = 0; i < 2; ++i) total[i] += p * clamped[i];
    }
    CHECK(max_diff(full, total) <= 1e-9);

    auto idx = fixture_index("reference.spook");
    auto prior = structured(idx, "patrol-1.site-choice").joint;
    auto direct = structured(idx, "patrol-1.delayed").joint;
    std::vector<double> by_evidence(2, 0.0);
    const auto& entries = idx->range("patrol-1", "site-choice");
    for (size_t v = 0; v < entries.size(); ++v) {
        auto cond = structured(idx, "patrol-1.delayed | patrol-1.site-choice = " + entries[v]).joint;
        for (size_t i = 0; i < 2; ++i) by_evidence[i] += prior[v] * cond[i];
    }
    CHECK(max_diff(direct, by_evidence) <= 1e-9);
}

TEST_CASE("battalion evidence sequence moves up, down, up on both backends") {
    auto idx = fixture_index("battalion.spook");
    StructuredEngine engine(idx);
    QueryExpr q{{ChainRef{"battery-1", AttributeChain::parse("hit")}}, {}};
    std::vector<double> hit;
    auto record = [&] {
        auto s = engine.solve_top_level(q);
        auto f = answer_query_kbmc(*idx, q);
        CHECK(max_diff(s.joint, f.joint) < 1e-9);
        hit.push_back(s.probability(0, "true"));
    };
    record();
    for (const auto& o : battalion_evidence_steps()) {
        q.evidence.push_back(o);
        record();
    }
    REQUIRE(hit.size() == 4);
    CHECK(hit[1] > hit[0]);
    CHECK(hit[2] < hit[1]);
    CHECK(hit[3] > hit[2]);
}

TEST_CASE("generic battery subqueries are solved once with reuse") {
    for (int k : {1, 2, 4, 8}) {
        CAPTURE(k);
        auto idx = KbIndex::build(parse_kb(generate_battalion_kb({2, k, 2, true})));
        auto q = parse_query("battalion-charlie.next-activity", *idx);
        for (bool reuse : {true, false}) {
            StructuredOptions opts;
            opts.reuse = reuse;
            opts.naive_quantifiers = true;
            StructuredEngine engine(idx, opts);
            auto r = engine.solve_top_level(q);
            auto per = engine.cache_stats_by_class();
            REQUIRE(per.count("Battery"));
            CHECK(per.at("Battery").misses == static_cast<std::uint64_t>(reuse ? 1 : k));
            CHECK(per.at("Battery").hits == static_cast<std::uint64_t>(reuse ? k - 1 : 0));
            CHECK(max_diff(r.joint, answer_query_kbmc(*idx, q).joint) < 1e-9);
        }
    }
}

TEST_CASE("cache survives across queries and can be cleared") {
    auto idx = fixture_index("battalion.spook");
    StructuredEngine engine(idx);
    auto q = battalion_probe_query();
    auto first = engine.solve_top_level(q);
    auto before = engine.cache_stats();
    auto second = engine.solve_top_level(q);
    CHECK(second.joint == first.joint);
    CHECK(second.stats.cache_misses == 0);
    CHECK(engine.cache_stats().hits > before.hits);
    engine.clear_cache();
    CHECK(engine.cache_stats().entries == 0);
}

TEST_CASE("structured local networks stay smaller than the flat network") {
    auto idx = fixture_index("battalion.spook");
    StructuredOptions opts;
    opts.clique_stats = true;
    StructuredEngine engine(idx, opts);
    engine.solve_top_level(battalion_probe_query());
    auto flat = triangulation_stats(ground(*idx, nullptr).net);
    CHECK(engine.max_local_clique() > 0);
    CHECK(flat.max_clique > engine.max_local_clique());
}

TEST_CASE("class subqueries return input-conditioned tables") {
    auto idx = fixture_index("battalion.spook");
    StructuredEngine engine(idx);
    SubQuery sq{"Battery", {AttributeChain::parse("hit")}, std::string("in-battalion")};
    auto r = engine.solve_query(sq);
    REQUIRE(r->inputs.size() == 1);
    CHECK(r->inputs[0].chain.str() == "under-fire");
    REQUIRE(r->table.size() == 3);
    CHECK(r->table[2][1] == doctest::Approx(0.55));
    CHECK(sq.canonical().key() == sq.key());
}

TEST_CASE("structured errors") {
    auto idx = fixture_index("battalion.spook");
    auto code = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Timeout;
    };
    StructuredOptions shallow;
    shallow.depth_cap = 1;
    CHECK(code([&] { structured(idx, "battalion-charlie.next-activity", shallow); }) == ErrorCode::RecursionDepthExceeded);
    StructuredEngine engine(idx);
    CHECK(code([&] { engine.solve_query({"Battery", {}, std::nullopt}); }) == ErrorCode::InvalidKB);

    auto asserted = build(R"(
class A { simple x {f, t} cpd [[0.5, 0.5]] simple y {f, t} parents(x) cpd [[0.9, 0.1], [0.2, 0.8]] }
instance a : A
assert a.x = t
)");
    CHECK(structured(asserted, "a.y").probability(0, "t") == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(code([&] { structured(asserted, "a.y | a.x = f"); }) == ErrorCode::ImpossibleEvidence);

    StructuredOptions late;
    late.inference.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    CHECK(code([&] { structured(idx, "battalion-charlie.next-activity", late); }) == ErrorCode::Timeout);
}

TEST_CASE("fresh engines have empty caches and reuse is exact") {
    auto idx = fixture_index("battalion.spook");
    StructuredEngine fresh(idx);
    auto s = fresh.cache_stats();
    CHECK((s.hits == 0 && s.misses == 0 && s.entries == 0));

    auto q = battalion_probe_query();
    StructuredOptions off;
    off.reuse = false;
    StructuredEngine uncached(idx, off);
    auto a = fresh.solve_top_level(q);
    auto b = uncached.solve_top_level(q);
    CHECK(a.joint == b.joint);
    CHECK(uncached.cache_stats().hits == 0);
}

TEST_CASE("every subquery input influences the outputs") {
    auto idx = fixture_index("battalion.spook");
    StructuredEngine engine(idx);
    std::vector<SubQuery> calls{
        {"Battery", {AttributeChain::parse("readiness")}, std::string("in-battalion")},
        {"Unit", {AttributeChain::parse("reported-damaged")}, std::string("in-group")},
        {"Launcher-Group", {AttributeChain::parse("num-reported-damaged"), AttributeChain::parse("effective")},
         std::string("in-battery")},
    };
    for (const auto& sq : calls) {
        CAPTURE(sq.key());
        auto r = engine.solve_query(sq);
        REQUIRE_FALSE(r->inputs.empty());
        size_t rows = r->table.size();
        size_t stride = rows;
        for (size_t i = 0; i < r->inputs.size(); ++i) {
            stride /= r->input_ranges[i].size();
            // some pair of rows differing only in input i must differ in output
            bool matters = false;
            for (size_t row = 0; row < rows && !matters; ++row) {
                size_t digit = (row / stride) % r->input_ranges[i].size();
                if (digit != 0) continue;
                for (size_t v = 1; v < r->input_ranges[i].size(); ++v)
                    if (r->table[row] != r->table[row + v * stride]) matters = true;
            }
            CAPTURE(r->inputs[i].str());
            CHECK(matters);
        }
    }
    auto unit = engine.solve_query(calls[1]);
    std::vector<std::string> names;
    for (const auto& in : unit->inputs) names.push_back(in.chain.str());
    CHECK(names == std::vector<std::string>{"exposure", "in-battery.in-battalion.in-environment.hiding-support"});
}
