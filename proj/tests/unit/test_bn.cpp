#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "spook/inference.hpp"

using namespace spook;

namespace {

Cpt random_cpt(std::mt19937& rng, int rows, int card, bool zeros = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Cpt c;
    for (int r = 0; r < rows; ++r) {
        std::vector<double> row(static_cast<size_t>(card));
        double s = 0;
        for (auto& v : row) {
            v = zeros && u(rng) < 0.2 ? 0.0 : 0.05 + u(rng);
            s += v;
        }
        if (s == 0) row[0] = s = 1;
        for (auto& v : row) v /= s;
        c.rows.push_back(row);
    }
    return c;
}

DiscreteNetwork random_net(std::mt19937& rng, int n, bool zeros = false) {
    DiscreteNetwork net;
    for (int i = 0; i < n; ++i) {
        int card = 2 + static_cast<int>(rng() % 2);
        std::vector<VarId> parents;
        for (int j = 0; j < i; ++j)
            if (rng() % 3 == 0 && parents.size() < 3) parents.push_back(j);
        int rows = 1;
        for (auto p : parents) rows *= net.node(p).card();
        std::vector<std::string> states;
        for (int k = 0; k < card; ++k) states.push_back("s" + std::to_string(k));
        net.add_node("n" + std::to_string(i), states, parents, random_cpt(rng, rows, card, zeros));
    }
    return net;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("factor algebra") {
    Factor a{{0, 1}, {2, 2}, {0.1, 0.2, 0.3, 0.4}};
    Factor b{{1, 2}, {2, 3}, {1, 2, 3, 4, 5, 6}};
    auto p = product(a, b);
    CHECK(p.size() == 12);
    CHECK(p.sum() == doctest::Approx(0.1 * 6 + 0.2 * 15 + 0.3 * 6 + 0.4 * 15));

    auto s = sum_out(a, 0);
    CHECK(s.vars == std::vector<VarId>{1});
    CHECK(s.table[0] == doctest::Approx(0.4));
    CHECK(s.table[1] == doctest::Approx(0.6));

    auto r = reduce(b, 2, 1);
    CHECK(r.vars == std::vector<VarId>{1});
    CHECK(r.table == std::vector<double>{2, 5});

    auto m = marginalize(p, {2, 0});
    CHECK(m.vars == std::vector<VarId>{2, 0});
    CHECK(m.sum() == doctest::Approx(p.sum()));

    std::uint64_t ops = 0;
    auto c = combine({&a, &b}, {0}, &ops);
    CHECK(ops > 0);
    CHECK(c.table[0] + c.table[1] == doctest::Approx(p.sum()));

    Factor z{{0}, {2}, {2, 6}};
    CHECK(z.normalize() == 8);
    CHECK(z.table[1] == 0.75);
}

TEST_CASE("variable elimination matches enumeration on random networks") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        auto net = random_net(rng, 4 + trial % 6, trial % 3 == 0);
        auto n = static_cast<VarId>(net.size());
        Evidence ev;
        for (VarId v = 0; v < n; ++v)
            if (rng() % 4 == 0) ev[v] = static_cast<int>(rng() % static_cast<unsigned>(net.node(v).card()));
        std::vector<VarId> targets;
        for (VarId v = 0; v < n && targets.size() < 2; ++v)
            if (!ev.count(v) && rng() % 2) targets.push_back(v);
        if (targets.empty()) continue;

        Factor brute;
        try {
            brute = marginalize(joint_enumerate(net, ev), targets);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ImpossibleEvidence);
            CHECK_THROWS_AS(query(net, targets, ev), Error);
            continue;
        }
        InferenceCounters counters;
        auto ve = query(net, targets, ev, &counters);
        CHECK(ve.vars == targets);
        CHECK(max_diff(ve.table, brute.table) < 1e-12);
        CHECK(counters.max_clique >= 1);
    }
}

TEST_CASE("conditional query rows equal clamped queries") {
    DiscreteNetwork net;
    auto in = net.add_input("in", {"a", "b", "c"});
    auto x = net.add_node("x", {"f", "t"}, {in}, {{{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.8}}});
    auto y = net.add_node("y", {"f", "t"}, {x, in}, {{{0.7, 0.3}, {0.6, 0.4}, {0.5, 0.5}, {0.4, 0.6}, {0.3, 0.7}, {0.1, 0.9}}});
    auto rows = conditional_query(net, {x, y}, in);
    REQUIRE(rows.size() == 3);
    for (int v = 0; v < 3; ++v) {
        auto clamped = query(net, {x, y}, {{in, v}});
        CHECK(max_diff(rows[static_cast<size_t>(v)], clamped.table) < 1e-15);
    }
    CHECK(rows[0][0] == doctest::Approx(0.9 * 0.7));
}

TEST_CASE("impossible evidence is reported") {
    DiscreteNetwork net;
    auto a = net.add_node("a", {"f", "t"}, {}, {{{1.0, 0.0}}});
    auto b = net.add_node("b", {"f", "t"}, {a}, {{{0.5, 0.5}, {0.5, 0.5}}});
    try {
        query(net, {b}, {{a, 1}});
        FAIL("expected ImpossibleEvidence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ImpossibleEvidence);
    }
}

TEST_CASE("network checks") {
    DiscreteNetwork net;
    auto a = net.declare("a", {"f", "t"});
    auto b = net.declare("b", {"f", "t"});
    net.define(a, {b}, {{{0.5, 0.5}, {0.5, 0.5}}});
    net.define(b, {a}, {{{0.5, 0.5}, {0.5, 0.5}}});
    CHECK_THROWS_AS(net.topological_order(), Error);

    DiscreteNetwork bad;
    bad.add_node("a", {"f", "t"}, {}, {{{0.5, 0.4}}});
    CHECK_THROWS_AS(bad.check(), Error);

    DiscreteNetwork ok;
    auto x = ok.add_node("x", {"f", "t"}, {}, {{{0.25, 0.75}}});
    CHECK(ok.id("x") == x);
    CHECK(ok.state_index(x, "t") == 1);
    CHECK_FALSE(ok.find("nope").has_value());
    std::ostringstream os;
    ok.dump(os);
    CHECK(os.str().find("0.75") != std::string::npos);
}

TEST_CASE("min-fill on small graphs") {
    // a 4-cycle needs one fill edge and yields cliques of 3
    auto four = min_fill_order({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {0, 1, 2, 3}, {2, 2, 2, 2});
    CHECK(four.max_clique == 3);
    CHECK(four.order.size() == 4);

    // a chain is eliminated from its ends without fill
    auto chain = min_fill_order({{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0, 1, 2, 3, 4}, {2, 2, 2, 2, 2});
    CHECK(chain.max_clique == 2);
    CHECK(chain.order.front() == 0);

    // v-structure moralizes into a triangle
    DiscreteNetwork net;
    auto p = net.add_node("p", {"f", "t"}, {}, {{{0.5, 0.5}}});
    auto q = net.add_node("q", {"f", "t"}, {}, {{{0.5, 0.5}}});
    net.add_node("c", {"f", "t"}, {p, q}, {{{1, 0}, {0, 1}, {0, 1}, {0, 1}}});
    auto st = triangulation_stats(net);
    CHECK(st.max_clique == 3);
    CHECK(st.total_cells == doctest::Approx(8 + 4 + 2));
}

TEST_CASE("canonicalize renames nodes by sorted name") {
    DiscreteNetwork net;
    auto z = net.add_node("z", {"f", "t"}, {}, {{{0.5, 0.5}}});
    net.add_node("a", {"f", "t"}, {z}, {{{0.9, 0.1}, {0.2, 0.8}}});
    auto before = query(net, {1});
    auto map = net.canonicalize();
    CHECK(net.node(0).name == "a");
    CHECK(map[0] == 1);
    CHECK(max_diff(query(net, {0}).table, before.table) < 1e-15);
}

TEST_CASE("deadline aborts inference") {
    std::mt19937 rng(3);
    auto net = random_net(rng, 12);
    InferenceOptions opts;
    opts.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    try {
        query(net, {0}, {}, nullptr, opts);
        FAIL("expected Timeout");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Timeout);
    }
}
