#include <doctest.h>

#include <cmath>
#include <random>

#include "spook/aggregate.hpp"
#include "spook/inference.hpp"

using namespace spook;

namespace {

double choose(int n, int k) {
    double c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// Sums the probability of every sequence of n contribution vectors.
std::vector<double> brute_force_counts(const std::vector<double>& contribution, int l, int n) {
    size_t nc = contribution.size();
    size_t base = static_cast<size_t>(n) + 1;
    size_t cells = 1;
    for (int i = 0; i < l; ++i) cells *= base;
    std::vector<double> out(cells, 0.0);
    size_t sequences = 1;
    for (int i = 0; i < n; ++i) sequences *= nc;
    for (size_t s = 0; s < sequences; ++s) {
        double p = 1;
        std::vector<int> count(static_cast<size_t>(l), 0);
        size_t rest = s;
        for (int i = 0; i < n; ++i) {
            size_t c = rest % nc;
            rest /= nc;
            p *= contribution[c];
            for (int j = 0; j < l; ++j) count[static_cast<size_t>(j)] += static_cast<int>((c >> (l - 1 - j)) & 1u);
        }
        size_t idx = 0;
        for (int j = 0; j < l; ++j) idx = idx * base + static_cast<size_t>(count[static_cast<size_t>(j)]);
        out[idx] += p;
    }
    return out;
}

}  // namespace

TEST_CASE("binomial recurrence matches the closed form") {
    double worst = 0;
    for (int n = 0; n <= 30; ++n) {
        for (int i = 0; i <= 10; ++i) {
            double p = i / 10.0;
            auto dist = binomial_cpt(p, n);
            REQUIRE(dist.size() == static_cast<size_t>(n) + 1);
            for (int k = 0; k <= n; ++k) {
                double exact = choose(n, k) * std::pow(p, k) * std::pow(1 - p, n - k);
                worst = std::max(worst, std::abs(dist[static_cast<size_t>(k)] - exact));
            }
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("vector quantifier recurrence matches brute force") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int l = 1; l <= 3; ++l) {
        for (int n = 0; n <= 5; ++n) {
            // correlated: not a product of per-coordinate marginals
            std::vector<double> contribution(size_t{1} << l);
            double s = 0;
            for (auto& c : contribution) s += (c = u(rng) * u(rng));
            for (auto& c : contribution) c /= s;

            std::uint64_t ops = 0;
            auto table = quantifier_joint_cpt(contribution, l, n, &ops);
            REQUIRE(table.size() == static_cast<size_t>(n) + 1);
            for (int m = 0; m <= n; ++m) {
                auto brute = brute_force_counts(contribution, l, m);
                // brute force indexes counts in base m+1; project onto base n+1
                size_t cells = table[static_cast<size_t>(m)].size();
                std::vector<double> expect(cells, 0.0);
                for (size_t idx = 0; idx < brute.size(); ++idx) {
                    size_t rest = idx, out = 0, scale = 1;
                    for (int j = 0; j < l; ++j) {
                        out += (rest % static_cast<size_t>(m + 1)) * scale;
                        rest /= static_cast<size_t>(m + 1);
                        scale *= static_cast<size_t>(n + 1);
                    }
                    expect[out] += brute[idx];
                }
                for (size_t k = 0; k < cells; ++k) CHECK(std::abs(table[static_cast<size_t>(m)][k] - expect[k]) <= 1e-12);
            }
            double bound = std::pow(2.0 * (n + 1), l + 1);
            CHECK(static_cast<double>(ops) <= bound);
            CHECK(ops == static_cast<std::uint64_t>(n * std::pow(n + 1, l) * std::pow(2, l)));
        }
    }
}

TEST_CASE("uncertain number of draws mixes the recurrence rows") {
    std::vector<double> contribution{0.3, 0.7};
    std::vector<double> number{0.1, 0.2, 0.3, 0.4};
    auto mix = quantifier_joint_mixture(contribution, 1, 3, number);
    auto rows = quantifier_joint_cpt(contribution, 1, 3);
    for (size_t k = 0; k < 4; ++k) {
        double expect = 0;
        for (size_t m = 0; m < 4; ++m) expect += number[m] * rows[m][k];
        CHECK(std::abs(mix[k] - expect) <= 1e-15);
    }
}

TEST_CASE("naive counting CPTs") {
    auto c = quantifier_cpt_naive(3, 2, 1);
    REQUIRE(c.rows.size() == 8);
    CHECK(c.rows[0] == std::vector<double>{1, 0, 0, 0});
    CHECK(c.rows[5] == std::vector<double>{0, 0, 1, 0});
    CHECK(c.rows[7] == std::vector<double>{0, 0, 0, 1});

    // gated: leading parent over 0..2 selects how many of two parents count
    auto g = quantifier_cpt_gated({{0, 1}, {0, 1}}, 2);
    REQUIRE(g.rows.size() == 12);
    CHECK(g.rows[3] == std::vector<double>{1, 0, 0});      // m=0, both match
    CHECK(g.rows[4 + 3] == std::vector<double>{0, 1, 0});  // m=1
    CHECK(g.rows[8 + 3] == std::vector<double>{0, 0, 1});  // m=2
}

TEST_CASE("multiplexer and projection CPTs") {
    auto mux = multiplexer_cpt(2, {{"lo", "hi"}, {"lo", "hi"}}, {"lo", "hi"});
    REQUIRE(mux.rows.size() == 8);
    // selector 0 copies the first choice
    CHECK(mux.rows[0b010] == std::vector<double>{0, 1});
    CHECK(mux.rows[0b101] == std::vector<double>{0, 1});
    CHECK(mux.rows[0b110] == std::vector<double>{1, 0});
    try {
        multiplexer_cpt(2, {{"lo", "hi"}, {"lo", "mid", "hi"}}, {"lo", "hi"});
        FAIL("expected RangeMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RangeMismatch);
    }

    auto proj = projection_cpt({2, 3}, 1);
    REQUIRE(proj.rows.size() == 6);
    CHECK(proj.rows[4] == std::vector<double>{0, 1, 0});
}

TEST_CASE("number gate over a network matches the mixture") {
    DiscreteNetwork net;
    auto num = net.add_node("n", count_range(2), {}, {{{0.2, 0.5, 0.3}}});
    auto a = net.add_node("a", {"f", "t"}, {}, {{{0.4, 0.6}}});
    auto b = net.add_node("b", {"f", "t"}, {}, {{{0.4, 0.6}}});
    auto q = net.add_node("q", count_range(2), {a, b}, quantifier_cpt_naive(2, 2, 1));
    number_gate(net, num, q, {{0, 1}, {0, 1}});
    auto got = query(net, {q});
    auto expect = quantifier_joint_mixture({0.4, 0.6}, 1, 2, {0.2, 0.5, 0.3});
    for (size_t k = 0; k < 3; ++k) CHECK(std::abs(got.table[k] - expect[k]) <= 1e-12);
}

TEST_CASE("small recurrence cases") {
    auto fair = binomial_cpt(0.5, 2);
    CHECK(fair == std::vector<double>{0.25, 0.5, 0.25});
    CHECK(binomial_cpt(0.0, 3) == std::vector<double>{1, 0, 0, 0});
    CHECK(binomial_cpt(0.3, 4)[2] == doctest::Approx(0.2646).epsilon(1e-12));

    // one coordinate is the binomial recurrence itself
    auto one = quantifier_joint_cpt({0.7, 0.3}, 1, 6);
    CHECK(one.back() == binomial_cpt(0.3, 6));

    // a single draw reproduces the contribution table
    std::vector<double> c{0.1, 0.2, 0.3, 0.4};
    auto single = quantifier_joint_cpt(c, 2, 1);
    CHECK(single[1] == std::vector<double>{0.1, 0.2, 0.3, 0.4});
}

TEST_CASE("coordinate marginals of the joint are binomial") {
    std::vector<double> c{0.05, 0.25, 0.3, 0.1, 0.02, 0.08, 0.12, 0.08};
    int n = 4, l = 3;
    auto joint = quantifier_joint_cpt(c, l, n).back();
    for (int j = 0; j < l; ++j) {
        double p = 0;
        for (size_t v = 0; v < c.size(); ++v)
            if ((v >> (l - 1 - j)) & 1u) p += c[v];
        std::vector<double> marginal(static_cast<size_t>(n) + 1, 0.0);
        for (size_t idx = 0; idx < joint.size(); ++idx) {
            size_t digit = idx;
            for (int s = l - 1; s > j; --s) digit /= static_cast<size_t>(n + 1);
            marginal[digit % static_cast<size_t>(n + 1)] += joint[idx];
        }
        auto expect = binomial_cpt(p, n);
        for (size_t k = 0; k < marginal.size(); ++k) CHECK(std::abs(marginal[k] - expect[k]) <= 1e-12);
    }
}
