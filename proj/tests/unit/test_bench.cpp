#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "spook/bench.hpp"

using namespace spook;

TEST_CASE("battalion generator is deterministic and matches the bundled fixture") {
    auto a = generate_battalion_kb(4, 4);
    CHECK(a.text == generate_battalion_kb(4, 4).text);
    CHECK(a.text == fixture("battalion.spook").text);
    CHECK(a.provenance == "<battalion-u4-b4>");
    CHECK(generate_battalion_kb({3, 2, 5, true}).provenance == "<battalion-u3-b2-g5-generic>");

    auto kb = parse_kb(generate_battalion_kb({3, 2, 5, true}));
    CHECK(kb.instances.size() == 1);
    CHECK(kb.assertions.empty());
    CHECK(kb.classes.at("Group").attributes.at("has-unit").complex()->bound == 3);
}

TEST_CASE("bench config parsing") {
    auto c = parse_bench_config(R"({"units": {"from": 2, "to": 5}, "batteries": 3, "repetitions": 2,
        "cells": [{"backend": "structured", "reuse": true, "qmode": "naive"}]})");
    CHECK(c.units == std::vector<int>{2, 3, 4, 5});
    CHECK(c.batteries == 3);
    REQUIRE(c.cells.size() == 1);
    CHECK(c.cells[0].qmode == "naive");

    CHECK(parse_bench_config(R"({"units": [1, 9]})").units == std::vector<int>{1, 9});
    CHECK_THROWS_AS(parse_bench_config(R"({"units": [0]})"), Error);
    CHECK_THROWS_AS(parse_bench_config(R"({"cells": [{"backend": "magic"}]})"), Error);
    CHECK_THROWS_AS(parse_bench_config("not json"), Error);
    CHECK_NOTHROW(BenchConfig{}.check());
}

TEST_CASE("bench cells agree on the probe and report counters") {
    BenchConfig config;
    config.units = {1, 2};
    config.batteries = 2;
    config.groups = 3;
    config.repetitions = 2;
    auto rows = run_matrix(config, true);
    REQUIRE(rows.size() == config.units.size() * config.cells.size());
    for (const auto& r : rows) {
        CAPTURE(r.cell.backend);
        REQUIRE(r.seconds.has_value());
        CHECK(r.max_clique > 0);
        const auto& ref = rows[r.units == 1 ? 0 : config.cells.size()].probe;
        REQUIRE(r.probe.size() == ref.size());
        for (size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(r.probe[i] - ref[i]) < 1e-9);
        if (r.cell.backend == "structured") CHECK(r.cache_misses > 0);
    }

    auto csv = bench_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == kBenchCsvHeader);
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == static_cast<int>(rows.size()));
}

TEST_CASE("bench cells over budget are reported as timeouts") {
    BenchConfig config;
    config.units = {3};
    config.batteries = 4;
    config.budget_seconds = 1e-6;
    config.repetitions = 1;
    auto row = run_cell({"kbmc", false, "naive"}, 3, config);
    CHECK_FALSE(row.seconds.has_value());
    auto csv = bench_csv({row});
    CHECK(csv.find("timeout") != std::string::npos);
}
