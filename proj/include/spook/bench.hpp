#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spook/lang.hpp"

namespace spook {

struct BattalionSpec {
    int units = 4;      // bound of each group's has-unit
    int batteries = 4;
    int groups = 11;    // group kinds per battery
    /// Leave has-battery unasserted so batteries are generic fillers.
    bool generic_batteries = false;
};

SourceKB generate_battalion_kb(const BattalionSpec& spec);
SourceKB generate_battalion_kb(int units, int batteries);

/// The evidence sequence used for the hit-probability walkthrough: the prior,
/// then heavy fire, then no damage reports from battery-1's launchers, then
/// good hiding support.
std::vector<Observation> battalion_evidence_steps();
QueryExpr battalion_probe_query();

struct BenchCell {
    std::string backend;  // "kbmc" or "structured"
    bool reuse = true;
    std::string qmode = "combinatoric";  // or "naive"
};

struct BenchConfig {
    std::vector<int> units{1, 2, 3, 4};
    int batteries = 4;
    int groups = 11;
    std::vector<BenchCell> cells{{"kbmc", false, "naive"},
                                 {"structured", false, "combinatoric"},
                                 {"structured", true, "combinatoric"},
                                 {"structured", true, "naive"}};
    int repetitions = 5;
    double budget_seconds = 60.0;

    void check() const;
};

BenchConfig parse_bench_config(const std::string& json_text);

struct BenchRow {
    BenchCell cell;
    int units = 0;
    std::optional<double> seconds;  // median; empty on timeout
    int max_clique = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::vector<double> probe;  // joint posterior of the probe query
};

/// Runs one cell on one generated KB. Every repetition, including one untimed
/// warm-up, starts from a fresh engine, so times are cold end-to-end query
/// costs.
BenchRow run_cell(const BenchCell& cell, int units, const BenchConfig& config);
std::vector<BenchRow> run_matrix(const BenchConfig& config, bool parallel = false);

inline constexpr const char* kBenchCsvHeader = "backend,reuse,qmode,units,seconds,max_clique,cache_hits,cache_misses";
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace spook
