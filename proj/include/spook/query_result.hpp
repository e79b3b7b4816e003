#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spook/model.hpp"

namespace spook {

struct EngineStats {
    std::uint64_t ops = 0;          // factor multiply-add steps
    std::uint64_t aggregate_ops = 0;  // quantifier recurrence steps
    int max_clique = 0;             // largest clique over every network built
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t cache_entries = 0;
    std::uint64_t local_networks = 0;
    std::uint64_t network_nodes = 0;  // nodes in the largest network built
    double seconds = 0;
};

/// Posterior joint over the query targets; the last target varies fastest.
struct QueryResult {
    std::vector<ChainRef> targets;
    std::vector<std::vector<std::string>> ranges;
    std::vector<double> joint;
    EngineStats stats;

    std::vector<double> marginal(size_t target) const;
    double probability(size_t target, const std::string& value) const;
};

}  // namespace spook
