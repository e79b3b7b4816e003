#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "spook/factor.hpp"
#include "spook/network.hpp"

namespace spook {

struct CliqueStats {
    std::vector<VarId> order;
    int max_clique = 0;        // nodes in the largest elimination clique
    double total_cells = 0;    // sum of clique table sizes
};

struct InferenceOptions {
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct InferenceCounters {
    std::uint64_t ops = 0;
    int max_clique = 0;
};

/// Normalized joint over `targets` (in the given order) given `evidence`.
/// Free input nodes act as uniform priors. Throws ImpossibleEvidence when the
/// evidence has probability below 1e-300.
Factor query(const DiscreteNetwork& net, const std::vector<VarId>& targets, const Evidence& evidence = {},
             InferenceCounters* counters = nullptr, const InferenceOptions& opts = {});

/// Rows P(outputs | input = v) for every state v of the free input node; each
/// row is the joint over `outputs` with the last output fastest.
std::vector<std::vector<double>> conditional_query(const DiscreteNetwork& net, const std::vector<VarId>& outputs, VarId input,
                                                   const Evidence& evidence = {}, InferenceCounters* counters = nullptr,
                                                   const InferenceOptions& opts = {});

/// Brute-force normalized joint over all non-evidence nodes in id order.
Factor joint_enumerate(const DiscreteNetwork& net, const Evidence& evidence = {}, std::uint64_t cap = 1ull << 20);

/// Min-fill elimination of the moralized network, ties broken by node id.
CliqueStats triangulation_stats(const DiscreteNetwork& net);

/// Greedy min-fill order over an undirected interaction graph.
CliqueStats min_fill_order(const std::vector<std::vector<VarId>>& cliques, const std::vector<VarId>& eliminate,
                           const std::vector<int>& cards);

inline constexpr double kImpossibleEvidence = 1e-300;

}  // namespace spook
