#pragma once

#include <cstdint>
#include <vector>

#include "spook/model.hpp"
#include "spook/network.hpp"

namespace spook {

/// Distribution of the number of successes in n draws with success
/// probability p, by the recurrence P_{m+1}(k) = (1-p) P_m(k) + p P_m(k-1).
std::vector<double> binomial_cpt(double p, int n);

/// Distributions P_0 .. P_n over count vectors in {0..n}^l from the vector
/// recurrence P_{m+1}(k) = sum_c p_c P_m(k - c). `contribution` has 2^l
/// entries indexed by c with the first coordinate most significant; count
/// vectors are indexed the same way in base n+1.
std::vector<std::vector<double>> quantifier_joint_cpt(const std::vector<double>& contribution, int l, int n,
                                                      std::uint64_t* ops = nullptr);

/// Marginal of a quantifier count when the number of draws m is uncertain.
std::vector<double> quantifier_joint_mixture(const std::vector<double>& contribution, int l, int n,
                                             const std::vector<double>& number_dist);

inline constexpr int kNaiveCap = 16;

/// Deterministic count of parents in a matching state. matches[i][s] marks
/// whether state s of parent i counts. Child range 0..range_max.
Cpt quantifier_cpt_naive(const std::vector<std::vector<char>>& matches, int range_max);

/// Convenience form for n identical parents with `card` states counting
/// state `v_index`.
Cpt quantifier_cpt_naive(int n, int card, int v_index);

/// As quantifier_cpt_naive with a leading #A parent over 0..n: when #A = m,
/// only the first m parents are counted.
Cpt quantifier_cpt_gated(const std::vector<std::vector<char>>& matches, int range_max);

/// Output copies the parent chosen by the selector (parents: selector then
/// one per choice). Throws RangeMismatch if a choice's range differs.
Cpt multiplexer_cpt(int selector_card, const std::vector<std::vector<std::string>>& choice_ranges,
                    const std::vector<std::string>& output_range);

/// Deterministic projection of a joint node (components in base `cards`,
/// first most significant) onto component `which`.
Cpt projection_cpt(const std::vector<int>& cards, size_t which);

/// Rewrites the counting quantifier node to take `number` as an extra first
/// parent, counting only the first m fillers when the number is m.
void number_gate(DiscreteNetwork& net, VarId number, VarId quantifier, const std::vector<std::vector<char>>& matches);

}  // namespace spook
