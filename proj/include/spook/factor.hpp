#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace spook {

using VarId = int;

/// Nonnegative table over an ordered scope; the last variable varies fastest.
struct Factor {
    std::vector<VarId> vars;
    std::vector<int> cards;
    std::vector<double> table;

    static Factor scalar(double v) { return Factor{{}, {}, {v}}; }

    size_t size() const { return table.size(); }
    int position(VarId v) const;  // -1 when absent
    bool contains(VarId v) const { return position(v) >= 0; }
    double sum() const;
    /// Divides by the sum and returns it.
    double normalize();
};

/// Product of `factors` summed down to `keep` (in that order). Variables of
/// the inputs not in `keep` are summed out. `ops` accumulates the number of
/// multiply-add steps performed; `tick` is called periodically.
Factor combine(const std::vector<const Factor*>& factors, const std::vector<VarId>& keep, std::uint64_t* ops = nullptr,
               const std::function<void()>& tick = {});

Factor product(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, VarId v);
/// Sums `f` down to `keep`, reordered to match it.
Factor marginalize(const Factor& f, const std::vector<VarId>& keep);
/// Slices `f` at v = value and drops v from the scope.
Factor reduce(const Factor& f, VarId v, int value);

}  // namespace spook
