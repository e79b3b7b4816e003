#include "spook/factor.hpp"

#include <algorithm>
#include <numeric>

#include "spook/error.hpp"

namespace spook {

int Factor::position(VarId v) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == v) return static_cast<int>(i);
    return -1;
}

double Factor::sum() const { return std::accumulate(table.begin(), table.end(), 0.0); }

double Factor::normalize() {
    double s = sum();
    if (s > 0)
        for (double& x : table) x /= s;
    return s;
}

Factor combine(const std::vector<const Factor*>& factors, const std::vector<VarId>& keep, std::uint64_t* ops,
               const std::function<void()>& tick) {
    // union scope: kept variables first, summed variables last (fastest)
    const size_t k = factors.size();
    const size_t nk = keep.size();
    thread_local std::vector<VarId> scope;
    thread_local std::vector<int> cards;
    scope.assign(keep.begin(), keep.end());
    cards.assign(nk, -1);
    for (const auto* f : factors) {
        for (size_t i = 0; i < f->vars.size(); ++i) {
            auto at = static_cast<size_t>(std::find(scope.begin(), scope.end(), f->vars[i]) - scope.begin());
            if (at == scope.size()) {
                scope.push_back(f->vars[i]);
                cards.push_back(f->cards[i]);
            } else if (cards[at] < 0) {
                cards[at] = f->cards[i];
            }
        }
    }
    for (size_t i = 0; i < nk; ++i)
        if (cards[i] < 0) throw Error(ErrorCode::InvalidKB, "kept variable missing from every factor");
    // summed variables in ascending id order (insertion sort, scopes are short)
    for (size_t i = nk + 1; i < scope.size(); ++i)
        for (size_t j = i; j > nk && scope[j - 1] > scope[j]; --j) {
            std::swap(scope[j - 1], scope[j]);
            std::swap(cards[j - 1], cards[j]);
        }

    const size_t n = scope.size();
    size_t out_size = 1;
    for (size_t i = 0; i < nk; ++i) out_size *= static_cast<size_t>(cards[i]);
    size_t inner = 1;
    for (size_t i = nk; i < n; ++i) inner *= static_cast<size_t>(cards[i]);

    // strides[pos * k + j]: step of factor j when scope position pos advances
    thread_local std::vector<size_t> strides;
    strides.assign(n * k + n + k, 0);
    size_t* digit = strides.data() + n * k;
    size_t* idx = digit + n;
    for (size_t j = 0; j < k; ++j) {
        const Factor& f = *factors[j];
        size_t s = 1;
        for (size_t i = f.vars.size(); i-- > 0;) {
            auto at = static_cast<size_t>(std::find(scope.begin(), scope.end(), f.vars[i]) - scope.begin());
            strides[at * k + j] += s;
            s *= static_cast<size_t>(f.cards[i]);
        }
    }

    Factor out;
    out.vars = keep;
    out.cards.assign(cards.begin(), cards.begin() + static_cast<long>(nk));
    out.table.assign(out_size, 0.0);

    thread_local std::vector<const double*> tables;
    tables.resize(k);
    for (size_t j = 0; j < k; ++j) tables[j] = factors[j]->table.data();
    std::uint64_t steps = 0;
    for (size_t o = 0; o < out_size; ++o) {
        double acc = 0;
        for (size_t t = 0; t < inner; ++t) {
            double p = 1.0;
            for (size_t j = 0; j < k; ++j) p *= tables[j][idx[j]];
            acc += p;
            // odometer increment, last position fastest
            for (size_t pos = n; pos-- > 0;) {
                const size_t* st = strides.data() + pos * k;
                if (++digit[pos] < static_cast<size_t>(cards[pos])) {
                    for (size_t j = 0; j < k; ++j) idx[j] += st[j];
                    break;
                }
                for (size_t j = 0; j < k; ++j) idx[j] -= st[j] * static_cast<size_t>(cards[pos] - 1);
                digit[pos] = 0;
            }
        }
        out.table[o] = acc;
        steps += inner * (k ? k : 1);
        if (tick && (o & 0x3ff) == 0) tick();
    }
    if (ops) *ops += steps;
    return out;
}

Factor product(const Factor& a, const Factor& b) {
    std::vector<VarId> keep = a.vars;
    for (VarId v : b.vars)
        if (!a.contains(v)) keep.push_back(v);
    return combine({&a, &b}, keep);
}

Factor sum_out(const Factor& f, VarId v) {
    std::vector<VarId> keep;
    for (VarId x : f.vars)
        if (x != v) keep.push_back(x);
    return combine({&f}, keep);
}

Factor marginalize(const Factor& f, const std::vector<VarId>& keep) { return combine({&f}, keep); }

Factor reduce(const Factor& f, VarId v, int value) {
    int p = f.position(v);
    if (p < 0) return f;
    Factor out;
    size_t after = 1;
    for (size_t i = static_cast<size_t>(p) + 1; i < f.vars.size(); ++i) after *= static_cast<size_t>(f.cards[i]);
    size_t card = static_cast<size_t>(f.cards[p]);
    size_t before = f.table.size() / (after * card);
    for (size_t i = 0; i < f.vars.size(); ++i) {
        if (static_cast<int>(i) == p) continue;
        out.vars.push_back(f.vars[i]);
        out.cards.push_back(f.cards[i]);
    }
    out.table.reserve(before * after);
    for (size_t b = 0; b < before; ++b)
        for (size_t a = 0; a < after; ++a) out.table.push_back(f.table[(b * card + static_cast<size_t>(value)) * after + a]);
    return out;
}

}  // namespace spook
