#include "spook/aggregate.hpp"

#include "spook/error.hpp"

namespace spook {

std::vector<double> binomial_cpt(double p, int n) {
    std::vector<double> cur{1.0};
    for (int m = 0; m < n; ++m) {
        std::vector<double> next(cur.size() + 1, 0.0);
        for (size_t k = 0; k < next.size(); ++k) {
            if (k < cur.size()) next[k] += (1 - p) * cur[k];
            if (k > 0) next[k] += p * cur[k - 1];
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<std::vector<double>> quantifier_joint_cpt(const std::vector<double>& contribution, int l, int n,
                                                      std::uint64_t* ops) {
    if (l < 1) throw Error(ErrorCode::InvalidKB, "quantifier joint needs at least one coordinate");
    size_t nc = size_t{1} << l;
    if (contribution.size() != nc) throw Error(ErrorCode::InvalidKB, "contribution table has the wrong size");
    size_t base = static_cast<size_t>(n) + 1;
    size_t cells = 1;
    for (int i = 0; i < l; ++i) cells *= base;

    // offset of each contribution vector c inside the count-vector index
    std::vector<size_t> shift(nc, 0);
    std::vector<std::vector<int>> bits(nc, std::vector<int>(static_cast<size_t>(l)));
    for (size_t c = 0; c < nc; ++c) {
        size_t off = 0;
        for (int i = 0; i < l; ++i) {
            int b = static_cast<int>((c >> (l - 1 - i)) & 1u);
            bits[c][static_cast<size_t>(i)] = b;
            off = off * base + static_cast<size_t>(b);
        }
        shift[c] = off;
    }

    std::vector<std::vector<double>> out;
    std::vector<double> cur(cells, 0.0);
    cur[0] = 1.0;
    out.push_back(cur);
    std::vector<int> digit(static_cast<size_t>(l));
    std::uint64_t steps = 0;
    for (int m = 0; m < n; ++m) {
        std::vector<double> next(cells, 0.0);
        std::fill(digit.begin(), digit.end(), 0);
        for (size_t k = 0; k < cells; ++k) {
            double pk = cur[k];
            if (pk != 0.0) {
                for (size_t c = 0; c < nc; ++c) {
                    ++steps;
                    bool fits = true;
                    for (int i = 0; i < l; ++i)
                        if (bits[c][static_cast<size_t>(i)] && digit[static_cast<size_t>(i)] == n) fits = false;
                    if (fits) next[k + shift[c]] += contribution[c] * pk;
                }
            } else {
                steps += nc;
            }
            for (int pos = l - 1; pos >= 0; --pos) {
                if (++digit[static_cast<size_t>(pos)] < static_cast<int>(base)) break;
                digit[static_cast<size_t>(pos)] = 0;
            }
        }
        cur = std::move(next);
        out.push_back(cur);
    }
    if (ops) *ops += steps;
    return out;
}

std::vector<double> quantifier_joint_mixture(const std::vector<double>& contribution, int l, int n,
                                             const std::vector<double>& number_dist) {
    auto ps = quantifier_joint_cpt(contribution, l, n);
    std::vector<double> out(ps.front().size(), 0.0);
    for (size_t m = 0; m < number_dist.size() && m < ps.size(); ++m)
        for (size_t k = 0; k < out.size(); ++k) out[k] += number_dist[m] * ps[m][k];
    return out;
}

namespace {

Cpt count_cpt(const std::vector<std::vector<char>>& matches, int range_max, bool gated) {
    size_t n = matches.size();
    if (static_cast<int>(n) > kNaiveCap) {
        throw Error(ErrorCode::NaiveCapExceeded,
                    "naive quantifier over " + std::to_string(n) + " fillers exceeds the cap of " + std::to_string(kNaiveCap));
    }
    std::vector<int> cards;
    if (gated) cards.push_back(static_cast<int>(n) + 1);
    for (const auto& m : matches) cards.push_back(static_cast<int>(m.size()));
    size_t rows = 1;
    for (int c : cards) rows *= static_cast<size_t>(c);
    Cpt cpt;
    cpt.rows.reserve(rows);
    std::vector<int> digit(cards.size(), 0);
    for (size_t r = 0; r < rows; ++r) {
        size_t first = gated ? 1 : 0;
        size_t active = gated ? static_cast<size_t>(digit[0]) : n;
        int count = 0;
        for (size_t i = 0; i < active; ++i)
            if (matches[i][static_cast<size_t>(digit[first + i])]) ++count;
        std::vector<double> row(static_cast<size_t>(range_max) + 1, 0.0);
        row.at(static_cast<size_t>(count)) = 1.0;
        cpt.rows.push_back(std::move(row));
        for (int pos = static_cast<int>(cards.size()) - 1; pos >= 0; --pos) {
            if (++digit[static_cast<size_t>(pos)] < cards[static_cast<size_t>(pos)]) break;
            digit[static_cast<size_t>(pos)] = 0;
        }
    }
    return cpt;
}

}  // namespace

Cpt quantifier_cpt_naive(const std::vector<std::vector<char>>& matches, int range_max) {
    return count_cpt(matches, range_max, false);
}

Cpt quantifier_cpt_naive(int n, int card, int v_index) {
    std::vector<char> m(static_cast<size_t>(card), 0);
    m.at(static_cast<size_t>(v_index)) = 1;
    return count_cpt(std::vector<std::vector<char>>(static_cast<size_t>(n), m), n, false);
}

Cpt quantifier_cpt_gated(const std::vector<std::vector<char>>& matches, int range_max) {
    return count_cpt(matches, range_max, true);
}

Cpt multiplexer_cpt(int selector_card, const std::vector<std::vector<std::string>>& choice_ranges,
                    const std::vector<std::string>& output_range) {
    if (static_cast<int>(choice_ranges.size()) != selector_card) {
        throw Error(ErrorCode::RangeMismatch, "multiplexer needs one parent per selector value");
    }
    for (const auto& r : choice_ranges)
        if (r != output_range) throw Error(ErrorCode::RangeMismatch, "multiplexer choice range differs from the output range");
    size_t card = output_range.size();
    size_t rows = static_cast<size_t>(selector_card);
    for (size_t i = 0; i < choice_ranges.size(); ++i) rows *= card;
    Cpt cpt;
    cpt.rows.reserve(rows);
    std::vector<size_t> digit(choice_ranges.size() + 1, 0);
    for (size_t r = 0; r < rows; ++r) {
        std::vector<double> row(card, 0.0);
        row[digit[1 + digit[0]]] = 1.0;
        cpt.rows.push_back(std::move(row));
        for (int pos = static_cast<int>(digit.size()) - 1; pos >= 0; --pos) {
            size_t lim = pos == 0 ? static_cast<size_t>(selector_card) : card;
            if (++digit[static_cast<size_t>(pos)] < lim) break;
            digit[static_cast<size_t>(pos)] = 0;
        }
    }
    return cpt;
}

Cpt projection_cpt(const std::vector<int>& cards, size_t which) {
    size_t total = 1;
    for (int c : cards) total *= static_cast<size_t>(c);
    size_t after = 1;
    for (size_t i = which + 1; i < cards.size(); ++i) after *= static_cast<size_t>(cards[i]);
    size_t card = static_cast<size_t>(cards.at(which));
    Cpt cpt;
    cpt.rows.reserve(total);
    for (size_t r = 0; r < total; ++r) {
        std::vector<double> row(card, 0.0);
        row[(r / after) % card] = 1.0;
        cpt.rows.push_back(std::move(row));
    }
    return cpt;
}

void number_gate(DiscreteNetwork& net, VarId number, VarId quantifier, const std::vector<std::vector<char>>& matches) {
    const auto& q = net.node(quantifier);
    if (net.node(number).card() != static_cast<int>(matches.size()) + 1) {
        throw Error(ErrorCode::RangeMismatch, "number node range does not match the filler count");
    }
    std::vector<VarId> parents{number};
    for (VarId p : q.parents)
        if (p != number) parents.push_back(p);
    if (parents.size() != matches.size() + 1) throw Error(ErrorCode::RangeMismatch, "quantifier parents do not match the fillers");
    int range_max = q.card() - 1;
    net.define(quantifier, std::move(parents), quantifier_cpt_gated(matches, range_max));
}

}  // namespace spook
