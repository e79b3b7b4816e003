#include "spook/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spook/error.hpp"

namespace spook {

CliqueStats min_fill_order(const std::vector<std::vector<VarId>>& cliques, const std::vector<VarId>& eliminate,
                           const std::vector<int>& cards) {
    const size_t n = cards.size();
    std::vector<std::vector<VarId>> adj(n);
    for (auto& l : adj) l.reserve(8);
    auto link = [&](VarId a, VarId b) {
        auto& l = adj[static_cast<size_t>(a)];
        auto it = std::lower_bound(l.begin(), l.end(), b);
        if (it == l.end() || *it != b) l.insert(it, b);
    };
    for (const auto& c : cliques)
        for (VarId a : c)
            for (VarId b : c)
                if (a != b) link(a, b);
    std::vector<char> pending(n, 0);
    for (VarId v : eliminate) pending[static_cast<size_t>(v)] = 1;

    std::vector<unsigned> stamp(n, 0);
    unsigned epoch = 0;
    auto fill = [&](VarId v) {
        const auto& nb = adj[static_cast<size_t>(v)];
        ++epoch;
        for (VarId x : nb) stamp[static_cast<size_t>(x)] = epoch;
        long present = 0;
        for (VarId x : nb)
            for (VarId y : adj[static_cast<size_t>(x)])
                if (stamp[static_cast<size_t>(y)] == epoch) ++present;
        long k = static_cast<long>(nb.size());
        return k * (k - 1) / 2 - present / 2;
    };
    std::vector<long> score(n, 0);
    for (VarId v : eliminate) score[static_cast<size_t>(v)] = fill(v);

    CliqueStats st;
    std::vector<VarId> live(eliminate);
    std::sort(live.begin(), live.end());
    std::vector<VarId> nb, touched;
    while (!live.empty()) {
        // lowest fill, ties to the lowest id
        size_t at = 0;
        for (size_t i = 1; i < live.size(); ++i)
            if (score[static_cast<size_t>(live[i])] < score[static_cast<size_t>(live[at])]) at = i;
        VarId v = live[at];
        live.erase(live.begin() + static_cast<long>(at));
        pending[static_cast<size_t>(v)] = 0;
        st.order.push_back(v);
        nb.swap(adj[static_cast<size_t>(v)]);
        adj[static_cast<size_t>(v)].clear();
        double cells = cards.at(static_cast<size_t>(v));
        for (VarId u : nb) cells *= cards.at(static_cast<size_t>(u));
        st.max_clique = std::max(st.max_clique, static_cast<int>(nb.size()) + 1);
        st.total_cells += cells;

        for (size_t i = 0; i < nb.size(); ++i) {
            auto& l = adj[static_cast<size_t>(nb[i])];
            l.erase(std::lower_bound(l.begin(), l.end(), v));
            for (size_t j = i + 1; j < nb.size(); ++j) {
                link(nb[i], nb[j]);
                link(nb[j], nb[i]);
            }
        }
        unsigned mark = ++epoch;
        touched.clear();
        auto touch = [&](VarId w) {
            auto x = static_cast<size_t>(w);
            if (pending[x] && stamp[x] != mark) {
                stamp[x] = mark;
                touched.push_back(w);
            }
        };
        for (VarId u : nb) {
            touch(u);
            for (VarId w : adj[static_cast<size_t>(u)]) touch(w);
        }
        for (VarId u : touched) score[static_cast<size_t>(u)] = fill(u);
    }
    return st;
}

CliqueStats triangulation_stats(const DiscreteNetwork& net) {
    std::vector<std::vector<VarId>> families;
    std::vector<VarId> all;
    std::vector<int> cards;
    for (size_t i = 0; i < net.size(); ++i) {
        VarId v = static_cast<VarId>(i);
        std::vector<VarId> fam = net.node(v).parents;
        fam.push_back(v);
        families.push_back(std::move(fam));
        all.push_back(v);
        cards.push_back(net.node(v).card());
    }
    return min_fill_order(families, all, cards);
}

namespace {

std::vector<char> ancestors(const DiscreteNetwork& net, const std::vector<VarId>& seeds) {
    std::vector<char> keep(net.size(), 0);
    std::vector<VarId> stack(seeds.begin(), seeds.end());
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        if (keep[static_cast<size_t>(v)]) continue;
        keep[static_cast<size_t>(v)] = 1;
        for (VarId p : net.node(v).parents) stack.push_back(p);
    }
    return keep;
}

void check_deadline(const InferenceOptions& opts) {
    if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline) {
        throw Error(ErrorCode::Timeout, "inference exceeded its time budget");
    }
}

}  // namespace

Factor query(const DiscreteNetwork& net, const std::vector<VarId>& targets, const Evidence& evidence,
             InferenceCounters* counters, const InferenceOptions& opts) {
    if (targets.empty()) throw Error(ErrorCode::InvalidKB, "query needs at least one target");
    for (const auto& [v, val] : evidence) {
        if (val < 0 || val >= net.node(v).card()) throw Error(ErrorCode::BadValue, "evidence value out of range for '" + net.node(v).name + "'");
    }
    std::vector<VarId> free_targets;
    for (VarId t : targets)
        if (!evidence.count(t) && std::find(free_targets.begin(), free_targets.end(), t) == free_targets.end())
            free_targets.push_back(t);

    std::vector<VarId> seeds = targets;
    for (const auto& [v, val] : evidence) seeds.push_back(v);
    auto relevant = ancestors(net, seeds);

    std::vector<Factor> factors;
    factors.reserve(2 * net.size() + 1);
    std::vector<VarId> eliminate;
    std::vector<int> cards(net.size());
    for (size_t i = 0; i < net.size(); ++i) {
        cards[i] = net.node(static_cast<VarId>(i)).card();
        if (!relevant[i]) continue;
        VarId v = static_cast<VarId>(i);
        Factor f = net.cpt_factor(v);
        if (!evidence.empty()) {
            for (VarId x : std::vector<VarId>(f.vars)) {
                auto ev = evidence.find(x);
                if (ev != evidence.end()) f = reduce(f, x, ev->second);
            }
        }
        factors.push_back(std::move(f));
        if (!evidence.count(v) && std::find(free_targets.begin(), free_targets.end(), v) == free_targets.end())
            eliminate.push_back(v);
    }

    std::vector<std::vector<VarId>> scopes;
    for (const auto& f : factors) scopes.push_back(f.vars);
    for (VarId t : free_targets) scopes.push_back({t});
    auto plan = min_fill_order(scopes, eliminate, cards);

    auto tick = [&] { check_deadline(opts); };
    std::uint64_t ops = 0;
    int max_clique = static_cast<int>(free_targets.size());
    double log_scale = 0;
    std::vector<char> alive(factors.size(), 1);
    std::vector<std::vector<size_t>> by_var(net.size());
    for (size_t i = 0; i < factors.size(); ++i)
        for (VarId x : factors[i].vars) by_var[static_cast<size_t>(x)].push_back(i);
    std::vector<const Factor*> bucket;
    std::vector<VarId> keep;
    for (VarId v : plan.order) {
        check_deadline(opts);
        bucket.clear();
        keep.clear();
        for (size_t i : by_var[static_cast<size_t>(v)]) {
            if (!alive[i]) continue;
            bucket.push_back(&factors[i]);
            alive[i] = 0;
            for (VarId x : factors[i].vars)
                if (x != v && std::find(keep.begin(), keep.end(), x) == keep.end()) keep.push_back(x);
        }
        if (bucket.empty()) continue;
        std::sort(keep.begin(), keep.end());
        max_clique = std::max(max_clique, static_cast<int>(keep.size()) + 1);
        Factor r = combine(bucket, keep, &ops, tick);
        double s = r.normalize();
        if (!(s > 0)) throw Error(ErrorCode::ImpossibleEvidence, "evidence has probability zero");
        log_scale += std::log(s);
        for (VarId x : r.vars) by_var[static_cast<size_t>(x)].push_back(factors.size());
        factors.push_back(std::move(r));
        alive.push_back(1);
    }
    std::vector<const Factor*> rest;
    for (size_t i = 0; i < factors.size(); ++i)
        if (alive[i]) rest.push_back(&factors[i]);
    Factor joint = combine(rest, free_targets, &ops, tick);
    double total = joint.sum();
    if (!(total > 0) || std::log(total) + log_scale < std::log(kImpossibleEvidence)) {
        throw Error(ErrorCode::ImpossibleEvidence, "evidence has probability zero");
    }
    joint.normalize();
    if (counters) {
        counters->ops += ops;
        counters->max_clique = std::max(counters->max_clique, max_clique);
    }
    if (free_targets.size() == targets.size() && free_targets == targets) return joint;

    // expand to the requested order, observed targets as point masses
    Factor out;
    out.vars = targets;
    for (VarId t : targets) out.cards.push_back(net.node(t).card());
    size_t n = 1;
    for (int c : out.cards) n *= static_cast<size_t>(c);
    out.table.assign(n, 0.0);
    std::vector<int> digit(targets.size(), 0);
    for (size_t i = 0; i < n; ++i) {
        bool ok = true;
        for (size_t k = 0; k < targets.size() && ok; ++k) {
            auto ev = evidence.find(targets[k]);
            if (ev != evidence.end() && ev->second != digit[k]) ok = false;
            for (size_t j = 0; j < k && ok; ++j)
                if (targets[j] == targets[k] && digit[j] != digit[k]) ok = false;
        }
        if (ok) {
            size_t idx = 0;
            for (size_t k = 0; k < free_targets.size(); ++k) {
                auto at = std::find(targets.begin(), targets.end(), free_targets[k]) - targets.begin();
                idx = idx * static_cast<size_t>(joint.cards[k]) + static_cast<size_t>(digit[static_cast<size_t>(at)]);
            }
            out.table[i] = joint.table[idx];
        }
        for (int pos = static_cast<int>(targets.size()) - 1; pos >= 0; --pos) {
            if (++digit[pos] < out.cards[pos]) break;
            digit[pos] = 0;
        }
    }
    return out;
}

std::vector<std::vector<double>> conditional_query(const DiscreteNetwork& net, const std::vector<VarId>& outputs, VarId input,
                                                   const Evidence& evidence, InferenceCounters* counters,
                                                   const InferenceOptions& opts) {
    if (!net.node(input).input) {
        throw Error(ErrorCode::InputHasCPD, "'" + net.node(input).name + "' is not a free input node");
    }
    if (std::find(outputs.begin(), outputs.end(), input) != outputs.end()) {
        throw Error(ErrorCode::InvalidKB, "the input node cannot also be an output");
    }
    std::vector<VarId> targets{input};
    targets.insert(targets.end(), outputs.begin(), outputs.end());
    Factor joint = query(net, targets, evidence, counters, opts);
    size_t k = static_cast<size_t>(net.node(input).card());
    size_t width = joint.size() / k;
    std::vector<std::vector<double>> rows(k);
    for (size_t v = 0; v < k; ++v) {
        rows[v].assign(joint.table.begin() + static_cast<long>(v * width), joint.table.begin() + static_cast<long>((v + 1) * width));
        double s = 0;
        for (double x : rows[v]) s += x;
        if (!(s > 0)) throw Error(ErrorCode::ImpossibleEvidence, "input state '" + net.node(input).states[v] + "' is impossible");
        for (double& x : rows[v]) x /= s;
    }
    return rows;
}

Factor joint_enumerate(const DiscreteNetwork& net, const Evidence& evidence, std::uint64_t cap) {
    std::vector<VarId> free;
    double space = 1;
    for (size_t i = 0; i < net.size(); ++i) {
        VarId v = static_cast<VarId>(i);
        if (evidence.count(v)) continue;
        free.push_back(v);
        space *= net.node(v).card();
    }
    if (space > static_cast<double>(cap)) {
        throw Error(ErrorCode::StateSpaceTooLarge,
                    "joint state space " + std::to_string(static_cast<long double>(space)) + " exceeds cap " + std::to_string(cap));
    }
    std::vector<int> value(net.size(), 0);
    for (const auto& [v, val] : evidence) value[static_cast<size_t>(v)] = val;
    Factor out;
    out.vars = free;
    for (VarId v : free) out.cards.push_back(net.node(v).card());
    out.table.assign(static_cast<size_t>(space), 0.0);
    std::vector<std::vector<size_t>> parent_stride(net.size());
    for (size_t i = 0; i < net.size(); ++i) {
        const auto& n = net.node(static_cast<VarId>(i));
        parent_stride[i].assign(n.parents.size(), 0);
        size_t s = 1;
        for (int p = static_cast<int>(n.parents.size()) - 1; p >= 0; --p) {
            parent_stride[i][static_cast<size_t>(p)] = s;
            s *= static_cast<size_t>(net.node(n.parents[static_cast<size_t>(p)]).card());
        }
    }
    for (size_t idx = 0; idx < out.table.size(); ++idx) {
        double p = 1;
        for (size_t i = 0; i < net.size() && p > 0; ++i) {
            const auto& n = net.node(static_cast<VarId>(i));
            if (n.input) {
                p /= n.card();
                continue;
            }
            size_t row = 0;
            for (size_t k = 0; k < n.parents.size(); ++k)
                row += parent_stride[i][k] * static_cast<size_t>(value[static_cast<size_t>(n.parents[k])]);
            p *= n.cpt.rows[row][static_cast<size_t>(value[i])];
        }
        out.table[idx] = p;
        for (int pos = static_cast<int>(free.size()) - 1; pos >= 0; --pos) {
            auto& d = value[static_cast<size_t>(free[static_cast<size_t>(pos)])];
            if (++d < out.cards[static_cast<size_t>(pos)]) break;
            d = 0;
        }
    }
    double s = out.normalize();
    if (!(s > kImpossibleEvidence)) throw Error(ErrorCode::ImpossibleEvidence, "evidence has probability zero");
    return out;
}

}  // namespace spook
