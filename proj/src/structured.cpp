#include "spook/structured.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <unordered_map>

#include "spook/aggregate.hpp"
#include "spook/lang.hpp"

namespace spook {

SubQuery SubQuery::canonical() const {
    SubQuery q = *this;
    std::sort(q.outputs.begin(), q.outputs.end());
    q.outputs.erase(std::unique(q.outputs.begin(), q.outputs.end()), q.outputs.end());
    return q;
}

std::string SubQuery::key() const {
    std::string k = target + "|";
    for (size_t i = 0; i < outputs.size(); ++i) k += (i ? "," : "") + outputs[i].str();
    return k + "|" + entry.value_or("");
}

std::string InputRef::str() const { return instance ? *instance + "::" + chain.str() : chain.str(); }

namespace {

std::vector<std::string> index_states(size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

size_t product_size(const std::vector<std::vector<std::string>>& ranges) {
    size_t n = 1;
    for (const auto& r : ranges) n *= r.size();
    return n;
}

std::vector<int> cards_of(const std::vector<std::vector<std::string>>& ranges) {
    std::vector<int> out;
    for (const auto& r : ranges) out.push_back(static_cast<int>(r.size()));
    return out;
}

// per-network tables keyed by the (object, attribute) rank, which is unique
template <class T>
using ByRank = std::unordered_map<int, T>;

template <class T>
T* lookup(ByRank<T>& m, int rank) {
    auto it = m.find(rank);
    return it == m.end() ? nullptr : &it->second;
}

}  // namespace

/// Local network for one SolveQuery call (class mode) or for the top-level
/// object (top mode).
class LocalBuilder {
public:
    LocalBuilder(StructuredEngine& eng, int depth) : eng_(eng), kb_(*eng.kb_), depth_(depth) {}

    SubQueryResult solve_class(const SubQuery& q) {
        top_ = false;
        self_ = q.target;
        entry_ = q.entry;
        if (!kb_.kb().is_class(self_)) throw Error(ErrorCode::UnknownReference, "subquery target '" + self_ + "' is not a class");
        std::vector<VarId> outputs;
        SubQueryResult res;
        for (const auto& s : q.outputs) {
            outputs.push_back(chain_node(self_, s));
            res.output_ranges.push_back(net_.node(outputs.back()).states);
        }
        for (const auto& a : kb_.processing_order(self_)) step(self_, a);
        current_rank_ = -1;

        std::vector<VarId> input_proj;
        for (const auto& [ref, id] : inputs_) {
            res.inputs.push_back(ref);
            res.input_ranges.push_back(net_.node(id).states);
            input_proj.push_back(id);
        }
        InferenceCounters counters;
        if (res.inputs.empty()) {
            finish();
            Factor f = query(net_, outputs, {}, &counters, eng_.opts_.inference);
            res.table.push_back(std::move(f.table));
        } else {
            VarId input = net_.declare("@input", index_states(product_size(res.input_ranges)));
            net_.make_input(input);
            auto cards = cards_of(res.input_ranges);
            for (size_t i = 0; i < input_proj.size(); ++i) net_.define(input_proj[i], {input}, projection_cpt(cards, i));
            finish();
            res.table = conditional_query(net_, outputs, input, {}, &counters, eng_.opts_.inference);
        }
        res.max_clique = report(counters);
        return res;
    }

    QueryResult solve_top(const QueryExpr& q) {
        top_ = true;
        QueryResult res;
        std::vector<VarId> targets;
        for (const auto& t : q.targets) {
            targets.push_back(chain_node(t.instance, t.chain));
            res.targets.push_back(t);
            res.ranges.push_back(net_.node(targets.back()).states);
        }
        std::vector<std::pair<VarId, std::string>> observed;
        for (const auto& e : q.evidence) observed.push_back({chain_node(e.target.instance, e.target.chain), e.value});
        for (const auto& [key, value] : kb_.assertions()) {
            const auto* d = kb_.find(key.first, key.second);
            if (d && d->is_value()) observed.push_back({value_node(key.first, key.second), std::get<std::string>(value)});
        }
        for (const auto& [scope, attr] : kb_.top_level_order()) step(scope, attr);
        current_rank_ = -1;
        finish();
        Evidence ev;
        for (const auto& [v, value] : observed) {
            int idx = net_.state_index(v, value);
            auto [it, ok] = ev.emplace(v, idx);
            if (!ok && it->second != idx) {
                throw Error(ErrorCode::ImpossibleEvidence, "two observations of '" + net_.node(v).name + "' disagree");
            }
        }
        InferenceCounters counters;
        Factor f = query(net_, targets, ev, &counters, eng_.opts_.inference);
        res.joint = std::move(f.table);
        report(counters);
        return res;
    }

    const DiscreteNetwork& network() const { return net_; }

private:
    // ---- node requests -------------------------------------------------

    bool processed(int rank) const { return rank >= current_rank_; }

    VarId value_node(const std::string& scope, const std::string& attr) {
        int rank = kb_.rank(scope, attr);
        if (VarId* v = lookup(values_, rank)) return *v;
        if (processed(rank)) {
            throw Error(ErrorCode::CyclicLocalOrder, "'" + scope + "." + attr + "' was requested after it was processed");
        }
        VarId id = net_.declare(scope + "." + attr, kb_.range(scope, attr));
        values_[rank] = id;
        return id;
    }

    VarId chain_node(const std::string& scope, const AttributeChain& chain) {
        if (chain.size() == 1) return value_node(scope, chain.head());
        const std::string& head = chain.head();
        AttributeChain rest = chain.tail();
        if (top_) {
            if (const auto* a = kb_.asserted(scope, head)) {
                if (const auto* j = std::get_if<std::string>(a)) return chain_node(*j, rest);
            }
        } else if (entry_ && head == *entry_) {
            const auto& back = *kb_.decl(scope, head).complex();
            if (back.inverse && rest.size() > 1 && rest.head() == *back.inverse) return chain_node(scope, rest.tail());
            return input_node(InputRef{std::nullopt, rest}, kb_.chain_range(scope, chain));
        }
        int rank = kb_.rank(scope, head);
        if (processed(rank)) {
            throw Error(ErrorCode::CyclicLocalOrder, "'" + scope + "." + chain.str() + "' was requested after '" + head + "' was processed");
        }
        auto& proj = projections_[rank];
        auto it = proj.find(rest);
        if (it != proj.end()) return it->second;
        needed_[rank].insert(rest);
        VarId id = net_.declare(scope + "." + chain.str(), kb_.chain_range(scope, chain));
        proj.emplace(rest, id);
        return id;
    }

    VarId global_node(const std::string& instance, const AttributeChain& chain) {
        if (top_) return chain_node(instance, chain);
        return input_node(InputRef{instance, chain}, kb_.chain_range(instance, chain));
    }

    VarId input_node(const InputRef& ref, std::vector<std::string> range) {
        auto it = inputs_.find(ref);
        if (it != inputs_.end()) return it->second;
        VarId id = net_.declare("@" + ref.str(), std::move(range));
        inputs_.emplace(ref, id);
        return id;
    }

    // ---- processing ----------------------------------------------------

    void step(const std::string& scope, const std::string& attr) {
        check_deadline();
        current_rank_ = kb_.rank(scope, attr);
        const auto& decl = kb_.decl(scope, attr);
        if (decl.is_value()) {
            if (lookup(values_, current_rank_)) process_value(scope, attr, decl);
        } else if (!(!top_ && entry_ && attr == *entry_)) {
            if (lookup(needed_, current_rank_)) process_complex(scope, attr, *decl.complex());
        }
    }

    void process_value(const std::string& scope, const std::string& attr, const AttributeDecl& decl) {
        VarId id = *lookup(values_, current_rank_);
        if (const auto* q = decl.quantifier()) {
            const auto& over = *kb_.decl(scope, q->over).complex();
            if (!top_ && entry_ && q->over == *entry_) {
                throw Error(ErrorCode::Unsupported, "'" + scope + "." + attr + "' counts over the multi-valued inverse '" + q->over +
                                                        "' of its caller; this is unsupported");
            }
            if (top_) {
                if (const auto* a = kb_.asserted(scope, q->over)) {
                    std::vector<VarId> parents;
                    std::vector<std::vector<char>> matches;
                    for (const auto& j : std::get<std::vector<std::string>>(*a)) {
                        VarId p = chain_node(j, q->chain);
                        parents.push_back(p);
                        std::vector<char> m;
                        for (const auto& s : net_.node(p).states) m.push_back(s == q->value);
                        matches.push_back(std::move(m));
                    }
                    net_.define(id, std::move(parents), quantifier_cpt_naive(matches, over.bound));
                    return;
                }
            }
            int over_rank = kb_.rank(scope, q->over);
            if (processed(over_rank)) {
                throw Error(ErrorCode::CyclicLocalOrder, "'" + scope + "." + q->over + "' was processed before quantifier '" + attr + "'");
            }
            quantifiers_[over_rank].push_back(attr);
            needed_[over_rank].insert(q->chain);
            return;
        }
        std::vector<VarId> parents;
        for (const auto& p : decl.parents()) parents.push_back(chain_node(scope, p));
        net_.define(id, std::move(parents), *decl.cpd());
    }

    struct Call {
        std::shared_ptr<const SubQueryResult> res;
        std::vector<VarId> inputs;
    };

    Call call(const std::string& scope, const std::string& cls, const std::vector<AttributeChain>& outputs,
              const std::optional<std::string>& entry) {
        SubQuery sq{cls, outputs, entry};
        Call c;
        c.res = eng_.solve(sq, depth_ + 1);
        for (const auto& ref : c.res->inputs) {
            c.inputs.push_back(ref.instance ? global_node(*ref.instance, ref.chain) : chain_node(scope, ref.chain));
        }
        return c;
    }

    /// One node per needed chain carrying the callee's answer: the chain
    /// nodes directly when there is a single output, projections of a joint
    /// node otherwise.
    std::vector<VarId> answer_nodes(const std::string& label, const Call& c, const std::vector<VarId>& targets) {
        const auto& r = *c.res;
        Cpt cpt;
        cpt.rows = r.table;
        if (r.output_ranges.size() == 1) {
            VarId id = targets.empty() ? net_.declare(label, r.output_ranges[0]) : targets[0];
            net_.define(id, c.inputs, std::move(cpt));
            return {id};
        }
        VarId joint = net_.declare(label, index_states(product_size(r.output_ranges)));
        net_.define(joint, c.inputs, std::move(cpt));
        auto cards = cards_of(r.output_ranges);
        std::vector<VarId> out;
        for (size_t i = 0; i < r.output_ranges.size(); ++i) {
            VarId id = targets.empty() ? net_.declare(label + "#" + std::to_string(i), r.output_ranges[i]) : targets[i];
            net_.define(id, {joint}, projection_cpt(cards, i));
            out.push_back(id);
        }
        return out;
    }

    void process_complex(const std::string& scope, const std::string& attr, const ComplexAttr& cx) {
        const auto& need = *lookup(needed_, current_rank_);
        std::vector<AttributeChain> chains(need.begin(), need.end());
        if (cx.multi) {
            process_multi(scope, attr, cx, chains);
            return;
        }
        std::vector<VarId> targets;
        const auto& proj = *lookup(projections_, current_rank_);
        for (const auto& c : chains) targets.push_back(proj.at(c));
        if (const auto* ref = kb_.reference_over(scope, attr)) {
            process_reference(scope, attr, cx, *ref, chains, targets);
            return;
        }
        auto c = call(scope, cx.type, chains, cx.inverse);
        answer_nodes(scope + "." + attr, c, targets);
    }

    void process_reference(const std::string& scope, const std::string& attr, const ComplexAttr& cx, const std::string& ref_attr,
                           const std::vector<AttributeChain>& chains, const std::vector<VarId>& targets) {
        const auto& ref = *kb_.decl(scope, ref_attr).reference();
        VarId selector = value_node(scope, ref_attr);
        std::vector<std::vector<VarId>> per_entry;
        for (const auto& e : ref.entries) {
            if (e.kind == ReferenceEntry::Kind::Class) {
                auto c = call(scope, e.name, chains, cx.inverse);
                per_entry.push_back(answer_nodes(scope + "." + attr + "@" + e.name, c, {}));
            } else {
                std::vector<VarId> nodes;
                for (const auto& ch : chains) nodes.push_back(global_node(e.name, ch));
                per_entry.push_back(std::move(nodes));
            }
        }
        for (size_t i = 0; i < chains.size(); ++i) {
            std::vector<VarId> parents{selector};
            std::vector<std::vector<std::string>> ranges;
            for (const auto& nodes : per_entry) {
                parents.push_back(nodes[i]);
                ranges.push_back(net_.node(nodes[i]).states);
            }
            const auto& out_range = net_.node(targets[i]).states;
            net_.define(targets[i], std::move(parents),
                        multiplexer_cpt(static_cast<int>(ref.entries.size()), ranges, out_range));
        }
    }

    void process_multi(const std::string& scope, const std::string& attr, const ComplexAttr& cx,
                       const std::vector<AttributeChain>& chains) {
        auto qs = quantifiers_[current_rank_];
        std::sort(qs.begin(), qs.end());
        int n = cx.bound;
        std::optional<VarId> number;
        if (const auto* na = kb_.number_over(scope, attr)) number = value_node(scope, *na);

        struct Q {
            VarId node;
            size_t chain;
            std::string value;
        };
        std::vector<Q> quants;
        for (const auto& qa : qs) {
            const auto& q = *kb_.decl(scope, qa).quantifier();
            size_t ci = static_cast<size_t>(std::find(chains.begin(), chains.end(), q.chain) - chains.begin());
            quants.push_back({*lookup(values_, kb_.rank(scope, qa)), ci, q.value});
        }

        if (eng_.opts_.naive_quantifiers) {
            std::vector<std::vector<VarId>> fillers;
            for (int i = 1; i <= n; ++i) {
                auto c = call(scope, cx.type, chains, cx.inverse);
                fillers.push_back(answer_nodes(scope + "." + attr + "[" + std::to_string(i) + "]", c, {}));
            }
            for (const auto& q : quants) {
                std::vector<VarId> parents;
                std::vector<std::vector<char>> matches;
                for (const auto& f : fillers) {
                    VarId p = f[q.chain];
                    parents.push_back(p);
                    std::vector<char> m;
                    for (const auto& s : net_.node(p).states) m.push_back(s == q.value);
                    matches.push_back(std::move(m));
                }
                if (number) {
                    parents.insert(parents.begin(), *number);
                    net_.define(q.node, std::move(parents), quantifier_cpt_gated(matches, n));
                } else {
                    net_.define(q.node, std::move(parents), quantifier_cpt_naive(matches, n));
                }
            }
            return;
        }

        auto c = call(scope, cx.type, chains, cx.inverse);
        const auto& r = *c.res;
        int l = static_cast<int>(quants.size());
        std::vector<size_t> value_index;
        for (const auto& q : quants) {
            const auto& range = r.output_ranges[q.chain];
            value_index.push_back(static_cast<size_t>(std::find(range.begin(), range.end(), q.value) - range.begin()));
        }
        auto out_cards = cards_of(r.output_ranges);
        std::vector<size_t> after(out_cards.size(), 1);
        for (int i = static_cast<int>(out_cards.size()) - 2; i >= 0; --i)
            after[static_cast<size_t>(i)] = after[static_cast<size_t>(i) + 1] * static_cast<size_t>(out_cards[static_cast<size_t>(i) + 1]);

        // P_m per input row
        std::vector<std::vector<std::vector<double>>> per_row;
        for (const auto& row : r.table) {
            std::vector<double> contrib(size_t{1} << l, 0.0);
            for (size_t j = 0; j < row.size(); ++j) {
                size_t cbits = 0;
                for (int i = 0; i < l; ++i) {
                    size_t ch = quants[static_cast<size_t>(i)].chain;
                    size_t state = (j / after[ch]) % static_cast<size_t>(out_cards[ch]);
                    cbits = (cbits << 1) | (state == value_index[static_cast<size_t>(i)] ? 1u : 0u);
                }
                contrib[cbits] += row[j];
            }
            per_row.push_back(quantifier_joint_cpt(contrib, l, n, &aggregate_ops_));
        }
        Cpt cpt;
        std::vector<VarId> parents;
        if (number) {
            parents.push_back(*number);
            for (int m = 0; m <= n; ++m)
                for (const auto& pm : per_row) cpt.rows.push_back(pm[static_cast<size_t>(m)]);
        } else {
            for (const auto& pm : per_row) cpt.rows.push_back(pm[static_cast<size_t>(n)]);
        }
        parents.insert(parents.end(), c.inputs.begin(), c.inputs.end());
        if (l == 1) {
            net_.define(quants[0].node, std::move(parents), std::move(cpt));
            return;
        }
        size_t cells = cpt.rows.front().size();
        VarId joint = net_.declare(scope + "." + attr, index_states(cells));
        net_.define(joint, std::move(parents), std::move(cpt));
        std::vector<int> cards(static_cast<size_t>(l), n + 1);
        for (size_t i = 0; i < quants.size(); ++i) net_.define(quants[i].node, {joint}, projection_cpt(cards, i));
    }

    void finish() {
        try {
            net_.check();
        } catch (const Error& e) {
            throw Error(ErrorCode::CyclicLocalOrder, "local network for '" + (top_ ? std::string("top level") : self_) + "' is malformed: " + e.message());
        }
    }

    int report(const InferenceCounters& counters) {
        int clique = 0;
        if (eng_.opts_.clique_stats) clique = triangulation_stats(net_).max_clique;
        eng_.note_network(net_.size(), clique, counters.ops, aggregate_ops_);
        return clique;
    }

    void check_deadline() const {
        const auto& d = eng_.opts_.inference.deadline;
        if (d && std::chrono::steady_clock::now() > *d) throw Error(ErrorCode::Timeout, "structured inference exceeded its time budget");
    }

    StructuredEngine& eng_;
    const KbIndex& kb_;
    int depth_;
    bool top_ = false;
    std::string self_;
    std::optional<std::string> entry_;
    DiscreteNetwork net_;
    int current_rank_ = std::numeric_limits<int>::max();
    ByRank<VarId> values_;
    ByRank<std::set<AttributeChain>> needed_;
    ByRank<std::map<AttributeChain, VarId>> projections_;
    ByRank<std::vector<std::string>> quantifiers_;
    std::map<InputRef, VarId> inputs_;
    std::uint64_t aggregate_ops_ = 0;
};

StructuredEngine::StructuredEngine(KbHandle kb, StructuredOptions opts) : kb_(std::move(kb)), opts_(opts) {}

std::shared_ptr<const SubQueryResult> StructuredEngine::solve_query(const SubQuery& q) { return solve(q, 0); }

std::shared_ptr<const SubQueryResult> StructuredEngine::solve(const SubQuery& q, int depth) {
    if (depth > opts_.depth_cap) {
        throw Error(ErrorCode::RecursionDepthExceeded,
                    "structured recursion exceeded depth " + std::to_string(opts_.depth_cap) + " at class '" + q.target + "'");
    }
    SubQuery sq = q.canonical();
    if (sq.outputs.empty()) throw Error(ErrorCode::InvalidKB, "subquery on '" + sq.target + "' has no outputs");
    std::string key = sq.key();
    if (opts_.reuse) {
        std::lock_guard lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            ++totals_.hits;
            ++per_class_[sq.target].hits;
            return it->second;
        }
    }
    {
        std::lock_guard lock(mu_);
        ++totals_.misses;
        ++per_class_[sq.target].misses;
    }
    LocalBuilder b(*this, depth);
    auto res = std::make_shared<const SubQueryResult>(b.solve_class(sq));
    if (opts_.reuse) {
        std::lock_guard lock(mu_);
        cache_[key] = res;
        totals_.entries = cache_.size();
    }
    return res;
}

QueryResult StructuredEngine::solve_top_level(const QueryExpr& query) {
    auto start = std::chrono::steady_clock::now();
    check_query(query, *kb_);
    EngineStats before;
    CacheStats cache_before;
    {
        std::lock_guard lock(mu_);
        before = stats_;
        cache_before = totals_;
    }
    LocalBuilder b(*this, 0);
    QueryResult res = b.solve_top(query);
    std::lock_guard lock(mu_);
    res.stats.ops = stats_.ops - before.ops;
    res.stats.aggregate_ops = stats_.aggregate_ops - before.aggregate_ops;
    res.stats.local_networks = stats_.local_networks - before.local_networks;
    res.stats.network_nodes = stats_.network_nodes;
    res.stats.max_clique = stats_.max_clique;
    res.stats.cache_hits = totals_.hits - cache_before.hits;
    res.stats.cache_misses = totals_.misses - cache_before.misses;
    res.stats.cache_entries = cache_.size();
    res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

void StructuredEngine::note_network(size_t nodes, int clique, std::uint64_t ops, std::uint64_t aggregate_ops) {
    std::lock_guard lock(mu_);
    stats_.ops += ops;
    stats_.aggregate_ops += aggregate_ops;
    stats_.local_networks += 1;
    stats_.network_nodes = std::max<std::uint64_t>(stats_.network_nodes, nodes);
    stats_.max_clique = std::max(stats_.max_clique, clique);
}

CacheStats StructuredEngine::cache_stats() const {
    std::lock_guard lock(mu_);
    CacheStats s = totals_;
    s.entries = cache_.size();
    return s;
}

std::map<std::string, CacheStats> StructuredEngine::cache_stats_by_class() const {
    std::lock_guard lock(mu_);
    return per_class_;
}

void StructuredEngine::clear_cache() {
    std::lock_guard lock(mu_);
    cache_.clear();
    per_class_.clear();
    totals_ = {};
    stats_ = {};
}

int StructuredEngine::max_local_clique() const {
    std::lock_guard lock(mu_);
    return stats_.max_clique;
}

}  // namespace spook
