#include "spook/kbmc.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "spook/aggregate.hpp"
#include "spook/lang.hpp"

namespace spook {

namespace {

struct GObj {
    std::string path;
    std::string model;  // instance name when named, class name otherwise
    bool named = false;
    std::string back_attr;
    int back = -1;
    int depth = 0;
};

class Grounder {
public:
    Grounder(const KbIndex& kb, const KbmcOptions& opts) : kb_(kb), opts_(opts) {}

    GroundedNetwork run(const QueryExpr* query) {
        if (opts_.ground_all_named) {
            for (const auto& inst : kb_.instance_names())
                for (const auto& [attr, decl] : kb_.model(inst))
                    if (decl.is_value()) node(named(inst), attr);
        }
        GroundedNetwork out;
        std::vector<std::pair<ChainRef, VarId>> chains;
        if (query) {
            auto add = [&](const ChainRef& r) {
                if (!kb_.is_instance(r.instance)) throw Error(ErrorCode::UnknownInstance, "unknown instance '" + r.instance + "'");
                chains.push_back({r, chain_node(named(r.instance), r.chain)});
            };
            for (const auto& t : query->targets) add(t);
            for (const auto& e : query->evidence) add(e.target);
        }
        std::vector<std::pair<VarId, int>> asserted;
        for (const auto& [key, value] : kb_.assertions()) {
            const auto& [inst, attr] = key;
            const auto* d = kb_.find(inst, attr);
            if (!d || !d->is_value()) continue;
            VarId v = node(named(inst), attr);
            asserted.push_back({v, net_.state_index(v, std::get<std::string>(value))});
        }
        auto remap = net_.canonicalize();
        for (auto& [ref, v] : chains) out.chains[ref] = remap[static_cast<size_t>(v)];
        for (auto& [v, val] : asserted) out.assertions[remap[static_cast<size_t>(v)]] = val;
        out.net = std::move(net_);
        out.net.check();
        return out;
    }

private:
    int named(const std::string& inst) {
        auto it = by_path_.find(inst);
        if (it != by_path_.end()) return it->second;
        GObj o;
        o.path = inst;
        o.model = inst;
        o.named = true;
        return store(std::move(o));
    }

    int store(GObj o) {
        int id = static_cast<int>(objs_.size());
        by_path_.emplace(o.path, id);
        objs_.push_back(std::move(o));
        return id;
    }

    int generic(int parent, const std::string& suffix, const std::string& cls, const std::string& via_attr) {
        std::string path = objs_[parent].path + "/" + suffix;
        auto it = by_path_.find(path);
        if (it != by_path_.end()) return it->second;
        GObj o;
        o.path = path;
        o.model = cls;
        o.depth = objs_[parent].depth + 1;
        if (o.depth > opts_.depth_cap) {
            throw Error(ErrorCode::RecursionDepthExceeded,
                        "grounding exceeded depth " + std::to_string(opts_.depth_cap) + " at '" + path + "'");
        }
        const auto& via = *kb_.decl(objs_[parent].model, via_attr).complex();
        if (via.inverse) {
            o.back_attr = *via.inverse;
            o.back = parent;
        }
        return store(std::move(o));
    }

    /// Filler of a single-valued complex attribute without reference uncertainty.
    int filler(int obj, const std::string& attr) {
        const GObj& o = objs_[obj];
        if (o.named) {
            if (const auto* a = kb_.asserted(o.model, attr)) return named(std::get<std::string>(*a));
        } else if (attr == o.back_attr) {
            return o.back;
        }
        const auto& cx = *kb_.decl(o.model, attr).complex();
        return generic(obj, attr, cx.type, attr);
    }

    VarId chain_node(int obj, const AttributeChain& chain) {
        if (chain.size() == 1) return node(obj, chain.head());
        const std::string& head = chain.head();
        const GObj& o = objs_[obj];
        const auto* decl = kb_.find(o.model, head);
        if (!decl || !decl->complex() || decl->complex()->multi) {
            throw Error(ErrorCode::NonSimpleChain, "chain '" + chain.str() + "' is not simple on '" + o.path + "'");
        }
        bool back = !o.named && head == o.back_attr;
        if (!back) {
            if (const auto* ref = kb_.reference_over(o.model, head)) return multiplexed(obj, head, *ref, chain.tail());
        }
        return chain_node(filler(obj, head), chain.tail());
    }

    VarId multiplexed(int obj, const std::string& attr, const std::string& ref_attr, const AttributeChain& rest) {
        std::string name = objs_[obj].path + "/" + attr + "{" + rest.str() + "}";
        if (auto v = net_.find(name)) return *v;
        std::string model = objs_[obj].model;
        const auto& ref = *kb_.decl(model, ref_attr).reference();
        VarId selector = node(obj, ref_attr);
        std::vector<VarId> parents{selector};
        std::vector<std::vector<std::string>> ranges;
        for (const auto& e : ref.entries) {
            int target = e.kind == ReferenceEntry::Kind::Instance ? named(e.name) : generic(obj, attr + "@" + e.name, e.name, attr);
            VarId p = chain_node(target, rest);
            parents.push_back(p);
            ranges.push_back(net_.node(p).states);
        }
        auto out_range = ranges.front();
        VarId id = net_.declare(name, out_range);
        net_.define(id, parents, multiplexer_cpt(static_cast<int>(ref.entries.size()), ranges, out_range));
        return id;
    }

    VarId node(int obj, const std::string& attr) {
        std::string name = objs_[obj].path + "." + attr;
        if (auto v = net_.find(name)) {
            if (!net_.node(*v).defined) throw Error(ErrorCode::CycleDetected, "grounding revisits '" + name + "' while defining it");
            return *v;
        }
        std::string model = objs_[obj].model;
        const auto& decl = kb_.decl(model, attr);
        VarId id = net_.declare(name, kb_.range(model, attr));
        if (const auto* q = decl.quantifier()) {
            define_quantifier(obj, id, *q);
            return id;
        }
        std::vector<VarId> parents;
        for (const auto& p : decl.parents()) parents.push_back(chain_node(obj, p));
        net_.define(id, std::move(parents), *decl.cpd());
        return id;
    }

    void define_quantifier(int obj, VarId id, const QuantifierAttr& q) {
        const GObj& o = objs_[obj];
        std::string model = o.model;
        if (!o.named && q.over == o.back_attr) {
            throw Error(ErrorCode::Unsupported, "'" + o.path + "." + q.over +
                                                    "' is a multi-valued inverse reached from one of its fillers; counting over it is unsupported");
        }
        const auto& cx = *kb_.decl(model, q.over).complex();
        std::vector<int> fillers;
        const AssertedValue* listed = o.named ? kb_.asserted(model, q.over) : nullptr;
        if (listed) {
            for (const auto& j : std::get<std::vector<std::string>>(*listed)) fillers.push_back(named(j));
        } else {
            for (int i = 1; i <= cx.bound; ++i) fillers.push_back(generic(obj, q.over + "[" + std::to_string(i) + "]", cx.type, q.over));
        }
        std::vector<VarId> parents;
        std::vector<std::vector<char>> matches;
        for (int f : fillers) {
            VarId p = chain_node(f, q.chain);
            parents.push_back(p);
            std::vector<char> m;
            for (const auto& s : net_.node(p).states) m.push_back(s == q.value);
            matches.push_back(std::move(m));
        }
        const std::string* number = listed ? nullptr : kb_.number_over(model, q.over);
        if (number) {
            VarId n = node(obj, *number);
            parents.insert(parents.begin(), n);
            net_.define(id, std::move(parents), quantifier_cpt_gated(matches, cx.bound));
        } else {
            net_.define(id, std::move(parents), quantifier_cpt_naive(matches, cx.bound));
        }
    }

    const KbIndex& kb_;
    const KbmcOptions& opts_;
    DiscreteNetwork net_;
    std::vector<GObj> objs_;
    std::map<std::string, int> by_path_;
};

}  // namespace

GroundedNetwork ground(const KbIndex& kb, const QueryExpr* query, const KbmcOptions& opts) {
    return Grounder(kb, opts).run(query);
}

QueryResult answer_query_kbmc(const KbIndex& kb, const QueryExpr& query, const KbmcOptions& opts, GroundedNetwork* grounded) {
    auto start = std::chrono::steady_clock::now();
    check_query(query, kb);
    GroundedNetwork g = ground(kb, &query, opts);
    Evidence ev = g.assertions;
    for (const auto& o : query.evidence) {
        VarId v = g.chains.at(o.target);
        int val = g.net.state_index(v, o.value);
        auto [it, ok] = ev.emplace(v, val);
        if (!ok && it->second != val) {
            throw Error(ErrorCode::ImpossibleEvidence, "evidence on " + o.target.str() + " contradicts another observation of the same node");
        }
    }
    std::vector<VarId> targets;
    QueryResult res;
    for (const auto& t : query.targets) {
        targets.push_back(g.chains.at(t));
        res.targets.push_back(t);
        res.ranges.push_back(g.net.node(targets.back()).states);
    }
    InferenceCounters counters;
    Factor f = spook::query(g.net, targets, ev, &counters, opts.inference);
    res.joint = std::move(f.table);
    res.stats.ops = counters.ops;
    res.stats.max_clique = counters.max_clique;
    res.stats.local_networks = 1;
    res.stats.network_nodes = g.net.size();
    res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (grounded) *grounded = std::move(g);
    return res;
}

}  // namespace spook
