#include "spook/kb_index.hpp"

#include <algorithm>

#include "spook/validate.hpp"

namespace spook {

std::shared_ptr<const KbIndex> KbIndex::build(KnowledgeBase kb) {
    auto report = validate_kb(kb);
    if (!report.ok()) {
        const auto& first = report.diagnostics.front();
        std::string msg = report.diagnostics.size() == 1 ? first.message : report.str();
        if (!msg.empty() && msg.back() == '\n') msg.pop_back();
        ErrorCode code = report.diagnostics.size() == 1 ? first.code : ErrorCode::InvalidKB;
        throw Error(code, msg, report.diagnostics.size() == 1 ? first.location : std::nullopt);
    }

    auto idx = std::shared_ptr<KbIndex>(new KbIndex());
    idx->kb_ = std::move(kb);
    const auto& k = idx->kb_;
    for (const auto& [name, c] : k.classes) idx->models_.emplace(name, effective_model(k, name));
    for (const auto& [name, i] : k.instances) idx->models_.emplace(name, effective_model(k, name));
    std::vector<Diagnostic> ignored;
    idx->assertions_ = effective_assertions(k, idx->models_, ignored);
    idx->graph_ = build_dependency_graph(k, idx->models_, idx->assertions_);

    auto order = idx->graph_.topological_order();
    if (!order) throw Error(ErrorCode::CycleDetected, "dependency graph is cyclic");
    for (size_t r = 0; r < order->size(); ++r) idx->rank_[idx->graph_.nodes()[(*order)[r]]] = static_cast<int>(r);

    for (const auto& [obj, model] : idx->models_) {
        auto& info = idx->info_[obj];
        for (const auto& [attr, decl] : model) {
            if (decl.is_value()) info.ranges[attr] = value_range(model, decl);
            if (auto* n = decl.number()) info.number_of[n->over] = attr;
            if (auto* r = decl.reference()) info.reference_of[r->over] = attr;
            info.order.push_back(attr);
            info.rank_of[attr] = idx->rank_.at({obj, attr});
        }
        std::sort(info.order.begin(), info.order.end(), [&](const std::string& a, const std::string& b) {
            return idx->rank_.at({obj, a}) > idx->rank_.at({obj, b});
        });
    }
    for (const auto& [key, value] : idx->assertions_) idx->info_.at(key.first).asserted[key.second] = &value;
    for (const auto& [name, inst] : k.instances)
        for (const auto& attr : idx->info_.at(name).order) idx->top_order_.push_back({name, attr});
    std::sort(idx->top_order_.begin(), idx->top_order_.end(),
              [&](const DepNode& a, const DepNode& b) { return idx->rank_.at(a) > idx->rank_.at(b); });
    return idx;
}

const EffectiveModel& KbIndex::model(const std::string& object) const {
    auto it = models_.find(object);
    if (it == models_.end()) throw Error(ErrorCode::UnknownReference, "unknown object '" + object + "'");
    return it->second;
}

const AttributeDecl* KbIndex::find(const std::string& object, const std::string& attr) const {
    const auto& m = model(object);
    auto it = m.find(attr);
    return it == m.end() ? nullptr : &it->second;
}

const AttributeDecl& KbIndex::decl(const std::string& object, const std::string& attr) const {
    if (const auto* d = find(object, attr)) return *d;
    throw Error(ErrorCode::UnknownAttribute, "'" + class_of(object) + "' has no attribute '" + attr + "'");
}

const std::vector<std::string>& KbIndex::range(const std::string& object, const std::string& attr) const {
    auto it = info_.find(object);
    if (it != info_.end()) {
        auto r = it->second.ranges.find(attr);
        if (r != it->second.ranges.end()) return r->second;
    }
    throw Error(ErrorCode::UnknownAttribute, "'" + object + "." + attr + "' is not a value attribute");
}

const std::vector<std::string>& KbIndex::chain_range(const std::string& object, const AttributeChain& chain) const {
    std::lock_guard lock(memo_mu_);
    auto key = std::make_pair(object, chain);
    auto it = chain_memo_.find(key);
    if (it != chain_memo_.end()) return it->second;
    auto range = resolve_chain(kb_, models_, object, chain).range;
    return chain_memo_.emplace(std::move(key), std::move(range)).first->second;
}

const std::string* KbIndex::number_over(const std::string& object, const std::string& attr) const {
    const auto& m = info_.at(object).number_of;
    auto it = m.find(attr);
    return it == m.end() ? nullptr : &it->second;
}

const std::string* KbIndex::reference_over(const std::string& object, const std::string& attr) const {
    const auto& m = info_.at(object).reference_of;
    auto it = m.find(attr);
    return it == m.end() ? nullptr : &it->second;
}

const AssertedValue* KbIndex::asserted(const std::string& instance, const std::string& attr) const {
    auto it = info_.find(instance);
    if (it == info_.end()) return nullptr;
    auto a = it->second.asserted.find(attr);
    return a == it->second.asserted.end() ? nullptr : a->second;
}

int KbIndex::rank(const std::string& object, const std::string& attr) const {
    auto it = info_.find(object);
    if (it != info_.end()) {
        auto r = it->second.rank_of.find(attr);
        if (r != it->second.rank_of.end()) return r->second;
    }
    throw Error(ErrorCode::UnknownAttribute, "'" + object + "' has no attribute '" + attr + "'");
}

const std::vector<std::string>& KbIndex::processing_order(const std::string& object) const {
    return info_.at(object).order;
}

std::vector<std::string> KbIndex::instance_names() const {
    std::vector<std::string> out;
    for (const auto& [name, inst] : kb_.instances) out.push_back(name);
    return out;
}

}  // namespace spook
