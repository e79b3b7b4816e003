#include "spook/resolve.hpp"

#include <algorithm>

namespace spook {

std::optional<std::string> override_conflict(const KnowledgeBase& kb, const AttributeDecl& original,
                                             const AttributeDecl& replacement) {
    if (original.kind() != replacement.kind()) {
        return "changes kind from " + std::string(to_string(original.kind())) + " to " +
               std::string(to_string(replacement.kind()));
    }
    switch (original.kind()) {
        case AttrKind::Simple:
            if (original.simple()->range != replacement.simple()->range) return std::string("changes the value range");
            break;
        case AttrKind::Complex: {
            const auto& a = *original.complex();
            const auto& b = *replacement.complex();
            if (a.multi != b.multi || a.bound != b.bound) return std::string("changes cardinality");
            if (!kb.is_subclass(b.type, a.type)) {
                return "retypes to '" + b.type + "', which is not a subclass of '" + a.type + "'";
            }
            break;
        }
        case AttrKind::Quantifier:
            if (original.quantifier()->over != replacement.quantifier()->over) return std::string("changes the counted attribute");
            break;
        case AttrKind::Number:
            if (original.number()->over != replacement.number()->over) return std::string("changes the counted attribute");
            break;
        case AttrKind::Reference:
            if (original.reference()->over != replacement.reference()->over ||
                original.reference()->entries != replacement.reference()->entries) {
                return std::string("changes the reference range");
            }
            break;
    }
    return std::nullopt;
}

EffectiveModel effective_model(const KnowledgeBase& kb, const std::string& object) {
    std::string cls = kb.class_of(object);
    auto lineage = kb.lineage(cls);
    EffectiveModel model;
    auto merge = [&](const std::map<std::string, AttributeDecl>& decls, const std::string& owner) {
        for (const auto& [name, decl] : decls) {
            auto it = model.find(name);
            if (it != model.end()) {
                if (auto why = override_conflict(kb, it->second, decl)) {
                    throw Error(ErrorCode::IncompatibleOverride,
                                "'" + owner + "." + name + "' " + *why, decl.loc);
                }
                it->second = decl;
            } else {
                model.emplace(name, decl);
            }
        }
    };
    for (auto it = lineage.rbegin(); it != lineage.rend(); ++it) {
        merge(kb.classes.at(*it).attributes, *it);
    }
    if (auto inst = kb.instances.find(object); inst != kb.instances.end()) {
        for (const auto& [name, decl] : inst->second.overrides) {
            if (!model.count(name)) {
                throw Error(ErrorCode::IncompatibleOverride,
                            "instance '" + object + "' declares '" + name + "', which its class does not have",
                            decl.loc);
            }
        }
        merge(inst->second.overrides, object);
    }
    return model;
}

std::vector<std::string> value_range(const EffectiveModel& model, const AttributeDecl& decl) {
    auto bound_of = [&](const std::string& over) -> int {
        auto it = model.find(over);
        if (it == model.end() || !it->second.complex()) {
            throw Error(ErrorCode::UnknownAttribute, "'" + decl.name + "' counts over unknown complex attribute '" + over + "'",
                        decl.loc);
        }
        return it->second.complex()->bound;
    };
    switch (decl.kind()) {
        case AttrKind::Simple: return decl.simple()->range;
        case AttrKind::Quantifier: return count_range(bound_of(decl.quantifier()->over));
        case AttrKind::Number: return count_range(bound_of(decl.number()->over));
        case AttrKind::Reference: {
            std::vector<std::string> out;
            for (const auto& e : decl.reference()->entries) out.push_back(e.name);
            return out;
        }
        case AttrKind::Complex: break;
    }
    throw Error(ErrorCode::NonSimpleChain, "'" + decl.name + "' is complex and has no value range", decl.loc);
}

namespace {

template <typename ModelOf>
ChainResolution resolve_with(const KnowledgeBase& kb, const std::string& start, const AttributeChain& chain,
                             ModelOf&& model_of) {
    if (chain.empty()) throw Error(ErrorCode::NonSimpleChain, "empty attribute chain");
    ChainResolution res;
    std::string object = start;
    for (size_t i = 0; i < chain.size(); ++i) {
        res.hops.push_back(kb.class_of(object));
        const EffectiveModel& model = model_of(object);
        const auto& seg = chain.segments[i];
        auto it = model.find(seg);
        if (it == model.end()) {
            throw Error(ErrorCode::UnknownAttribute,
                        "'" + res.hops.back() + "' has no attribute '" + seg + "' (in chain '" + chain.str() + "')");
        }
        const auto& decl = it->second;
        bool last = i + 1 == chain.size();
        if (last) {
            if (decl.kind() == AttrKind::Complex) {
                throw Error(ErrorCode::NonSimpleChain, "chain '" + chain.str() + "' ends in complex attribute '" + seg + "'");
            }
            res.range = value_range(model, decl);
            res.terminal_kind = decl.kind();
        } else {
            const auto* cx = decl.complex();
            if (!cx) {
                throw Error(ErrorCode::NonSimpleChain,
                            "chain '" + chain.str() + "' continues past value attribute '" + seg + "'");
            }
            if (cx->multi) {
                throw Error(ErrorCode::NonSimpleChain,
                            "chain '" + chain.str() + "' passes through multi-valued attribute '" + seg + "'");
            }
            object = cx->type;
        }
    }
    return res;
}

}  // namespace

ChainResolution resolve_chain(const KnowledgeBase& kb, const std::string& start, const AttributeChain& chain) {
    EffectiveModel scratch;
    return resolve_with(kb, start, chain, [&](const std::string& obj) -> const EffectiveModel& {
        scratch = effective_model(kb, obj);
        return scratch;
    });
}

ChainResolution resolve_chain(const KnowledgeBase& kb, const ModelMap& models, const std::string& start,
                              const AttributeChain& chain) {
    return resolve_with(kb, start, chain, [&](const std::string& obj) -> const EffectiveModel& {
        auto it = models.find(obj);
        if (it == models.end()) throw Error(ErrorCode::UnknownReference, "unknown object '" + obj + "'");
        return it->second;
    });
}

}  // namespace spook
