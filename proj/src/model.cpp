#include "spook/model.hpp"

#include <algorithm>

namespace spook {

AttributeChain AttributeChain::parse(std::string_view dotted) {
    AttributeChain chain;
    size_t start = 0;
    while (true) {
        size_t dot = dotted.find('.', start);
        std::string_view seg = dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start);
        if (seg.empty()) {
            throw Error(ErrorCode::NonSimpleChain, "malformed attribute chain '" + std::string(dotted) + "'");
        }
        chain.segments.emplace_back(seg);
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return chain;
}

std::string AttributeChain::str() const {
    std::string out;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (i) out += '.';
        out += segments[i];
    }
    return out;
}

AttributeChain AttributeChain::tail() const {
    return AttributeChain(std::vector<std::string>(segments.begin() + 1, segments.end()));
}

AttributeChain AttributeChain::prepend(const std::string& h) const {
    std::vector<std::string> segs;
    segs.reserve(segments.size() + 1);
    segs.push_back(h);
    segs.insert(segs.end(), segments.begin(), segments.end());
    return AttributeChain(std::move(segs));
}

std::string_view to_string(AttrKind kind) {
    switch (kind) {
        case AttrKind::Simple: return "simple";
        case AttrKind::Complex: return "complex";
        case AttrKind::Quantifier: return "quantifier";
        case AttrKind::Number: return "number";
        case AttrKind::Reference: return "reference";
    }
    return "?";
}

const std::vector<AttributeChain>& AttributeDecl::parents() const {
    static const std::vector<AttributeChain> none;
    if (auto* s = simple()) return s->parents;
    if (auto* n = number()) return n->parents;
    if (auto* r = reference()) return r->parents;
    return none;
}

const Cpt* AttributeDecl::cpd() const {
    if (auto* s = simple()) return &s->cpd;
    if (auto* n = number()) return &n->cpd;
    if (auto* r = reference()) return &r->cpd;
    return nullptr;
}

const std::string& KnowledgeBase::class_of(const std::string& object) const {
    if (auto it = instances.find(object); it != instances.end()) return it->second.class_name;
    if (classes.count(object)) return classes.find(object)->first;
    throw Error(ErrorCode::UnknownReference, "unknown object '" + object + "'");
}

std::vector<std::string> KnowledgeBase::lineage(const std::string& cls) const {
    std::vector<std::string> out;
    std::string cur = cls;
    while (true) {
        auto it = classes.find(cur);
        if (it == classes.end()) throw Error(ErrorCode::UnknownReference, "unknown class '" + cur + "'");
        if (std::find(out.begin(), out.end(), cur) != out.end()) {
            throw Error(ErrorCode::InvalidKB, "inheritance cycle through class '" + cur + "'", it->second.loc);
        }
        out.push_back(cur);
        if (!it->second.superclass) break;
        cur = *it->second.superclass;
    }
    return out;
}

bool KnowledgeBase::is_subclass(const std::string& sub, const std::string& super) const {
    if (!is_class(sub)) return false;
    for (const auto& c : lineage(sub)) {
        if (c == super) return true;
    }
    return false;
}

const AttributeAssertion* KnowledgeBase::assertion(const std::string& instance,
                                                   const std::string& attribute) const {
    auto it = assertions.find({instance, attribute});
    return it == assertions.end() ? nullptr : &it->second;
}

std::vector<std::string> count_range(int n) {
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) out.push_back(std::to_string(i));
    return out;
}

}  // namespace spook
