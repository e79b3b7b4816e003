#include "spook/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spook/depgraph.hpp"
#include "spook/resolve.hpp"

namespace spook {

std::string ValidationReport::str() const {
    std::string out;
    for (const auto& d : diagnostics) out += d.str() + "\n";
    return out;
}

namespace {

class Validator {
public:
    explicit Validator(const KnowledgeBase& kb) : kb_(kb) {}

    ValidationReport run() {
        check_structure();
        if (!report_.ok()) return std::move(report_);
        build_models();
        for (const auto& [name, cls] : kb_.classes) {
            if (!models_.count(name)) continue;
            for (const auto& [attr, decl] : cls.attributes) check_decl(name, decl);
        }
        for (const auto& [name, inst] : kb_.instances) {
            if (!models_.count(name)) continue;
            for (const auto& [attr, decl] : inst.overrides) check_decl(name, decl);
        }
        for (const auto& [name, model] : models_) check_uniqueness(name, model);
        check_assertions();
        if (report_.ok()) check_cycles();
        return std::move(report_);
    }

private:
    void add(ErrorCode code, std::string message, const SourceLocation& loc) {
        std::optional<SourceLocation> where;
        if (loc.line > 0) where = loc;
        report_.diagnostics.push_back({code, std::move(message), where});
    }

    void check_structure() {
        for (const auto& [name, cls] : kb_.classes) {
            if (kb_.instances.count(name)) add(ErrorCode::DuplicateName, "'" + name + "' names both a class and an instance", cls.loc);
            if (cls.superclass && !kb_.is_class(*cls.superclass)) {
                add(ErrorCode::UnknownReference, "class '" + name + "' extends unknown class '" + *cls.superclass + "'", cls.loc);
            }
        }
        if (!report_.ok()) return;
        for (const auto& [name, cls] : kb_.classes) {
            try {
                kb_.lineage(name);
            } catch (const Error& e) {
                add(ErrorCode::CycleDetected, e.message(), cls.loc);
            }
        }
        for (const auto& [name, inst] : kb_.instances) {
            if (!kb_.is_class(inst.class_name)) {
                add(ErrorCode::UnknownReference, "instance '" + name + "' has unknown class '" + inst.class_name + "'", inst.loc);
            }
            for (const auto& [attr, decl] : inst.overrides) {
                auto k = decl.kind();
                if (k != AttrKind::Simple && k != AttrKind::Number && k != AttrKind::Reference) {
                    add(ErrorCode::IncompatibleOverride,
                        "instance '" + name + "' may only override simple, number or reference attributes ('" + attr + "' is " +
                            std::string(to_string(k)) + ")",
                        decl.loc);
                }
            }
        }
    }

    void build_models() {
        auto collect = [&](const std::string& name, const SourceLocation& loc) {
            try {
                models_.emplace(name, effective_model(kb_, name));
            } catch (const Error& e) {
                add(e.code(), e.message(), e.location().value_or(loc));
            }
        };
        for (const auto& [name, cls] : kb_.classes) collect(name, cls.loc);
        for (const auto& [name, inst] : kb_.instances) collect(name, inst.loc);
    }

    std::optional<ChainResolution> chain(const std::string& start, const AttributeChain& c, const AttributeDecl& owner) {
        try {
            return resolve_chain(kb_, models_, start, c);
        } catch (const Error& e) {
            add(e.code(), "in '" + owner.name + "': " + e.message(), owner.loc);
            return std::nullopt;
        }
    }

    void check_cpt(const std::string& obj, const AttributeDecl& decl, size_t range_size) {
        size_t rows = 1;
        for (const auto& p : decl.parents()) {
            auto res = chain(obj, p, decl);
            if (!res) return;
            rows *= res->range.size();
        }
        const auto& cpt = *decl.cpd();
        std::string where = "'" + obj + "." + decl.name + "'";
        if (cpt.rows.size() != rows) {
            add(ErrorCode::InvalidKB,
                where + " CPT has " + std::to_string(cpt.rows.size()) + " rows, expected " + std::to_string(rows), decl.loc);
            return;
        }
        for (size_t r = 0; r < cpt.rows.size(); ++r) {
            const auto& row = cpt.rows[r];
            if (row.size() != range_size) {
                add(ErrorCode::InvalidKB,
                    where + " CPT row " + std::to_string(r) + " has " + std::to_string(row.size()) + " entries, expected " +
                        std::to_string(range_size),
                    decl.loc);
                return;
            }
            double sum = 0;
            for (double p : row) {
                if (!(p >= 0) || !std::isfinite(p)) {
                    add(ErrorCode::InvalidKB, where + " CPT row " + std::to_string(r) + " has a negative or non-finite entry", decl.loc);
                    return;
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowTolerance) {
                add(ErrorCode::InvalidKB, where + " CPT row " + std::to_string(r) + " sums to " + std::to_string(sum) + ", not 1",
                    decl.loc);
            }
        }
    }

    const AttributeDecl* find(const std::string& obj, const std::string& attr) const {
        auto m = models_.find(obj);
        if (m == models_.end()) return nullptr;
        auto it = m->second.find(attr);
        return it == m->second.end() ? nullptr : &it->second;
    }

    const ComplexAttr* complex_over(const std::string& obj, const AttributeDecl& decl, const std::string& over) {
        const auto* d = find(obj, over);
        if (!d || !d->complex()) {
            add(ErrorCode::UnknownAttribute, "'" + obj + "." + decl.name + "' refers to '" + over + "', which is not a complex attribute",
                decl.loc);
            return nullptr;
        }
        return d->complex();
    }

    void check_decl(const std::string& obj, const AttributeDecl& decl) {
        std::string where = "'" + obj + "." + decl.name + "'";
        const auto& model = models_.at(obj);
        switch (decl.kind()) {
            case AttrKind::Simple: {
                const auto& s = *decl.simple();
                std::set<std::string> uniq(s.range.begin(), s.range.end());
                if (s.range.empty() || uniq.size() != s.range.size()) {
                    add(ErrorCode::InvalidKB, where + " needs a nonempty range of distinct values", decl.loc);
                    return;
                }
                check_cpt(obj, decl, s.range.size());
                break;
            }
            case AttrKind::Complex: {
                const auto& c = *decl.complex();
                if (!kb_.is_class(c.type)) {
                    add(ErrorCode::UnknownReference, where + " has unknown type '" + c.type + "'", decl.loc);
                    return;
                }
                if (c.bound < 1 || (!c.multi && c.bound != 1)) {
                    add(ErrorCode::InvalidKB, where + " has an invalid cardinality bound", decl.loc);
                }
                if (c.inverse) check_inverse(obj, decl);
                break;
            }
            case AttrKind::Quantifier: {
                const auto& q = *decl.quantifier();
                const auto* over = complex_over(obj, decl, q.over);
                if (!over) return;
                if (!over->multi) {
                    add(ErrorCode::InvalidKB, where + " counts over single-valued '" + q.over + "'", decl.loc);
                    return;
                }
                auto res = chain(over->type, q.chain, decl);
                if (!res) return;
                if (res->terminal_kind == AttrKind::Quantifier) {
                    add(ErrorCode::Unsupported, where + " nests a quantifier inside a quantifier", decl.loc);
                }
                if (std::find(res->range.begin(), res->range.end(), q.value) == res->range.end()) {
                    add(ErrorCode::BadValue, where + " counts value '" + q.value + "' outside the range of '" + q.chain.str() + "'",
                        decl.loc);
                }
                break;
            }
            case AttrKind::Number: {
                const auto& n = *decl.number();
                const auto* over = complex_over(obj, decl, n.over);
                if (!over) return;
                if (!over->multi) {
                    add(ErrorCode::InvalidKB, where + " counts over single-valued '" + n.over + "'", decl.loc);
                    return;
                }
                check_cpt(obj, decl, static_cast<size_t>(over->bound) + 1);
                break;
            }
            case AttrKind::Reference: {
                const auto& r = *decl.reference();
                const auto* over = complex_over(obj, decl, r.over);
                if (!over) return;
                if (over->multi) {
                    add(ErrorCode::InvalidKB, where + " selects a filler for multi-valued '" + r.over + "'", decl.loc);
                    return;
                }
                if (r.entries.empty()) {
                    add(ErrorCode::InvalidKB, where + " has no entries", decl.loc);
                    return;
                }
                std::set<std::string> names;
                for (const auto& e : r.entries) {
                    if (!names.insert(e.name).second) add(ErrorCode::DuplicateName, where + " lists '" + e.name + "' twice", decl.loc);
                    if (e.kind == ReferenceEntry::Kind::Class) {
                        if (!kb_.is_subclass(e.name, over->type)) {
                            add(ErrorCode::InvalidKB, where + " entry '" + e.name + "' is not a subclass of '" + over->type + "'",
                                decl.loc);
                        }
                    } else {
                        if (!kb_.is_instance(e.name) || !kb_.is_subclass(kb_.class_of(e.name), over->type)) {
                            add(ErrorCode::InvalidKB, where + " entry '" + e.name + "' is not an instance of '" + over->type + "'",
                                decl.loc);
                        }
                        if (over->inverse) {
                            add(ErrorCode::Unsupported,
                                where + " lists instance '" + e.name + "' but '" + r.over + "' declares an inverse", decl.loc);
                        }
                    }
                }
                check_cpt(obj, decl, r.entries.size());
                break;
            }
        }
        (void)model;
    }

    void check_inverse(const std::string& obj, const AttributeDecl& decl) {
        const auto& c = *decl.complex();
        std::string where = "'" + obj + "." + decl.name + "'";
        const auto* inv = find(c.type, *c.inverse);
        if (!inv || !inv->complex()) {
            add(ErrorCode::InvalidKB, where + " has inverse '" + *c.inverse + "', which '" + c.type + "' does not declare as complex",
                decl.loc);
            return;
        }
        const auto& ic = *inv->complex();
        if (ic.inverse != decl.name) {
            add(ErrorCode::InvalidKB,
                where + " and '" + c.type + "." + *c.inverse + "' are not declared as mutual inverses", decl.loc);
            return;
        }
        if (!kb_.is_subclass(kb_.class_of(obj), ic.type)) {
            add(ErrorCode::InvalidKB,
                where + " has inverse '" + c.type + "." + *c.inverse + "' typed '" + ic.type + "', which does not cover '" +
                    kb_.class_of(obj) + "'",
                decl.loc);
        }
    }

    void check_uniqueness(const std::string& obj, const EffectiveModel& model) {
        std::map<std::string, std::string> number_of, reference_of;
        for (const auto& [name, decl] : model) {
            if (auto* n = decl.number()) {
                auto [it, ok] = number_of.emplace(n->over, name);
                if (!ok) add(ErrorCode::InvalidKB, "'" + obj + "' has two number attributes over '" + n->over + "'", decl.loc);
            }
            if (auto* r = decl.reference()) {
                auto [it, ok] = reference_of.emplace(r->over, name);
                if (!ok) add(ErrorCode::InvalidKB, "'" + obj + "' has two reference attributes over '" + r->over + "'", decl.loc);
            }
        }
    }

    bool has_reference_over(const std::string& obj, const std::string& attr) const {
        for (const auto& [name, decl] : models_.at(obj))
            if (auto* r = decl.reference(); r && r->over == attr) return true;
        return false;
    }

    bool has_number_over(const std::string& obj, const std::string& attr) const {
        for (const auto& [name, decl] : models_.at(obj))
            if (auto* n = decl.number(); n && n->over == attr) return true;
        return false;
    }

    void check_filler(const AttributeAssertion& a, const std::string& filler, const std::string& type) {
        if (!kb_.is_instance(filler)) {
            add(ErrorCode::UnknownInstance, "'" + a.instance + "." + a.attribute + "' names unknown instance '" + filler + "'", a.loc);
        } else if (!kb_.is_subclass(kb_.class_of(filler), type)) {
            add(ErrorCode::InvalidKB, "'" + a.instance + "." + a.attribute + "' names '" + filler + "', which is not a '" + type + "'",
                a.loc);
        }
    }

    void check_assertions() {
        for (const auto& [key, a] : kb_.assertions) {
            std::string where = "'" + a.instance + "." + a.attribute + "'";
            if (!kb_.is_instance(a.instance)) {
                add(ErrorCode::UnknownInstance, "assertion on unknown instance '" + a.instance + "'", a.loc);
                continue;
            }
            if (!models_.count(a.instance)) continue;
            const auto* decl = find(a.instance, a.attribute);
            if (!decl) {
                add(ErrorCode::UnknownAttribute, "assertion on undeclared attribute " + where, a.loc);
                continue;
            }
            const auto* one = std::get_if<std::string>(&a.value);
            if (const auto* c = decl->complex()) {
                if (has_reference_over(a.instance, a.attribute)) {
                    add(ErrorCode::InvalidKB, where + " has reference uncertainty and cannot be asserted", a.loc);
                    continue;
                }
                if (c->multi) {
                    const auto* list = std::get_if<std::vector<std::string>>(&a.value);
                    if (!list) {
                        add(ErrorCode::BadValue, where + " is multi-valued; assert a {list} of instances", a.loc);
                        continue;
                    }
                    if (static_cast<int>(list->size()) > c->bound) {
                        add(ErrorCode::BadValue, where + " lists more than " + std::to_string(c->bound) + " fillers", a.loc);
                    }
                    if (std::set<std::string>(list->begin(), list->end()).size() != list->size()) {
                        add(ErrorCode::DuplicateName, where + " lists a filler twice", a.loc);
                    }
                    if (has_number_over(a.instance, a.attribute)) {
                        add(ErrorCode::Unsupported, where + " lists its fillers but also has number uncertainty", a.loc);
                    }
                    for (const auto& f : *list) check_filler(a, f, c->type);
                } else {
                    if (!one) {
                        add(ErrorCode::BadValue, where + " is single-valued; assert one instance", a.loc);
                        continue;
                    }
                    check_filler(a, *one, c->type);
                }
                continue;
            }
            if (!one) {
                add(ErrorCode::BadValue, where + " is a value attribute; a list is not allowed", a.loc);
                continue;
            }
            auto range = value_range(models_.at(a.instance), *decl);
            if (std::find(range.begin(), range.end(), *one) == range.end()) {
                add(ErrorCode::BadValue, "value '" + *one + "' is outside the range of " + where, a.loc);
            }
        }
        if (!report_.ok()) return;
        std::vector<Diagnostic> implied;
        auto effective = effective_assertions(kb_, models_, implied);
        for (auto& d : implied) report_.diagnostics.push_back(std::move(d));
        for (const auto& [key, value] : effective) {
            if (kb_.assertions.count(key) || !has_reference_over(key.first, key.second)) continue;
            add(ErrorCode::InvalidKB,
                "an inverse assertion fixes '" + key.first + "." + key.second + "', which has reference uncertainty",
                kb_.instances.at(key.first).loc);
        }
    }

    void check_cycles() {
        auto graph = build_dependency_graph(kb_);
        auto cycle = graph.find_cycle();
        if (cycle.empty()) return;
        std::string witness;
        for (size_t i = 0; i < cycle.size(); ++i) {
            if (i) witness += " -> ";
            witness += cycle[i].str();
        }
        SourceLocation loc;
        if (auto m = models_.find(cycle[0].object); m != models_.end()) {
            if (auto d = m->second.find(cycle[0].attribute); d != m->second.end()) loc = d->second.loc;
        }
        add(ErrorCode::CycleDetected, "dependency cycle: " + witness, loc);
    }

    const KnowledgeBase& kb_;
    ModelMap models_;
    ValidationReport report_;
};

}  // namespace

ValidationReport validate_kb(const KnowledgeBase& kb) { return Validator(kb).run(); }

}  // namespace spook
