#include "spook/assertions.hpp"

#include <algorithm>

namespace spook {

std::string Diagnostic::str() const {
    return location ? location->str() + ": " + message : message;
}

AssertionMap effective_assertions(const KnowledgeBase& kb, const std::map<std::string, EffectiveModel>& models,
                                  std::vector<Diagnostic>& diagnostics) {
    AssertionMap out;
    for (const auto& [key, a] : kb.assertions) out.emplace(key, a.value);

    for (const auto& [key, a] : kb.assertions) {
        auto mit = models.find(a.instance);
        if (mit == models.end()) continue;
        auto dit = mit->second.find(a.attribute);
        if (dit == mit->second.end() || !dit->second.complex()) continue;
        const auto& cx = *dit->second.complex();
        if (!cx.inverse) continue;

        std::vector<std::string> fillers;
        if (auto* one = std::get_if<std::string>(&a.value)) fillers.push_back(*one);
        else fillers = std::get<std::vector<std::string>>(a.value);

        for (const auto& j : fillers) {
            auto jm = models.find(j);
            if (jm == models.end()) continue;
            auto bit = jm->second.find(*cx.inverse);
            if (bit == jm->second.end() || !bit->second.complex()) continue;
            const auto& inv = *bit->second.complex();
            auto jkey = std::make_pair(j, *cx.inverse);
            if (inv.multi) {
                auto existing = out.find(jkey);
                const auto* list = existing == out.end() ? nullptr : std::get_if<std::vector<std::string>>(&existing->second);
                if (!list || std::find(list->begin(), list->end(), a.instance) == list->end()) {
                    diagnostics.push_back({ErrorCode::InvalidKB,
                                           "'" + a.instance + "." + a.attribute + "' names '" + j + "', so '" + j + "." +
                                               *cx.inverse + "' must be asserted explicitly and include '" +
                                               a.instance + "'",
                                           a.loc});
                }
                continue;
            }
            auto [it, inserted] = out.emplace(jkey, AssertedValue(a.instance));
            if (!inserted) {
                const auto* cur = std::get_if<std::string>(&it->second);
                if (!cur || *cur != a.instance) {
                    diagnostics.push_back({ErrorCode::InvalidKB,
                                           "inverse conflict: '" + a.instance + "." + a.attribute + "' implies '" + j +
                                               "." + *cx.inverse + " = " + a.instance + "'",
                                           a.loc});
                }
            }
        }
    }
    return out;
}

}  // namespace spook
