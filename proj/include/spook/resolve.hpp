#pragma once

#include <map>
#include <string>
#include <vector>

#include "spook/model.hpp"

namespace spook {

using EffectiveModel = std::map<std::string, AttributeDecl>;
using ModelMap = std::map<std::string, EffectiveModel>;

/// Superclass attributes merged root-first, with subclass and then instance
/// declarations shadowing. Throws IncompatibleOverride when a shadowing
/// declaration changes the attribute kind or value range.
EffectiveModel effective_model(const KnowledgeBase& kb, const std::string& object);

/// Checks that `replacement` may shadow `original`; returns an explanation
/// when it may not.
std::optional<std::string> override_conflict(const KnowledgeBase& kb, const AttributeDecl& original,
                                             const AttributeDecl& replacement);

/// Dom(a) for a value attribute, looked up in its owning model (quantifier
/// and number ranges depend on the bound of the attribute they count over).
std::vector<std::string> value_range(const EffectiveModel& model, const AttributeDecl& decl);

struct ChainResolution {
    std::vector<std::string> range;  // Dom of the terminal attribute
    std::vector<std::string> hops;   // class visited at each segment
    AttrKind terminal_kind = AttrKind::Simple;
    bool single_valued = true;
};

/// Type-checks `chain` starting from a class or instance: interior segments
/// must be single-valued complex attributes and the terminal a value
/// attribute. Interior hops follow declared types.
ChainResolution resolve_chain(const KnowledgeBase& kb, const std::string& start, const AttributeChain& chain);

/// Same, against precomputed effective models (no model is rebuilt).
ChainResolution resolve_chain(const KnowledgeBase& kb, const ModelMap& models, const std::string& start,
                              const AttributeChain& chain);

}  // namespace spook
