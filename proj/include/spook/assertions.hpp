#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spook/model.hpp"
#include "spook/resolve.hpp"

namespace spook {

struct Diagnostic {
    ErrorCode code;
    std::string message;
    std::optional<SourceLocation> location;

    std::string str() const;
};

using AssertionMap = std::map<std::pair<std::string, std::string>, AssertedValue>;

/// Explicit assertions plus those implied through inverses: asserting
/// I.A = J where A has inverse B implies J.B = I. Implications into a
/// multi-valued B are not inferred; the explicit filler list must contain I.
/// Conflicts are reported into `diagnostics` and the offending implication
/// is dropped.
AssertionMap effective_assertions(const KnowledgeBase& kb, const std::map<std::string, EffectiveModel>& models,
                                  std::vector<Diagnostic>& diagnostics);

}  // namespace spook
