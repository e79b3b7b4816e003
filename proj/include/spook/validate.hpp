#pragma once

#include <string>
#include <vector>

#include "spook/assertions.hpp"
#include "spook/model.hpp"

namespace spook {

struct ValidationReport {
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
    /// One diagnostic per line.
    std::string str() const;
};

/// Structural, type and probabilistic well-formedness. Never throws.
ValidationReport validate_kb(const KnowledgeBase& kb);

/// Tolerance on CPT row sums.
inline constexpr double kRowTolerance = 1e-9;

}  // namespace spook
