#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spook/lang.hpp"
#include "spook/query_result.hpp"

namespace spook::testing {

struct RandomKbFeatures {
    bool inverse = false;
    bool number = false;
    bool reference = false;
    bool two_quantifiers = false;
    bool asserted_members = false;
    bool shared_part = false;
};

struct RandomCase {
    std::uint32_t seed = 0;
    RandomKbFeatures features;
    SourceKB source;
    std::vector<QueryExpr> queries;
};

/// Small KB with a hub class holding a multi-valued member attribute, a
/// single-valued part and a top class above it. Every feature flag comes
/// from the seed; all CPD entries are strictly positive.
RandomCase random_case(std::uint32_t seed);

/// Brute-force answer: enumerate the full joint of the grounded network and
/// sum it down to the query targets.
std::vector<double> enumerate_answer(const KbIndex& kb, const QueryExpr& q);

std::string describe(const RandomKbFeatures& f);

}  // namespace spook::testing
