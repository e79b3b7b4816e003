#pragma once

#include <map>
#include <string>
#include <vector>

#include "spook/inference.hpp"
#include "spook/kb_index.hpp"
#include "spook/network.hpp"
#include "spook/query_result.hpp"

namespace spook {

struct KbmcOptions {
    int depth_cap = 32;
    /// Ground every value attribute of every named instance, not only what the
    /// query and the assertions reach.
    bool ground_all_named = true;
    InferenceOptions inference;
};

/// Flat network plus the grounded-path names of the query's chains.
struct GroundedNetwork {
    DiscreteNetwork net;
    std::map<ChainRef, VarId> chains;  // named-instance chains that were grounded
    Evidence assertions;               // asserted values of grounded nodes
};

/// Grounds the KB (and the chains of `query`, if given) into one network.
/// Node names are paths: `inst/attr[i]/attr.leaf`, `obj/attr@Class` for a
/// reference choice and `obj/attr{chain}` for a multiplexed chain.
GroundedNetwork ground(const KbIndex& kb, const QueryExpr* query = nullptr, const KbmcOptions& opts = {});

/// Grounds, maps the query onto the flat network and runs exact inference.
QueryResult answer_query_kbmc(const KbIndex& kb, const QueryExpr& query, const KbmcOptions& opts = {},
                              GroundedNetwork* grounded = nullptr);

}  // namespace spook
