#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spook/inference.hpp"
#include "spook/kb_index.hpp"
#include "spook/query_result.hpp"

namespace spook {

struct StructuredOptions {
    bool reuse = true;
    /// Expand multi-valued attributes into n filler copies with counting CPDs
    /// instead of the quantifier recurrence.
    bool naive_quantifiers = false;
    int depth_cap = 64;
    /// Triangulate every local network to report its max clique.
    bool clique_stats = false;
    InferenceOptions inference;
};

/// SolveQuery(target, outputs, entry) on a class.
struct SubQuery {
    std::string target;
    std::vector<AttributeChain> outputs;  // sorted, deduplicated
    std::optional<std::string> entry;

    SubQuery canonical() const;
    std::string key() const;
};

/// An input of a subquery result: a chain on the caller reached through the
/// entry point, or a chain on a named instance reached through a reference
/// choice.
struct InputRef {
    std::optional<std::string> instance;
    AttributeChain chain;

    std::string str() const;
    auto operator<=>(const InputRef&) const = default;
    bool operator==(const InputRef&) const = default;
};

struct SubQueryResult {
    std::vector<InputRef> inputs;
    std::vector<std::vector<std::string>> input_ranges;
    std::vector<std::vector<std::string>> output_ranges;
    /// One row per joint input configuration (last input fastest); each row a
    /// distribution over joint outputs (last output fastest).
    std::vector<std::vector<double>> table;
    int max_clique = 0;
};

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t entries = 0;
};

class StructuredEngine {
public:
    StructuredEngine(KbHandle kb, StructuredOptions opts = {});

    /// Answers a user query through the top-level object.
    QueryResult solve_top_level(const QueryExpr& query);

    /// Recursive call on a class.
    std::shared_ptr<const SubQueryResult> solve_query(const SubQuery& q);

    CacheStats cache_stats() const;
    /// Hits and misses per target class.
    std::map<std::string, CacheStats> cache_stats_by_class() const;
    void clear_cache();

    const StructuredOptions& options() const { return opts_; }
    StructuredOptions& options() { return opts_; }
    const KbIndex& kb() const { return *kb_; }

    /// Max clique over all local networks built so far (clique_stats only).
    int max_local_clique() const;

private:
    friend class LocalBuilder;
    std::shared_ptr<const SubQueryResult> solve(const SubQuery& q, int depth);
    void note_network(size_t nodes, int clique, std::uint64_t ops, std::uint64_t aggregate_ops);

    KbHandle kb_;
    StructuredOptions opts_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<const SubQueryResult>> cache_;
    std::map<std::string, CacheStats> per_class_;
    CacheStats totals_;
    EngineStats stats_;
};

}  // namespace spook
