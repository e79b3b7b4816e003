#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spook/assertions.hpp"
#include "spook/model.hpp"
#include "spook/resolve.hpp"

namespace spook {

struct DepNode {
    std::string object;  // class or instance
    std::string attribute;

    std::string str() const { return object + "." + attribute; }
    auto operator<=>(const DepNode&) const = default;
    bool operator==(const DepNode&) const = default;
};

/// Influence graph over (object, attribute) pairs. A parent chain A1...Ak of
/// X.y contributes X.A1 -> X.y and, hop by hop, F.A2 -> X.A1 for every
/// object F that may fill X.A1 (asserted instance, reference entry, the
/// declared type, or, for a class, any object reaching it through the
/// inverse). Complex attributes therefore act as conduits, and the graph
/// orders every request a local computation can make.
class DependencyGraph {
public:
    int add_node(const DepNode& n);
    void add_edge(const DepNode& from, const DepNode& to);

    size_t size() const { return nodes_.size(); }
    const std::vector<DepNode>& nodes() const { return nodes_; }
    std::optional<int> find(const DepNode& n) const;
    bool has_edge(const DepNode& from, const DepNode& to) const;
    const std::set<int>& successors(int id) const { return succ_[id]; }
    size_t edge_count() const;

    /// Kahn order with lexicographic tie-break, or nullopt when cyclic.
    std::optional<std::vector<int>> topological_order() const;

    /// Witness cycle (first node repeated at the end) or empty.
    std::vector<DepNode> find_cycle() const;

private:
    std::vector<DepNode> nodes_;
    std::map<DepNode, int> index_;
    std::vector<std::set<int>> succ_;
};

/// Builds the graph from precomputed effective models and assertions.
/// Attributes whose chains do not resolve are skipped silently; the validator
/// reports them separately.
DependencyGraph build_dependency_graph(const KnowledgeBase& kb, const std::map<std::string, EffectiveModel>& models,
                                       const AssertionMap& assertions);

DependencyGraph build_dependency_graph(const KnowledgeBase& kb);

}  // namespace spook
