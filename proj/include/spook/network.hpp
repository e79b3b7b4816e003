#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spook/factor.hpp"
#include "spook/model.hpp"

namespace spook {

struct NetNode {
    std::string name;
    std::vector<std::string> states;
    std::vector<VarId> parents;
    Cpt cpt;            // rows over parent configurations, last parent fastest
    bool input = false;  // free node without a CPD
    bool defined = false;

    int card() const { return static_cast<int>(states.size()); }
};

using Evidence = std::map<VarId, int>;

/// Discrete Bayesian network. Nodes may be declared before their CPDs are
/// known so that builders can wire parents in any order; check() verifies the
/// finished network.
class DiscreteNetwork {
public:
    VarId declare(const std::string& name, std::vector<std::string> states);
    void define(VarId id, std::vector<VarId> parents, Cpt cpt);
    void make_input(VarId id);

    VarId add_node(const std::string& name, std::vector<std::string> states, std::vector<VarId> parents, Cpt cpt);
    VarId add_input(const std::string& name, std::vector<std::string> states);

    size_t size() const { return nodes_.size(); }
    const NetNode& node(VarId id) const { return nodes_.at(static_cast<size_t>(id)); }
    std::optional<VarId> find(const std::string& name) const;
    VarId id(const std::string& name) const;
    int state_index(VarId id, const std::string& value) const;

    /// Shapes, row sums and acyclicity. Throws InvalidKB.
    void check() const;

    /// Parents before children; throws CycleDetected.
    std::vector<VarId> topological_order() const;

    /// CPD as a factor over unique(parents) + self.
    Factor cpt_factor(VarId id) const;

    /// Textual dump: one block per node with its CPT rows.
    void dump(std::ostream& os) const;

    /// Renames and reorders nodes by sorted name; returns the old-to-new map.
    std::vector<VarId> canonicalize();

private:
    std::vector<NetNode> nodes_;
    std::unordered_map<std::string, VarId> by_name_;
};

}  // namespace spook
