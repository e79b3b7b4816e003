#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spook/assertions.hpp"
#include "spook/depgraph.hpp"
#include "spook/model.hpp"
#include "spook/resolve.hpp"

namespace spook {

/// Compiled view of a validated knowledge base shared by both backends.
/// Immutable once built.
class KbIndex {
public:
    /// Validates and compiles; throws InvalidKB listing every diagnostic.
    static std::shared_ptr<const KbIndex> build(KnowledgeBase kb);

    const KnowledgeBase& kb() const { return kb_; }
    const ModelMap& models() const { return models_; }
    const AssertionMap& assertions() const { return assertions_; }
    const DependencyGraph& graph() const { return graph_; }

    bool is_instance(const std::string& name) const { return kb_.is_instance(name); }
    const std::string& class_of(const std::string& object) const { return kb_.class_of(object); }

    const EffectiveModel& model(const std::string& object) const;
    const AttributeDecl* find(const std::string& object, const std::string& attr) const;
    const AttributeDecl& decl(const std::string& object, const std::string& attr) const;

    /// Dom of a value attribute.
    const std::vector<std::string>& range(const std::string& object, const std::string& attr) const;
    const std::vector<std::string>& chain_range(const std::string& object, const AttributeChain& chain) const;

    /// Name of the number / reference attribute over `attr`, if declared.
    const std::string* number_over(const std::string& object, const std::string& attr) const;
    const std::string* reference_over(const std::string& object, const std::string& attr) const;

    const AssertedValue* asserted(const std::string& instance, const std::string& attr) const;

    /// Position of (object, attr) in the dependency topological order.
    int rank(const std::string& object, const std::string& attr) const;

    /// Attributes of `object` ordered children before parents.
    const std::vector<std::string>& processing_order(const std::string& object) const;

    /// Every (named instance, attribute) pair ordered children before parents.
    const std::vector<DepNode>& top_level_order() const { return top_order_; }

    std::vector<std::string> instance_names() const;

private:
    struct ObjectInfo {
        std::unordered_map<std::string, std::vector<std::string>> ranges;
        std::unordered_map<std::string, std::string> number_of;
        std::unordered_map<std::string, std::string> reference_of;
        std::unordered_map<std::string, int> rank_of;
        std::unordered_map<std::string, const AssertedValue*> asserted;
        std::vector<std::string> order;
    };

    KnowledgeBase kb_;
    ModelMap models_;
    AssertionMap assertions_;
    DependencyGraph graph_;
    std::unordered_map<std::string, ObjectInfo> info_;
    std::map<DepNode, int> rank_;
    std::vector<DepNode> top_order_;
    mutable std::mutex memo_mu_;
    mutable std::map<std::pair<std::string, AttributeChain>, std::vector<std::string>> chain_memo_;
};

using KbHandle = std::shared_ptr<const KbIndex>;

}  // namespace spook
