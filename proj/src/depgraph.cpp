#include "spook/depgraph.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace spook {

int DependencyGraph::add_node(const DepNode& n) {
    auto [it, inserted] = index_.emplace(n, static_cast<int>(nodes_.size()));
    if (inserted) {
        nodes_.push_back(n);
        succ_.emplace_back();
    }
    return it->second;
}

void DependencyGraph::add_edge(const DepNode& from, const DepNode& to) {
    auto a = find(from);
    auto b = find(to);
    if (!a || !b) return;
    succ_[*a].insert(*b);
}

std::optional<int> DependencyGraph::find(const DepNode& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool DependencyGraph::has_edge(const DepNode& from, const DepNode& to) const {
    auto a = find(from);
    auto b = find(to);
    return a && b && succ_[*a].count(*b);
}

size_t DependencyGraph::edge_count() const {
    size_t n = 0;
    for (const auto& s : succ_) n += s.size();
    return n;
}

std::optional<std::vector<int>> DependencyGraph::topological_order() const {
    std::vector<int> indegree(nodes_.size(), 0);
    for (const auto& s : succ_)
        for (int t : s) ++indegree[t];
    // index_ is ordered by DepNode, so map ids onto lexicographic ranks
    std::vector<int> lex_rank(nodes_.size());
    {
        int r = 0;
        for (const auto& [node, id] : index_) lex_rank[id] = r++;
    }
    auto cmp = [&](int a, int b) { return lex_rank[a] > lex_rank[b]; };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (indegree[i] == 0) ready.push(static_cast<int>(i));
    std::vector<int> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int t : succ_[v])
            if (--indegree[t] == 0) ready.push(t);
    }
    if (order.size() != nodes_.size()) return std::nullopt;
    return order;
}

std::vector<DepNode> DependencyGraph::find_cycle() const {
    enum : char { White, Grey, Black };
    std::vector<char> colour(nodes_.size(), White);
    std::vector<int> stack;
    std::vector<DepNode> cycle;
    std::function<bool(int)> dfs = [&](int v) {
        colour[v] = Grey;
        stack.push_back(v);
        for (int t : succ_[v]) {
            if (colour[t] == Grey) {
                auto it = std::find(stack.begin(), stack.end(), t);
                for (; it != stack.end(); ++it) cycle.push_back(nodes_[*it]);
                cycle.push_back(nodes_[t]);
                return true;
            }
            if (colour[t] == White && dfs(t)) return true;
        }
        stack.pop_back();
        colour[v] = Black;
        return false;
    };
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (colour[i] == White && dfs(static_cast<int>(i))) break;
    return cycle;
}

namespace {

class GraphBuilder {
public:
    GraphBuilder(const KnowledgeBase& kb, const std::map<std::string, EffectiveModel>& models,
                 const AssertionMap& assertions)
        : kb_(kb), models_(models), assertions_(assertions) {}

    DependencyGraph build() {
        for (const auto& [obj, model] : models_)
            for (const auto& [attr, decl] : model) graph_.add_node({obj, attr});
        index_callers();
        for (const auto& [obj, model] : models_) {
            for (const auto& [attr, decl] : model) {
                DepNode self{obj, attr};
                for (const auto& chain : decl.parents()) add_chain(obj, chain, self);
                if (auto* q = decl.quantifier()) {
                    DepNode over{obj, q->over};
                    graph_.add_edge(over, self);
                    if (is_complex(obj, q->over)) {
                        for (const auto& f : fillers(obj, q->over)) add_chain(f, q->chain, over);
                    }
                }
                if (auto* n = decl.number()) graph_.add_edge(self, {obj, n->over});
                if (auto* r = decl.reference()) graph_.add_edge(self, {obj, r->over});
            }
        }
        return std::move(graph_);
    }

private:
    const AttributeDecl* decl_of(const std::string& obj, const std::string& attr) const {
        auto m = models_.find(obj);
        if (m == models_.end()) return nullptr;
        auto d = m->second.find(attr);
        return d == m->second.end() ? nullptr : &d->second;
    }

    bool is_complex(const std::string& obj, const std::string& attr) const {
        const auto* d = decl_of(obj, attr);
        return d && d->complex();
    }

    const ReferenceAttr* reference_over(const std::string& obj, const std::string& attr) const {
        auto m = models_.find(obj);
        if (m == models_.end()) return nullptr;
        for (const auto& [n, d] : m->second)
            if (auto* r = d.reference(); r && r->over == attr) return r;
        return nullptr;
    }

    /// Classes a generic filler of obj.attr can be instantiated from.
    std::vector<std::string> generic_classes(const std::string& obj, const std::string& attr) const {
        std::vector<std::string> out;
        if (kb_.is_instance(obj) && assertions_.count({obj, attr})) return out;
        if (const auto* r = reference_over(obj, attr)) {
            for (const auto& e : r->entries)
                if (e.kind == ReferenceEntry::Kind::Class) out.push_back(e.name);
            return out;
        }
        if (const auto* d = decl_of(obj, attr); d && d->complex()) out.push_back(d->complex()->type);
        return out;
    }

    void index_callers() {
        for (const auto& [obj, model] : models_) {
            for (const auto& [attr, decl] : model) {
                const auto* cx = decl.complex();
                if (!cx || !cx->inverse) continue;
                for (const auto& cls : generic_classes(obj, attr)) callers_[{cls, *cx->inverse}].insert(obj);
            }
        }
    }

    std::set<std::string> fillers(const std::string& obj, const std::string& attr) const {
        std::set<std::string> out;
        if (kb_.is_instance(obj)) {
            if (auto it = assertions_.find({obj, attr}); it != assertions_.end()) {
                if (auto* one = std::get_if<std::string>(&it->second)) out.insert(*one);
                else for (const auto& j : std::get<std::vector<std::string>>(it->second)) out.insert(j);
                return out;
            }
        }
        if (const auto* r = reference_over(obj, attr)) {
            for (const auto& e : r->entries) out.insert(e.name);
        } else if (const auto* d = decl_of(obj, attr); d && d->complex()) {
            out.insert(d->complex()->type);
        }
        if (kb_.is_class(obj)) {
            if (auto it = callers_.find({obj, attr}); it != callers_.end()) out.insert(it->second.begin(), it->second.end());
        }
        std::set<std::string> known;
        for (const auto& f : out)
            if (models_.count(f)) known.insert(f);
        return known;
    }

    void add_chain(const std::string& obj, const AttributeChain& chain, const DepNode& target) {
        DepNode head{obj, chain.head()};
        graph_.add_edge(head, target);
        if (chain.size() < 2 || !is_complex(obj, chain.head())) return;
        if (!expanded_.insert({obj, chain.str()}).second) return;
        auto rest = chain.tail();
        for (const auto& f : fillers(obj, chain.head())) add_chain(f, rest, head);
    }

    const KnowledgeBase& kb_;
    const std::map<std::string, EffectiveModel>& models_;
    const AssertionMap& assertions_;
    DependencyGraph graph_;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> callers_;
    std::set<std::pair<std::string, std::string>> expanded_;
};

}  // namespace

DependencyGraph build_dependency_graph(const KnowledgeBase& kb, const std::map<std::string, EffectiveModel>& models,
                                       const AssertionMap& assertions) {
    return GraphBuilder(kb, models, assertions).build();
}

DependencyGraph build_dependency_graph(const KnowledgeBase& kb) {
    std::map<std::string, EffectiveModel> models;
    auto collect = [&](const std::string& name) {
        try {
            models.emplace(name, effective_model(kb, name));
        } catch (const Error&) {
        }
    };
    for (const auto& [n, c] : kb.classes) collect(n);
    for (const auto& [n, i] : kb.instances) collect(n);
    std::vector<Diagnostic> ignored;
    auto assertions = effective_assertions(kb, models, ignored);
    return build_dependency_graph(kb, models, assertions);
}

}  // namespace spook
