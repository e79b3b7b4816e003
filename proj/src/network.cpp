#include "spook/network.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>

#include "spook/lang.hpp"

namespace spook {

VarId DiscreteNetwork::declare(const std::string& name, std::vector<std::string> states) {
    if (by_name_.count(name)) throw Error(ErrorCode::DuplicateName, "network node '" + name + "' declared twice");
    if (states.empty()) throw Error(ErrorCode::InvalidKB, "network node '" + name + "' has no states");
    VarId id = static_cast<VarId>(nodes_.size());
    if (nodes_.empty()) nodes_.reserve(8);
    NetNode n;
    n.name = name;
    n.states = std::move(states);
    nodes_.push_back(std::move(n));
    by_name_.emplace(name, id);
    return id;
}

void DiscreteNetwork::define(VarId id, std::vector<VarId> parents, Cpt cpt) {
    auto& n = nodes_.at(static_cast<size_t>(id));
    n.parents = std::move(parents);
    n.cpt = std::move(cpt);
    n.input = false;
    n.defined = true;
}

void DiscreteNetwork::make_input(VarId id) {
    auto& n = nodes_.at(static_cast<size_t>(id));
    n.parents.clear();
    n.cpt.rows.clear();
    n.input = true;
    n.defined = true;
}

VarId DiscreteNetwork::add_node(const std::string& name, std::vector<std::string> states, std::vector<VarId> parents, Cpt cpt) {
    VarId id = declare(name, std::move(states));
    define(id, std::move(parents), std::move(cpt));
    return id;
}

VarId DiscreteNetwork::add_input(const std::string& name, std::vector<std::string> states) {
    VarId id = declare(name, std::move(states));
    make_input(id);
    return id;
}

std::optional<VarId> DiscreteNetwork::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

VarId DiscreteNetwork::id(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw Error(ErrorCode::NotFound, "no network node '" + name + "'");
    return it->second;
}

int DiscreteNetwork::state_index(VarId v, const std::string& value) const {
    const auto& st = node(v).states;
    auto it = std::find(st.begin(), st.end(), value);
    if (it == st.end()) throw Error(ErrorCode::BadValue, "'" + value + "' is not a state of '" + node(v).name + "'");
    return static_cast<int>(it - st.begin());
}

void DiscreteNetwork::check() const {
    for (const auto& n : nodes_) {
        if (!n.defined) throw Error(ErrorCode::InvalidKB, "network node '" + n.name + "' has no CPD");
        if (n.input) continue;
        size_t rows = 1;
        for (VarId p : n.parents) {
            if (p < 0 || static_cast<size_t>(p) >= nodes_.size()) {
                throw Error(ErrorCode::InvalidKB, "network node '" + n.name + "' has a dangling parent");
            }
            rows *= static_cast<size_t>(nodes_[static_cast<size_t>(p)].card());
        }
        if (n.cpt.rows.size() != rows) {
            throw Error(ErrorCode::InvalidKB, "network node '" + n.name + "' has " + std::to_string(n.cpt.rows.size()) +
                                                  " CPT rows, expected " + std::to_string(rows));
        }
        for (const auto& row : n.cpt.rows) {
            if (row.size() != n.states.size()) throw Error(ErrorCode::InvalidKB, "network node '" + n.name + "' has a short CPT row");
            double s = 0;
            for (double p : row) {
                if (!(p >= 0)) throw Error(ErrorCode::InvalidKB, "network node '" + n.name + "' has a negative entry");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorCode::InvalidKB, "network node '" + n.name + "' has a row not summing to 1");
        }
    }
    topological_order();
}

std::vector<VarId> DiscreteNetwork::topological_order() const {
    std::vector<int> indeg(nodes_.size(), 0);
    std::vector<std::vector<VarId>> children(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) {
        std::vector<VarId> ps = nodes_[i].parents;
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        for (VarId p : ps) {
            children[static_cast<size_t>(p)].push_back(static_cast<VarId>(i));
            ++indeg[i];
        }
    }
    std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (!indeg[i]) ready.push(static_cast<VarId>(i));
    std::vector<VarId> order;
    while (!ready.empty()) {
        VarId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (VarId c : children[static_cast<size_t>(v)])
            if (--indeg[static_cast<size_t>(c)] == 0) ready.push(c);
    }
    if (order.size() != nodes_.size()) {
        std::string stuck;
        for (size_t i = 0; i < nodes_.size(); ++i)
            if (indeg[i]) {
                stuck = nodes_[i].name;
                break;
            }
        throw Error(ErrorCode::CycleDetected, "network is cyclic (involving '" + stuck + "')");
    }
    return order;
}

Factor DiscreteNetwork::cpt_factor(VarId id) const {
    const auto& n = node(id);
    Factor f;
    if (n.input) {
        f.vars = {id};
        f.cards = {n.card()};
        f.table.assign(static_cast<size_t>(n.card()), 1.0);
        return f;
    }
    std::vector<VarId> uniq;
    for (VarId p : n.parents)
        if (std::find(uniq.begin(), uniq.end(), p) == uniq.end()) uniq.push_back(p);
    if (std::find(uniq.begin(), uniq.end(), id) != uniq.end()) throw Error(ErrorCode::CycleDetected, "node '" + n.name + "' is its own parent");
    bool plain = uniq.size() == n.parents.size();
    f.vars = uniq;
    f.vars.push_back(id);
    for (VarId p : uniq) f.cards.push_back(node(p).card());
    f.cards.push_back(n.card());
    if (plain) {
        f.table.reserve(n.cpt.rows.size() * n.states.size());
        for (const auto& row : n.cpt.rows) f.table.insert(f.table.end(), row.begin(), row.end());
        return f;
    }
    // repeated parents: keep the diagonal of the declared table
    size_t cfgs = 1;
    for (VarId p : uniq) cfgs *= static_cast<size_t>(node(p).card());
    std::vector<int> digit(uniq.size(), 0);
    for (size_t c = 0; c < cfgs; ++c) {
        size_t row = 0;
        for (VarId p : n.parents) {
            auto at = std::find(uniq.begin(), uniq.end(), p) - uniq.begin();
            row = row * static_cast<size_t>(node(p).card()) + static_cast<size_t>(digit[static_cast<size_t>(at)]);
        }
        const auto& r = n.cpt.rows.at(row);
        f.table.insert(f.table.end(), r.begin(), r.end());
        for (int pos = static_cast<int>(uniq.size()) - 1; pos >= 0; --pos) {
            if (++digit[pos] < node(uniq[pos]).card()) break;
            digit[pos] = 0;
        }
    }
    return f;
}

void DiscreteNetwork::dump(std::ostream& os) const {
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        os << "node " << i << " " << n.name << " {";
        for (size_t s = 0; s < n.states.size(); ++s) os << (s ? ", " : "") << n.states[s];
        os << "}";
        if (n.input) {
            os << " input\n";
            continue;
        }
        os << " parents(";
        for (size_t p = 0; p < n.parents.size(); ++p) os << (p ? ", " : "") << nodes_[static_cast<size_t>(n.parents[p])].name;
        os << ")\n";
        for (const auto& row : n.cpt.rows) {
            os << "  ";
            for (size_t k = 0; k < row.size(); ++k) os << (k ? " " : "") << format_number(row[k]);
            os << "\n";
        }
    }
}

std::vector<VarId> DiscreteNetwork::canonicalize() {
    std::vector<VarId> old_to_new(nodes_.size());
    std::vector<VarId> new_to_old;
    for (size_t i = 0; i < nodes_.size(); ++i) new_to_old.push_back(static_cast<VarId>(i));
    std::sort(new_to_old.begin(), new_to_old.end(), [&](VarId a, VarId b) {
        return nodes_[static_cast<size_t>(a)].name < nodes_[static_cast<size_t>(b)].name;
    });
    for (size_t k = 0; k < new_to_old.size(); ++k) old_to_new[static_cast<size_t>(new_to_old[k])] = static_cast<VarId>(k);
    std::vector<NetNode> fresh;
    fresh.reserve(nodes_.size());
    for (VarId old : new_to_old) {
        NetNode n = std::move(nodes_[static_cast<size_t>(old)]);
        for (auto& p : n.parents) p = old_to_new[static_cast<size_t>(p)];
        fresh.push_back(std::move(n));
    }
    nodes_ = std::move(fresh);
    for (auto& [name, id] : by_name_) id = old_to_new[static_cast<size_t>(id)];
    return old_to_new;
}

}  // namespace spook
