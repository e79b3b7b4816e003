#include "random_kb.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "spook/inference.hpp"
#include "spook/kbmc.hpp"

namespace spook::testing {

namespace {

class Writer {
public:
    explicit Writer(std::uint32_t seed) : rng_(seed) {}

    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::vector<std::string> range(const std::string& stem, int card) {
        std::vector<std::string> r;
        for (int i = 0; i < card; ++i) r.push_back(stem + std::to_string(i));
        return r;
    }

    std::string braces(const std::vector<std::string>& r) {
        std::string s = "{";
        for (size_t i = 0; i < r.size(); ++i) s += (i ? ", " : "") + r[i];
        return s + "}";
    }

    // Rows of strictly positive random distributions.
    std::string cpd(int rows, int card) {
        std::uniform_real_distribution<double> u(0.05, 1.0);
        std::ostringstream os;
        os << "cpd [";
        for (int r = 0; r < rows; ++r) {
            std::vector<double> row(card);
            double sum = 0;
            for (auto& v : row) sum += (v = u(rng_));
            os << (r ? ", [" : "[");
            double acc = 0;
            for (int k = 0; k < card; ++k) {
                double v = k + 1 < card ? row[k] / sum : 1.0 - acc;
                acc += v;
                os << (k ? ", " : "") << format_number(v);
            }
            os << "]";
        }
        os << "]";
        return os.str();
    }

    std::mt19937 rng_;
};

}  // namespace

std::string describe(const RandomKbFeatures& f) {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (on) s += (s.empty() ? "" : "+") + std::string(name);
    };
    add(f.inverse, "inverse");
    add(f.number, "number");
    add(f.reference, "reference");
    add(f.two_quantifiers, "two-quantifiers");
    add(f.asserted_members, "asserted-members");
    add(f.shared_part, "shared-part");
    return s.empty() ? "plain" : s;
}

RandomCase random_case(std::uint32_t seed) {
    Writer w(seed);
    RandomCase c;
    c.seed = seed;
    auto& f = c.features;
    f.inverse = w.coin();
    f.number = w.coin();
    f.reference = w.coin();
    f.two_quantifiers = w.coin(0.4);
    f.asserted_members = !f.number && w.coin();
    f.shared_part = w.coin();

    int bound = w.pick(1, 3);
    int kp0 = w.pick(2, 3), kp1 = 2, km0 = w.pick(2, 3), km1 = 2, kh0 = 2, kh1 = 2, kt = w.pick(2, 3);
    std::ostringstream os;

    os << "class Part {\n";
    os << "  simple p0 " << w.braces(w.range("a", kp0)) << " " << w.cpd(1, kp0) << "\n";
    os << "  simple p1 " << w.braces(w.range("b", kp1)) << " parents(p0) " << w.cpd(kp0, kp1) << "\n";
    os << "}\n\n";
    if (f.reference) {
        for (const char* sub : {"Part-A", "Part-B"}) {
            os << "class " << sub << " extends Part {\n";
            os << "  simple p0 " << w.braces(w.range("a", kp0)) << " " << w.cpd(1, kp0) << "\n";
            os << "}\n\n";
        }
    }

    bool m0_up = f.inverse && w.coin(0.7);
    os << "class Member {\n";
    if (f.inverse) os << "  complex up : Hub inverse members\n";
    os << "  simple m0 " << w.braces(w.range("c", km0));
    if (m0_up) {
        os << " parents(up.h0) " << w.cpd(kh0, km0) << "\n";
    } else {
        os << " " << w.cpd(1, km0) << "\n";
    }
    os << "  simple m1 " << w.braces(w.range("d", km1)) << " parents(m0) " << w.cpd(km0, km1) << "\n";
    os << "}\n\n";

    os << "class Hub {\n";
    os << "  simple h0 " << w.braces(w.range("e", kh0)) << " " << w.cpd(1, kh0) << "\n";
    os << "  complex part : Part\n";
    if (f.reference) {
        int entries = f.shared_part ? 3 : 2;
        bool par = w.coin();
        os << "  reference part-kind over part {class Part-A, class Part-B" << (f.shared_part ? ", instance part-x" : "") << "}";
        os << (par ? " parents(h0) " : " ") << w.cpd(par ? kh0 : 1, entries) << "\n";
    }
    os << "  complex members : Member multi(" << bound << ")" << (f.inverse ? " inverse up" : "") << "\n";
    if (f.number) {
        bool par = w.coin();
        os << "  number member-count over members" << (par ? " parents(h0) " : " ") << w.cpd(par ? kh0 : 1, bound + 1) << "\n";
    }
    int v0 = w.pick(0, km0 - 1);
    os << "  quantifier qa = count(members.m0 == c" << v0 << ")\n";
    std::vector<int> qcards{bound + 1};
    std::string qparents = "qa";
    if (f.two_quantifiers) {
        os << "  quantifier qb = count(members.m1 == d" << w.pick(0, km1 - 1) << ")\n";
        qparents += ", qb";
        qcards.push_back(bound + 1);
    }
    int rows = kp1;
    for (int q : qcards) rows *= q;
    os << "  simple h1 " << w.braces(w.range("g", kh1)) << " parents(part.p1, " << qparents << ") " << w.cpd(rows, kh1) << "\n";
    os << "}\n\n";

    os << "class Top {\n";
    os << "  complex hub : Hub\n";
    os << "  complex aux : Part\n";
    os << "  simple t0 " << w.braces(w.range("t", kt)) << " parents(hub.h1, aux.p1) " << w.cpd(kh1 * kp1, kt) << "\n";
    os << "}\n\n";

    bool hub_named = w.coin(0.8);
    os << "instance top-1 : Top\n";
    if (hub_named) os << "instance hub-1 : Hub\n";
    os << "instance part-x : " << (f.reference ? (w.coin() ? "Part-A" : "Part-B") : "Part") << "\n";
    int named_members = f.asserted_members && hub_named ? w.pick(1, bound) : 0;
    for (int i = 1; i <= named_members; ++i) os << "instance member-" << i << " : Member\n";
    os << "\n";
    if (hub_named) os << "assert top-1.hub = hub-1\n";
    if (f.shared_part || !f.reference) os << "assert top-1.aux = part-x\n";
    if (hub_named && !f.reference && f.shared_part) os << "assert hub-1.part = part-x\n";
    if (hub_named && named_members) {
        os << "assert hub-1.members = {";
        for (int i = 1; i <= named_members; ++i) os << (i > 1 ? ", " : "") << "member-" << i;
        os << "}\n";
    }
    if (w.coin(0.3)) os << "assert part-x.p0 = a" << w.pick(0, kp0 - 1) << "\n";

    c.source = {os.str(), "<random-" + std::to_string(seed) + ">"};

    // Candidate chains with their ranges.
    std::vector<std::pair<ChainRef, std::vector<std::string>>> chains;
    auto add = [&](const std::string& inst, const std::string& chain, std::vector<std::string> range) {
        chains.push_back({ChainRef{inst, AttributeChain::parse(chain)}, std::move(range)});
    };
    // No two candidates name the same grounded node.
    bool aux_x = f.shared_part || !f.reference;
    bool hub_part_x = hub_named && !f.reference && f.shared_part;
    add("top-1", "t0", w.range("t", kt));
    add("top-1", "hub.h0", w.range("e", kh0));
    if (!hub_named) {
        add("top-1", "hub.h1", w.range("g", kh1));
        add("top-1", "hub.qa", count_range(bound));
    }
    if (!hub_part_x) add("top-1", "hub.part.p1", w.range("b", kp1));
    add(aux_x ? "part-x" : "top-1", aux_x ? "p1" : "aux.p1", w.range("b", kp1));
    if (f.number) add("top-1", "hub.member-count", count_range(bound));
    if (f.reference) add("top-1", "hub.part.p0", w.range("a", kp0));
    if (f.two_quantifiers) add("top-1", "hub.qb", count_range(bound));
    if (hub_named) {
        add("hub-1", "h1", w.range("g", kh1));
        add("hub-1", "qa", count_range(bound));
    }
    for (int i = 1; i <= named_members; ++i) {
        add("member-" + std::to_string(i), "m1", w.range("d", km1));
        add("member-" + std::to_string(i), "m0", w.range("c", km0));
    }

    for (int qi = 0; qi < 3; ++qi) {
        std::vector<size_t> order(chains.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), w.rng_);
        int nt = w.pick(1, 2), ne = w.pick(0, 2);
        QueryExpr q;
        for (int i = 0; i < nt; ++i) q.targets.push_back(chains[order[i]].first);
        for (int i = nt; i < nt + ne && i < static_cast<int>(order.size()); ++i) {
            const auto& [ref, range] = chains[order[i]];
            q.evidence.push_back({ref, range[w.pick(0, static_cast<int>(range.size()) - 1)]});
        }
        c.queries.push_back(std::move(q));
    }
    return c;
}

std::vector<double> enumerate_answer(const KbIndex& kb, const QueryExpr& q) {
    auto g = ground(kb, &q);
    Evidence ev = g.assertions;
    for (const auto& o : q.evidence) {
        VarId v = g.chains.at(o.target);
        ev[v] = g.net.state_index(v, o.value);
    }
    auto joint = joint_enumerate(g.net, ev, 1ull << 22);

    // Targets may alias each other or an evidence node.
    std::vector<VarId> vars, free;
    std::vector<int> cards;
    for (const auto& t : q.targets) {
        VarId v = g.chains.at(t);
        vars.push_back(v);
        cards.push_back(g.net.node(v).card());
        if (!ev.count(v) && std::find(free.begin(), free.end(), v) == free.end()) free.push_back(v);
    }
    auto m = marginalize(joint, free);
    size_t total = 1;
    for (int k : cards) total *= static_cast<size_t>(k);
    std::vector<double> out(total, 0.0);
    for (size_t idx = 0; idx < total; ++idx) {
        std::map<VarId, int> assign;
        size_t rest = idx;
        bool ok = true;
        for (size_t i = vars.size(); i-- > 0;) {
            int s = static_cast<int>(rest % static_cast<size_t>(cards[i]));
            rest /= static_cast<size_t>(cards[i]);
            auto [it, fresh] = assign.emplace(vars[i], s);
            if (!fresh && it->second != s) ok = false;
            if (auto e = ev.find(vars[i]); e != ev.end() && e->second != s) ok = false;
        }
        if (!ok) continue;
        size_t cell = 0;
        for (size_t i = 0; i < free.size(); ++i) cell = cell * static_cast<size_t>(m.cards[i]) + static_cast<size_t>(assign[free[i]]);
        out[idx] = m.table[cell];
    }
    return out;
}

}  // namespace spook::testing
