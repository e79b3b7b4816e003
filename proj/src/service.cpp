#include "spook/service.hpp"

#include <algorithm>
#include <chrono>

#include "spook/kbmc.hpp"

namespace spook {

std::string_view to_string(Backend b) { return b == Backend::Kbmc ? "kbmc" : "structured"; }

Backend parse_backend(std::string_view name) {
    if (name == "structured") return Backend::Structured;
    if (name == "kbmc") return Backend::Kbmc;
    throw Error(ErrorCode::BadValue, "unknown backend '" + std::string(name) + "' (expected structured or kbmc)");
}

Service::Service(ServiceOptions opts) : opts_(opts) {}

std::string Service::load_kb(const SourceKB& source) {
    auto index = KbIndex::build(parse_kb(source));
    auto engine = std::make_shared<StructuredEngine>(index, opts_.structured);
    std::lock_guard lock(mu_);
    std::string id = "kb-" + std::to_string(next_kb_++);
    kbs_.emplace(id, LoadedKb{index, engine});
    return id;
}

const Service::LoadedKb& Service::loaded(const std::string& kb_id) const {
    std::lock_guard lock(mu_);
    auto it = kbs_.find(kb_id);
    if (it == kbs_.end()) throw Error(ErrorCode::UnknownKB, "no knowledge base '" + kb_id + "'");
    return it->second;
}

KbHandle Service::kb(const std::string& kb_id) const { return loaded(kb_id).index; }

nlohmann::json Service::model_graph(const std::string& kb_id) const { return spook::model_graph(kb(kb_id)->kb()); }

std::string Service::create_session(const std::string& kb_id, Backend backend) {
    loaded(kb_id);
    auto s = std::make_shared<Session>();
    s->kb_id = kb_id;
    s->backend = backend;
    std::lock_guard lock(mu_);
    std::string id = "s-" + std::to_string(next_session_++);
    sessions_.emplace(id, std::move(s));
    return id;
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
    return it->second;
}

std::vector<Observation> Service::observe(const std::string& id, const Observation& obs) {
    auto s = session(id);
    auto index = kb(s->kb_id);
    check_query(QueryExpr{{obs.target}, {obs}}, *index);
    std::lock_guard lock(s->mu);
    for (const auto& e : s->evidence) {
        if (e.target != obs.target) continue;
        if (e.value == obs.value) return s->evidence;
        throw Error(ErrorCode::ContradictoryEvidence,
                    obs.target.str() + " is already observed as '" + e.value + "'; retract it first");
    }
    s->evidence.push_back(obs);
    return s->evidence;
}

std::vector<Observation> Service::retract(const std::string& id, const ChainRef& target) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    auto it = std::find_if(s->evidence.begin(), s->evidence.end(), [&](const Observation& o) { return o.target == target; });
    if (it == s->evidence.end()) throw Error(ErrorCode::NotFound, target.str() + " is not observed");
    s->evidence.erase(it);
    return s->evidence;
}

std::vector<Observation> Service::evidence(const std::string& id) const {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    return s->evidence;
}

HistoryEntry Service::query(const std::string& id, const std::vector<ChainRef>& targets) {
    auto s = session(id);
    const auto& kb = loaded(s->kb_id);
    std::lock_guard lock(s->mu);
    HistoryEntry h;
    h.targets = targets;
    h.evidence = s->evidence;
    QueryExpr q{targets, s->evidence};
    auto start = std::chrono::steady_clock::now();
    if (s->backend == Backend::Kbmc) {
        KbmcOptions opts;
        opts.inference = opts_.structured.inference;
        h.result = answer_query_kbmc(*kb.index, q, opts);
    } else {
        h.result = kb.engine->solve_top_level(q);
    }
    h.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    s->history.push_back(h);
    return h;
}

std::vector<HistoryEntry> Service::history(const std::string& id) const {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    return s->history;
}

void Service::set_backend(const std::string& id, Backend backend) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    s->backend = backend;
}

Backend Service::backend(const std::string& id) const {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    return s->backend;
}

std::string Service::session_kb(const std::string& id) const { return session(id)->kb_id; }

CacheStats Service::cache_stats(const std::string& kb_id) const { return loaded(kb_id).engine->cache_stats(); }

std::map<std::string, CacheStats> Service::cache_stats_by_class(const std::string& kb_id) const {
    return loaded(kb_id).engine->cache_stats_by_class();
}

// ---- JSON ----------------------------------------------------------------

nlohmann::json to_json(const Error& e) {
    nlohmann::json j{{"code", std::string(to_string(e.code()))}, {"message", e.message()}};
    if (e.location()) {
        j["location"] = {{"file", e.location()->file}, {"line", e.location()->line}, {"column", e.location()->column}};
    }
    return j;
}

nlohmann::json to_json(const Observation& o) {
    return {{"instance", o.target.instance}, {"chain", o.target.chain.str()}, {"value", o.value}};
}

nlohmann::json to_json(const std::vector<Observation>& evidence) {
    auto arr = nlohmann::json::array();
    for (const auto& o : evidence) arr.push_back(to_json(o));
    return arr;
}

nlohmann::json to_json(const QueryResult& r) {
    auto targets = nlohmann::json::array();
    for (size_t i = 0; i < r.targets.size(); ++i) {
        targets.push_back({{"target", r.targets[i].str()}, {"range", r.ranges[i]}, {"marginal", r.marginal(i)}});
    }
    const auto& s = r.stats;
    return {{"targets", targets},
            {"joint", r.joint},
            {"stats",
             {{"ops", s.ops},
              {"aggregate_ops", s.aggregate_ops},
              {"max_clique", s.max_clique},
              {"cache_hits", s.cache_hits},
              {"cache_misses", s.cache_misses},
              {"cache_entries", s.cache_entries},
              {"local_networks", s.local_networks},
              {"network_nodes", s.network_nodes},
              {"seconds", s.seconds}}}};
}

nlohmann::json to_json(const HistoryEntry& h) {
    auto targets = nlohmann::json::array();
    for (const auto& t : h.targets) targets.push_back(t.str());
    return {{"targets", targets}, {"evidence", to_json(h.evidence)}, {"result", to_json(h.result)}, {"seconds", h.seconds}};
}

nlohmann::json model_graph(const KnowledgeBase& kb) {
    auto nodes = nlohmann::json::array();
    auto edges = nlohmann::json::array();
    for (const auto& [name, c] : kb.classes) {
        nodes.push_back({{"id", name}, {"kind", "class"}});
        if (c.superclass) edges.push_back({{"from", name}, {"to", *c.superclass}, {"kind", "is-a"}});
        for (const auto& [attr, d] : c.attributes) {
            const auto* cx = d.complex();
            if (!cx) continue;
            nlohmann::json e{{"from", name}, {"to", cx->type}, {"kind", "complex"}, {"attribute", attr}, {"multi", cx->multi}};
            if (cx->multi) e["bound"] = cx->bound;
            if (cx->inverse) e["inverse"] = *cx->inverse;
            edges.push_back(std::move(e));
        }
    }
    for (const auto& [name, inst] : kb.instances) {
        nodes.push_back({{"id", name}, {"kind", "instance"}, {"class", inst.class_name}});
        edges.push_back({{"from", name}, {"to", inst.class_name}, {"kind", "instance-of"}});
    }
    for (const auto& [key, a] : kb.assertions) {
        std::vector<std::string> fillers;
        if (const auto* list = std::get_if<std::vector<std::string>>(&a.value)) {
            fillers = *list;
        } else if (kb.is_instance(std::get<std::string>(a.value))) {
            fillers.push_back(std::get<std::string>(a.value));
        }
        for (const auto& f : fillers) edges.push_back({{"from", a.instance}, {"to", f}, {"kind", "filler"}, {"attribute", a.attribute}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace spook
