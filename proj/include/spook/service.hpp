#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "spook/lang.hpp"
#include "spook/query_result.hpp"
#include "spook/structured.hpp"

namespace spook {

enum class Backend { Structured, Kbmc };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view name);

struct HistoryEntry {
    std::vector<ChainRef> targets;
    std::vector<Observation> evidence;
    QueryResult result;
    double seconds = 0;
};

struct ServiceOptions {
    StructuredOptions structured;
};

/// Loaded KBs and evidence sessions. Safe for concurrent use; each session
/// serializes its own operations.
class Service {
public:
    explicit Service(ServiceOptions opts = {});

    std::string load_kb(const SourceKB& source);
    KbHandle kb(const std::string& kb_id) const;
    nlohmann::json model_graph(const std::string& kb_id) const;

    std::string create_session(const std::string& kb_id, Backend backend = Backend::Structured);
    std::vector<Observation> observe(const std::string& session, const Observation& obs);
    std::vector<Observation> retract(const std::string& session, const ChainRef& target);
    std::vector<Observation> evidence(const std::string& session) const;
    HistoryEntry query(const std::string& session, const std::vector<ChainRef>& targets);
    std::vector<HistoryEntry> history(const std::string& session) const;
    void set_backend(const std::string& session, Backend backend);
    Backend backend(const std::string& session) const;
    std::string session_kb(const std::string& session) const;

    /// Structured cache counters for a KB.
    CacheStats cache_stats(const std::string& kb_id) const;
    std::map<std::string, CacheStats> cache_stats_by_class(const std::string& kb_id) const;

private:
    struct LoadedKb {
        KbHandle index;
        std::shared_ptr<StructuredEngine> engine;
    };
    struct Session {
        std::string kb_id;
        Backend backend = Backend::Structured;
        std::vector<Observation> evidence;
        std::vector<HistoryEntry> history;
        mutable std::mutex mu;
    };

    const LoadedKb& loaded(const std::string& kb_id) const;
    std::shared_ptr<Session> session(const std::string& id) const;

    ServiceOptions opts_;
    mutable std::mutex mu_;
    std::map<std::string, LoadedKb> kbs_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    int next_kb_ = 1;
    int next_session_ = 1;
};

nlohmann::json to_json(const Error& e);
nlohmann::json to_json(const Observation& o);
nlohmann::json to_json(const QueryResult& r);
nlohmann::json to_json(const HistoryEntry& h);
nlohmann::json to_json(const std::vector<Observation>& evidence);

/// Class/instance topology: objects as nodes; is-a, instance-of, complex
/// attribute (with inverse annotation) and asserted-filler edges.
nlohmann::json model_graph(const KnowledgeBase& kb);

/// JSON API over a Service. bind() then listen() (blocking); stop() from
/// another thread.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Line-oriented interactive loop over one session. Returns 0 on `quit` or
/// end of input. A non-empty `initial` is loaded before the first prompt.
int run_repl(Service& service, std::istream& in, std::ostream& out, Backend backend = Backend::Structured,
             bool prompt = true, const std::string& initial = "");

}  // namespace spook
