#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "spook/service.hpp"

namespace spook {

namespace {

const char* kHelp =
    "commands:\n"
    "  load <file>              load a knowledge base and open a session on it\n"
    "  observe I.chain = v      add evidence\n"
    "  retract I.chain          remove evidence\n"
    "  query I.chain, ...       posterior under the current evidence\n"
    "  evidence                 list current evidence\n"
    "  history                  past queries of this session\n"
    "  stats                    structured cache counters\n"
    "  backend structured|kbmc  switch inference backend\n"
    "  quit\n";

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void print_result(std::ostream& out, const QueryResult& r) {
    for (size_t i = 0; i < r.targets.size(); ++i) {
        out << r.targets[i].str() << ":";
        auto m = r.marginal(i);
        for (size_t k = 0; k < m.size(); ++k) out << " " << r.ranges[i][k] << "=" << std::setprecision(6) << m[k];
        out << "\n";
    }
}

void print_evidence(std::ostream& out, const std::vector<Observation>& ev) {
    if (ev.empty()) out << "(no evidence)\n";
    for (const auto& o : ev) out << "  " << o.target.str() << " = " << o.value << "\n";
}

}  // namespace

int run_repl(Service& service, std::istream& in, std::ostream& out, Backend backend, bool prompt, const std::string& initial) {
    std::string session;
    auto need_session = [&] {
        if (session.empty()) throw Error(ErrorCode::UnknownSession, "no knowledge base loaded; use 'load <file>'");
    };
    std::string line;
    bool first = !initial.empty();
    while (true) {
        if (first) {
            line = "load " + initial;
            first = false;
        } else {
            if (prompt) out << "spook> " << std::flush;
            if (!std::getline(in, line)) break;
        }
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::string cmd = line.substr(0, line.find(' '));
        std::string rest = trim(line.size() > cmd.size() ? line.substr(cmd.size()) : "");
        try {
            if (cmd == "quit" || cmd == "exit") {
                break;
            } else if (cmd == "help") {
                out << kHelp;
            } else if (cmd == "load") {
                std::ifstream f(rest);
                if (!f) throw Error(ErrorCode::NotFound, "cannot read '" + rest + "'");
                std::stringstream ss;
                ss << f.rdbuf();
                auto id = service.load_kb({ss.str(), rest});
                session = service.create_session(id, backend);
                const auto& kb = service.kb(id)->kb();
                out << "loaded " << id << " (" << kb.classes.size() << " classes, " << kb.instances.size() << " instances), session "
                    << session << "\n";
            } else if (cmd == "observe") {
                need_session();
                print_evidence(out, service.observe(session, parse_observation(rest)));
            } else if (cmd == "retract") {
                need_session();
                auto q = parse_query_syntax(rest);
                if (q.targets.size() != 1 || !q.evidence.empty()) throw Error(ErrorCode::SyntaxError, "retract takes one instance.chain");
                print_evidence(out, service.retract(session, q.targets[0]));
            } else if (cmd == "query") {
                need_session();
                auto q = parse_query_syntax(rest);
                if (!q.evidence.empty()) throw Error(ErrorCode::SyntaxError, "use 'observe' to add evidence");
                auto h = service.query(session, q.targets);
                print_result(out, h.result);
                out << "(" << to_string(service.backend(session)) << ", " << std::setprecision(3) << h.seconds * 1000 << " ms)\n";
            } else if (cmd == "evidence") {
                need_session();
                print_evidence(out, service.evidence(session));
            } else if (cmd == "history") {
                need_session();
                auto hist = service.history(session);
                for (size_t i = 0; i < hist.size(); ++i) {
                    out << "#" << i + 1 << " " << hist[i].evidence.size() << " observation(s)\n";
                    print_result(out, hist[i].result);
                }
            } else if (cmd == "stats") {
                need_session();
                auto kb_id = service.session_kb(session);
                auto s = service.cache_stats(kb_id);
                out << "cache: " << s.hits << " hits, " << s.misses << " misses, " << s.entries << " entries\n";
                for (const auto& [cls, c] : service.cache_stats_by_class(kb_id))
                    out << "  " << cls << ": " << c.hits << " hits, " << c.misses << " misses\n";
            } else if (cmd == "backend") {
                backend = parse_backend(rest);
                if (!session.empty()) service.set_backend(session, backend);
                out << "backend " << to_string(backend) << "\n";
            } else {
                throw Error(ErrorCode::SyntaxError, "unknown command '" + cmd + "' (try 'help')");
            }
        } catch (const Error& e) {
            out << "error: " << to_string(e.code()) << ": " << e.diagnostic() << "\n";
        }
    }
    return 0;
}

}  // namespace spook
