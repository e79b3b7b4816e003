#include <httplib.h>

#include "spook/service.hpp"

namespace spook {

namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownKB:
        case ErrorCode::UnknownSession:
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::ContradictoryEvidence:
            return 409;
        case ErrorCode::Timeout:
            return 504;
        default:
            return 400;
    }
}

void send(httplib::Response& res, const nlohmann::json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

nlohmann::json body_json(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SyntaxError, std::string("request body is not JSON: ") + e.what());
    }
}

std::string field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || !j[name].is_string()) {
        throw Error(ErrorCode::SyntaxError, std::string("request needs a string field '") + name + "'");
    }
    return j[name].get<std::string>();
}

ChainRef chain_ref(const nlohmann::json& j) {
    if (j.contains("target")) {
        auto text = field(j, "target");
        auto dot = text.find('.');
        if (dot == std::string::npos) throw Error(ErrorCode::SyntaxError, "target '" + text + "' needs the form instance.chain");
        return {text.substr(0, dot), AttributeChain::parse(text.substr(dot + 1))};
    }
    return {field(j, "instance"), AttributeChain::parse(field(j, "chain"))};
}

template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send(res, to_json(e), status_for(e.code()));
        } catch (const std::exception& e) {
            send(res, {{"code", "Internal"}, {"message", e.what()}}, 500);
        }
    };
}

}  // namespace

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) { routes(); }

    void routes() {
        server.Post("/kb", guarded([this](const httplib::Request& req, httplib::Response& res) {
            SourceKB src{req.body, "<http>"};
            if (req.get_header_value("Content-Type").find("application/json") != std::string::npos) {
                auto j = body_json(req);
                src.text = field(j, "source");
                if (j.contains("name")) src.provenance = field(j, "name");
            }
            auto id = service.load_kb(src);
            const auto& kb = service.kb(id)->kb();
            send(res, {{"kb_id", id}, {"classes", kb.classes.size()}, {"instances", kb.instances.size()}}, 201);
        }));
        server.Get(R"(/kb/([^/]+)/graph)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send(res, service.model_graph(req.matches[1]));
        }));
        server.Post("/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto j = body_json(req);
            Backend b = j.contains("backend") ? parse_backend(field(j, "backend")) : Backend::Structured;
            auto id = service.create_session(field(j, "kb_id"), b);
            send(res, {{"session_id", id}, {"kb_id", field(j, "kb_id")}, {"backend", to_string(b)}}, 201);
        }));
        server.Post(R"(/session/([^/]+)/observe)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto j = body_json(req);
            Observation o;
            if (j.contains("observation")) {
                o = parse_observation(field(j, "observation"));
            } else {
                o.target = chain_ref(j);
                o.value = field(j, "value");
            }
            send(res, {{"evidence", to_json(service.observe(req.matches[1], o))}});
        }));
        server.Delete(R"(/session/([^/]+)/observe)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json j = body_json(req);
            if (req.has_param("target")) j["target"] = req.get_param_value("target");
            send(res, {{"evidence", to_json(service.retract(req.matches[1], chain_ref(j)))}});
        }));
        server.Post(R"(/session/([^/]+)/query)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto j = body_json(req);
            std::vector<ChainRef> targets;
            if (!j.contains("targets") || !j["targets"].is_array()) {
                throw Error(ErrorCode::SyntaxError, "request needs a 'targets' array");
            }
            for (const auto& t : j["targets"]) {
                if (!t.is_string()) throw Error(ErrorCode::SyntaxError, "targets must be strings of the form instance.chain");
                targets.push_back(chain_ref({{"target", t}}));
            }
            auto h = service.query(req.matches[1], targets);
            send(res, to_json(h));
        }));
        server.Get(R"(/session/([^/]+)/history)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto arr = nlohmann::json::array();
            for (const auto& h : service.history(req.matches[1])) arr.push_back(to_json(h));
            send(res, {{"history", arr}});
        }));
        server.Get(R"(/session/([^/]+)/evidence)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send(res, {{"evidence", to_json(service.evidence(req.matches[1]))}});
        }));
    }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace spook
