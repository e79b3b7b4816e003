#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spook/aggregate.hpp"
#include "spook/bench.hpp"
#include "spook/kbmc.hpp"
#include "spook/service.hpp"
#include "spook/validate.hpp"

namespace py = pybind11;
using namespace spook;

namespace {

py::object to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return std::move(out);
        }
        default: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
            return std::move(out);
        }
    }
}

std::vector<ChainRef> targets_of(const std::vector<std::string>& texts) {
    std::vector<ChainRef> out;
    for (const auto& t : texts) out.push_back(parse_observation(t + " = _").target);
    return out;
}

// A loaded KB with one structured engine per option set.
struct PyKb {
    KbHandle index;
    std::map<std::pair<bool, bool>, std::shared_ptr<StructuredEngine>> engines;

    StructuredEngine& engine(bool reuse, bool naive) {
        auto& e = engines[{reuse, naive}];
        if (!e) {
            StructuredOptions opts;
            opts.reuse = reuse;
            opts.naive_quantifiers = naive;
            e = std::make_shared<StructuredEngine>(index, opts);
        }
        return *e;
    }

    py::object query(const std::string& text, const std::string& backend, bool reuse, bool naive) {
        auto q = parse_query(text, *index);
        QueryResult r = parse_backend(backend) == Backend::Kbmc ? answer_query_kbmc(*index, q) : engine(reuse, naive).solve_top_level(q);
        return to_py(to_json(r));
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Probabilistic object-oriented knowledge bases";

    static py::exception<Error> spook_error(m, "SpookError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = spook_error;
            py::object inst = err(e.diagnostic());
            inst.attr("code") = std::string(to_string(e.code()));
            inst.attr("message") = e.message();
            if (e.location()) {
                inst.attr("location") = py::make_tuple(e.location()->file, e.location()->line, e.location()->column);
            } else {
                inst.attr("location") = py::none();
            }
            PyErr_SetObject(err.ptr(), inst.ptr());
        }
    });

    m.def(
        "check",
        [](const std::string& text, const std::string& name) {
            std::vector<std::string> out;
            for (const auto& d : validate_kb(parse_kb(text, name)).diagnostics) out.push_back(d.str());
            return out;
        },
        py::arg("text"), py::arg("name") = "<python>", "Diagnostics of a KB document; empty when valid.");
    m.def(
        "format", [](const std::string& text) { return serialize_kb(parse_kb(text)); }, py::arg("text"),
        "Canonical text of a KB document.");

    py::class_<PyKb>(m, "KnowledgeBase")
        .def(py::init([](const std::string& text, const std::string& name) {
                 return PyKb{KbIndex::build(parse_kb(text, name)), {}};
             }),
             py::arg("text"), py::arg("name") = "<python>")
        .def_property_readonly("classes",
                               [](const PyKb& k) {
                                   std::vector<std::string> out;
                                   for (const auto& [n, c] : k.index->kb().classes) out.push_back(n);
                                   return out;
                               })
        .def_property_readonly("instances", [](const PyKb& k) { return k.index->instance_names(); })
        .def("range", [](const PyKb& k, const std::string& obj, const std::string& chain) {
            return k.index->chain_range(obj, AttributeChain::parse(chain));
        })
        .def("query", &PyKb::query, py::arg("query"), py::arg("backend") = "structured", py::arg("reuse") = true,
             py::arg("naive_quantifiers") = false, "Posterior joint and marginals as a dict.")
        .def("cache_stats",
             [](PyKb& k, bool reuse, bool naive) {
                 auto s = k.engine(reuse, naive).cache_stats();
                 return py::dict(py::arg("hits") = s.hits, py::arg("misses") = s.misses, py::arg("entries") = s.entries);
             },
             py::arg("reuse") = true, py::arg("naive_quantifiers") = false)
        .def("graph", [](const PyKb& k) { return to_py(model_graph(k.index->kb())); })
        .def("serialize", [](const PyKb& k) { return serialize_kb(k.index->kb()); });

    py::class_<Service>(m, "Service")
        .def(py::init<>())
        .def("load_kb", [](Service& s, const std::string& text, const std::string& name) { return s.load_kb({text, name}); },
             py::arg("text"), py::arg("name") = "<python>")
        .def("create_session",
             [](Service& s, const std::string& kb, const std::string& backend) { return s.create_session(kb, parse_backend(backend)); },
             py::arg("kb_id"), py::arg("backend") = "structured")
        .def("observe",
             [](Service& s, const std::string& session, const std::string& observation) {
                 return to_py(to_json(s.observe(session, parse_observation(observation))));
             })
        .def("retract",
             [](Service& s, const std::string& session, const std::string& target) {
                 return to_py(to_json(s.retract(session, targets_of({target})[0])));
             })
        .def("evidence", [](const Service& s, const std::string& session) { return to_py(to_json(s.evidence(session))); })
        .def("query",
             [](Service& s, const std::string& session, const std::vector<std::string>& targets) {
                 return to_py(to_json(s.query(session, targets_of(targets))));
             })
        .def("history",
             [](const Service& s, const std::string& session) {
                 nlohmann::json arr = nlohmann::json::array();
                 for (const auto& h : s.history(session)) arr.push_back(to_json(h));
                 return to_py(arr);
             })
        .def("set_backend", [](Service& s, const std::string& session, const std::string& b) { s.set_backend(session, parse_backend(b)); });

    m.def(
        "generate_battalion",
        [](int units, int batteries, int groups, bool generic) { return generate_battalion_kb({units, batteries, groups, generic}).text; },
        py::arg("units") = 4, py::arg("batteries") = 4, py::arg("groups") = 11, py::arg("generic_batteries") = false);
    m.def("binomial", &binomial_cpt, py::arg("p"), py::arg("n"));
    m.def(
        "quantifier_joint",
        [](const std::vector<double>& contribution, int l, int n) { return quantifier_joint_cpt(contribution, l, n); },
        py::arg("contribution"), py::arg("l"), py::arg("n"));
}
