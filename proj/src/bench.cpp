#include "spook/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include <json.hpp>

#include "spook/inference.hpp"
#include "spook/kbmc.hpp"
#include "spook/structured.hpp"

namespace spook {

namespace {

const char* const kGroupKinds[] = {"launcher", "radar",  "command", "supply", "maintenance", "transport",
                                   "security", "signals", "fuel",    "reload", "decoy"};

std::string kind_name(int k) {
    std::string base = kGroupKinds[k % 11];
    if (k >= 11) base += "-" + std::to_string(k / 11 + 1);
    return base;
}

std::string class_name(const std::string& kind) {
    std::string out = kind;
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out + "-Group";
}

double round_to(double v, int digits) {
    double s = std::pow(10.0, digits);
    return std::round(v * s) / s;
}

std::string row(const std::vector<double>& head) {
    double rest = 1.0;
    std::string out = "[";
    for (double p : head) {
        out += format_number(p) + ", ";
        rest -= p;
    }
    return out + format_number(round_to(rest, 6)) + "]";
}

std::string bin(double p_second) { return row({round_to(1.0 - p_second, 6)}); }

std::string table(const std::vector<std::string>& rows, const std::string& indent) {
    std::string out = "[";
    for (size_t i = 0; i < rows.size(); ++i) {
        out += rows[i];
        if (i + 1 < rows.size()) out += ",\n" + indent + " ";
    }
    return out + "]";
}

}  // namespace

SourceKB generate_battalion_kb(const BattalionSpec& spec) {
    if (spec.units < 1 || spec.batteries < 1 || spec.groups < 1) {
        throw Error(ErrorCode::InvalidKB, "battalion generator needs at least one unit, battery and group");
    }
    const int u = spec.units;
    const int b = spec.batteries;
    const int g = spec.groups;
    const std::string in = "      ";
    std::ostringstream o;

    o << "# generated battalion model: " << b << " batteries, " << g << " groups per battery, " << u << " units per group\n\n";
    o << "class Weather {\n  simple visibility {clear, poor} cpd [[0.7, 0.3]]\n}\n\n";
    o << "class Location {\n  simple defense-support {weak, strong} cpd [[0.5, 0.5]]\n}\n\n";
    o << "class Mountain-Location extends Location {\n  simple defense-support {weak, strong} cpd [[0.25, 0.75]]\n}\n\n";
    o << "class Desert-Location extends Location {\n  simple defense-support {weak, strong} cpd [[0.7, 0.3]]\n}\n\n";
    o << "class Environment {\n"
         "  complex weather : Weather\n"
         "  complex location : Location\n"
         "  reference location-kind over location {class Mountain-Location, class Desert-Location} cpd [[0.4, 0.6]]\n"
         "  simple hiding-support {poor, good} parents(location.defense-support, weather.visibility)\n"
         "    cpd [[0.75, 0.25], [0.55, 0.45], [0.45, 0.55], [0.2, 0.8]]\n"
         "}\n\n";
    o << "class Military-Unit {\n}\n\n";

    std::vector<std::string> activity;
    for (int m = 0; m <= b; ++m) {
        double fire = round_to(0.1 + 0.7 * m / b, 4);
        double withdraw = round_to(0.3 - 0.2 * m / b, 4);
        activity.push_back(row({round_to(1.0 - fire - withdraw, 4), withdraw}));
    }
    o << "class Battalion extends Military-Unit {\n"
         "  simple under-fire {none, light, heavy} cpd [[0.7, 0.2, 0.1]]\n"
         "  complex in-environment : Environment\n"
         "  complex has-battery : Battery multi("
      << b << ") inverse in-battalion\n"
              "  quantifier batteries-ready = count(has-battery.readiness == high)\n"
              "  simple next-activity {hold, withdraw, fire} parents(batteries-ready)\n"
              "    cpd "
      << table(activity, "       ") << "\n}\n\n";

    o << "class Battery extends Military-Unit {\n"
         "  complex in-battalion : Battalion inverse has-battery\n"
         "  simple hit {false, true} parents(in-battalion.under-fire) cpd [[0.96, 0.04], [0.85, 0.15], [0.45, 0.55]]\n";
    for (int k = 0; k < g; ++k) {
        std::string kind = kind_name(k);
        o << "  complex " << kind << "-group : " << class_name(kind) << " inverse in-battery\n";
    }
    o << "  simple ready-1 {low, high} parents(" << kind_name(0) << "-group.effective) cpd [[0.7, 0.3], [0.2, 0.8]]\n";
    for (int k = 1; k < g; ++k) {
        o << "  simple ready-" << k + 1 << " {low, high} parents(ready-" << k << ", " << kind_name(k)
          << "-group.effective)\n    cpd [[0.8, 0.2], [0.5, 0.5], [0.45, 0.55], [0.1, 0.9]]\n";
    }
    o << "  simple readiness {low, high} parents(ready-" << g
      << ", hit)\n    cpd [[0.85, 0.15], [0.95, 0.05], [0.2, 0.8], [0.6, 0.4]]\n}\n\n";

    std::vector<double> weights;
    double total = 0.0;
    for (int m = 0; m <= u; ++m) total += m + 1;
    for (int m = 0; m < u; ++m) weights.push_back(round_to((m + 1) / total, 4));
    std::vector<std::string> effective;
    for (int m = 0; m <= u; ++m) effective.push_back(bin(round_to(0.1 + 0.8 * m / u, 4)));
    o << "class Group extends Military-Unit {\n"
         "  complex in-battery : Battery\n"
         "  complex has-unit : Unit multi("
      << u << ") inverse in-group\n"
      << "  number num-units over has-unit cpd [" << row(weights) << "]\n"
      << "  simple exposure {low, high} cpd [[0.5, 0.5]]\n"
         "  quantifier num-operational = count(has-unit.damaged == false)\n"
         "  quantifier num-reported-damaged = count(has-unit.reported-damaged == true)\n"
         "  simple effective {no, yes} parents(num-operational)\n"
         "    cpd "
      << table(effective, in) << "\n}\n\n";

    for (int k = 0; k < g; ++k) {
        std::string kind = kind_name(k);
        int v = k % 11;
        o << "class " << class_name(kind) << " extends Group {\n"
          << "  complex in-battery : Battery inverse " << kind << "-group\n"
          << "  simple exposure {low, high} parents(in-battery.hit) cpd [" << bin(round_to(0.15 + 0.02 * v, 4)) << ", "
          << bin(round_to(0.6 + 0.03 * v, 4)) << "]\n}\n\n";
    }

    o << "class Unit extends Military-Unit {\n"
         "  complex in-group : Group inverse has-unit\n"
         "  simple damaged {false, true} parents(in-group.exposure) cpd [[0.92, 0.08], [0.55, 0.45]]\n"
         "  simple reported-damaged {false, true} parents(damaged, in-group.in-battery.in-battalion.in-environment.hiding-support)\n"
         "    cpd [[0.97, 0.03], [0.98, 0.02], [0.15, 0.85], [0.6, 0.4]]\n"
         "}\n\n";

    o << "instance battalion-charlie : Battalion\n";
    if (!spec.generic_batteries) {
        for (int i = 1; i <= b; ++i) o << "instance battery-" << i << " : Battery\n";
        o << "\nassert battalion-charlie.has-battery = {";
        for (int i = 1; i <= b; ++i) o << (i > 1 ? ", " : "") << "battery-" << i;
        o << "}\n";
    }
    std::string tag = "battalion-u" + std::to_string(u) + "-b" + std::to_string(b);
    if (g != 11) tag += "-g" + std::to_string(g);
    if (spec.generic_batteries) tag += "-generic";
    return {o.str(), "<" + tag + ">"};
}

SourceKB generate_battalion_kb(int units, int batteries) {
    BattalionSpec s;
    s.units = units;
    s.batteries = batteries;
    return generate_battalion_kb(s);
}

std::vector<Observation> battalion_evidence_steps() {
    return {parse_observation("battalion-charlie.under-fire = heavy"),
            parse_observation("battery-1.launcher-group.num-reported-damaged = 0"),
            parse_observation("battalion-charlie.in-environment.hiding-support = good")};
}

QueryExpr battalion_probe_query() {
    return parse_query_syntax(
        "battalion-charlie.next-activity, battery-1.hit | battalion-charlie.under-fire = heavy, "
        "battery-1.launcher-group.num-reported-damaged = 0");
}

void BenchConfig::check() const {
    if (units.empty()) throw Error(ErrorCode::InvalidKB, "bench config: units range is empty");
    if (repetitions < 1) throw Error(ErrorCode::InvalidKB, "bench config: repetitions must be at least 1");
    if (cells.empty()) throw Error(ErrorCode::InvalidKB, "bench config: no backend cells");
    for (const auto& c : cells) {
        if (c.backend != "kbmc" && c.backend != "structured") {
            throw Error(ErrorCode::InvalidKB, "bench config: unknown backend '" + c.backend + "'");
        }
        if (c.qmode != "naive" && c.qmode != "combinatoric") {
            throw Error(ErrorCode::InvalidKB, "bench config: unknown quantifier mode '" + c.qmode + "'");
        }
    }
    for (int u : units)
        if (u < 1) throw Error(ErrorCode::InvalidKB, "bench config: units must be positive");
}

BenchConfig parse_bench_config(const std::string& json_text) {
    BenchConfig c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
        if (j.contains("units")) {
            const auto& u = j["units"];
            if (u.is_object()) {
                c.units.clear();
                for (int v = u.at("from").get<int>(); v <= u.at("to").get<int>(); ++v) c.units.push_back(v);
            } else {
                c.units = u.get<std::vector<int>>();
            }
        }
        c.batteries = j.value("batteries", c.batteries);
        c.groups = j.value("groups", c.groups);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.budget_seconds = j.value("budget_seconds", c.budget_seconds);
        if (j.contains("cells")) {
            c.cells.clear();
            for (const auto& e : j["cells"]) {
                BenchCell cell;
                cell.backend = e.at("backend").get<std::string>();
                cell.reuse = e.value("reuse", cell.backend == "structured");
                cell.qmode = e.value("qmode", cell.backend == "kbmc" ? std::string("naive") : std::string("combinatoric"));
                c.cells.push_back(cell);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SyntaxError, std::string("bench config: ") + e.what());
    }
    c.check();
    return c;
}

BenchRow run_cell(const BenchCell& cell, int units, const BenchConfig& config) {
    BattalionSpec spec;
    spec.units = units;
    spec.batteries = config.batteries;
    spec.groups = config.groups;
    auto kb = KbIndex::build(parse_kb(generate_battalion_kb(spec)));
    QueryExpr probe = battalion_probe_query();

    BenchRow out;
    out.cell = cell;
    out.units = units;
    auto start = std::chrono::steady_clock::now();
    auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(config.budget_seconds));
    std::vector<double> times;
    StructuredOptions sopts;
    sopts.reuse = cell.reuse;
    sopts.naive_quantifiers = cell.qmode == "naive";
    sopts.inference.deadline = deadline;
    try {
        // r = -1 is an untimed warm-up on its own engine
        for (int r = -1; r < config.repetitions; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            QueryResult res;
            if (cell.backend == "kbmc") {
                KbmcOptions opts;
                opts.inference.deadline = deadline;
                res = answer_query_kbmc(*kb, probe, opts);
            } else {
                StructuredEngine engine(kb, sopts);
                res = engine.solve_top_level(probe);
                if (r == 0) {
                    out.cache_hits = res.stats.cache_hits;
                    out.cache_misses = res.stats.cache_misses;
                }
            }
            if (r >= 0) times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            out.probe = res.joint;
            if (std::chrono::steady_clock::now() > deadline) throw Error(ErrorCode::Timeout, "cell budget exhausted");
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Timeout) throw;
        return out;
    }
    std::sort(times.begin(), times.end());
    out.seconds = times[times.size() / 2];

    if (cell.backend == "kbmc") {
        out.max_clique = triangulation_stats(ground(*kb, &probe).net).max_clique;
    } else {
        StructuredOptions opts;
        opts.reuse = cell.reuse;
        opts.naive_quantifiers = cell.qmode == "naive";
        opts.clique_stats = true;
        StructuredEngine engine(kb, opts);
        engine.solve_top_level(probe);
        out.max_clique = engine.max_local_clique();
    }
    return out;
}

std::vector<BenchRow> run_matrix(const BenchConfig& config, bool parallel) {
    config.check();
    std::vector<BenchRow> rows;
    if (!parallel) {
        for (int u : config.units)
            for (const auto& cell : config.cells) rows.push_back(run_cell(cell, u, config));
        return rows;
    }
    std::vector<std::future<BenchRow>> jobs;
    for (int u : config.units)
        for (const auto& cell : config.cells) jobs.push_back(std::async(std::launch::async, run_cell, cell, u, config));
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream o;
    o << kBenchCsvHeader << "\n";
    for (const auto& r : rows) {
        o << r.cell.backend << "," << (r.cell.reuse ? "true" : "false") << "," << r.cell.qmode << "," << r.units << ",";
        if (r.seconds) {
            o << *r.seconds;
        } else {
            o << "timeout";
        }
        o << "," << r.max_clique << "," << r.cache_hits << "," << r.cache_misses << "\n";
    }
    return o.str();
}

}  // namespace spook
