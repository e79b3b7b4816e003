#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "spook/bench.hpp"
#include "spook/kbmc.hpp"
#include "spook/service.hpp"
#include "spook/validate.hpp"

using namespace spook;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::NotFound, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

KbHandle load(const std::string& path) { return KbIndex::build(parse_kb({read_file(path), path})); }

int cmd_check(const std::vector<std::string>& files) {
    int status = 0;
    for (const auto& path : files) {
        try {
            auto kb = parse_kb({read_file(path), path});
            auto report = validate_kb(kb);
            if (report.ok()) {
                std::cout << path << ": ok (" << kb.classes.size() << " classes, " << kb.instances.size() << " instances)\n";
            } else {
                for (const auto& d : report.diagnostics) std::cerr << path << ": " << to_string(d.code) << ": " << d.str() << "\n";
                status = 1;
            }
        } catch (const Error& e) {
            std::cerr << to_string(e.code()) << ": " << e.diagnostic() << "\n";
            status = 1;
        }
    }
    return status;
}

int cmd_fmt(const std::string& path, bool in_place, bool check) {
    auto text = read_file(path);
    auto out = serialize_kb(parse_kb({text, path}));
    if (check) {
        if (out == text) return 0;
        std::cerr << path << ": not in canonical form\n";
        return 1;
    }
    if (in_place) {
        std::ofstream(path) << out;
    } else {
        std::cout << out;
    }
    return 0;
}

struct QueryFlags {
    std::string backend = "structured";
    bool no_reuse = false;
    bool naive = false;
    bool stats = false;
    bool dump_bn = false;
    bool json = false;
};

int cmd_query(const std::string& path, const std::string& text, const QueryFlags& f) {
    auto kb = load(path);
    auto q = parse_query(text, *kb);
    QueryResult r;
    if (f.dump_bn) ground(*kb, &q).net.dump(std::cerr);
    if (parse_backend(f.backend) == Backend::Kbmc) {
        r = answer_query_kbmc(*kb, q);
    } else {
        StructuredOptions opts;
        opts.reuse = !f.no_reuse;
        opts.naive_quantifiers = f.naive;
        opts.clique_stats = f.stats;
        StructuredEngine engine(kb, opts);
        r = engine.solve_top_level(q);
    }
    if (f.json) {
        std::cout << to_json(r).dump(2) << "\n";
        return 0;
    }
    for (size_t i = 0; i < r.targets.size(); ++i) {
        auto m = r.marginal(i);
        std::cout << r.targets[i].str() << "\n";
        for (size_t k = 0; k < m.size(); ++k) std::cout << "  " << std::left << std::setw(12) << r.ranges[i][k] << std::setprecision(10) << m[k] << "\n";
    }
    if (f.stats) {
        const auto& s = r.stats;
        std::cout << "backend " << f.backend << ": " << s.seconds << " s, " << s.ops << " ops, " << s.aggregate_ops
                  << " aggregate ops, max clique " << s.max_clique << ", " << s.local_networks << " network(s), largest "
                  << s.network_nodes << " nodes, cache " << s.cache_hits << " hits / " << s.cache_misses << " misses\n";
    }
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_path, bool parallel) {
    BenchConfig config = config_path.empty() ? BenchConfig{} : parse_bench_config(read_file(config_path));
    auto rows = run_matrix(config, parallel);
    auto csv = bench_csv(rows);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream(out_path) << csv;
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
    }
    return 0;
}

HttpServer* g_server = nullptr;

int cmd_serve(const std::string& host, int port, const std::vector<std::string>& preload) {
    Service service;
    for (const auto& path : preload) std::cerr << "loaded " << path << " as " << service.load_kb({read_file(path), path}) << "\n";
    HttpServer server(service);
    int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    server.listen();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spook: probabilistic object-oriented knowledge bases"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "parse and validate knowledge bases");
    std::vector<std::string> check_files;
    check->add_option("files", check_files, "KB files")->required()->check(CLI::ExistingFile);

    auto* fmt = app.add_subcommand("fmt", "print a KB in canonical form");
    std::string fmt_file;
    bool fmt_in_place = false, fmt_check = false;
    fmt->add_option("file", fmt_file)->required()->check(CLI::ExistingFile);
    fmt->add_flag("-i,--in-place", fmt_in_place, "rewrite the file");
    fmt->add_flag("--check", fmt_check, "exit 1 if the file is not canonical");

    auto* query = app.add_subcommand("query", "answer a query");
    std::string query_file, query_text;
    QueryFlags flags;
    query->add_option("file", query_file)->required()->check(CLI::ExistingFile);
    query->add_option("query", query_text, "e.g. 'battery-1.hit | battalion-charlie.under-fire = heavy'")->required();
    query->add_option("--backend", flags.backend)->check(CLI::IsMember({"structured", "kbmc"}));
    query->add_flag("--no-reuse", flags.no_reuse, "disable the subquery cache");
    query->add_flag("--naive-quantifiers", flags.naive, "expand multi-valued attributes into filler copies");
    query->add_flag("--stats", flags.stats, "print timing, operation and clique counters");
    query->add_flag("--dump-bn", flags.dump_bn, "print the grounded network to stderr");
    query->add_flag("--json", flags.json, "print the result as JSON");

    auto* bench = app.add_subcommand("bench", "run the benchmark matrix");
    std::string bench_config, bench_out;
    bool bench_parallel = false;
    bench->add_option("--config", bench_config, "JSON config")->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "CSV output path ('-' for stdout)");
    bench->add_flag("--parallel", bench_parallel, "run cells concurrently");

    auto* repl = app.add_subcommand("repl", "interactive session");
    std::string repl_file, repl_backend = "structured";
    repl->add_option("file", repl_file, "KB to load first")->check(CLI::ExistingFile);
    repl->add_option("--backend", repl_backend)->check(CLI::IsMember({"structured", "kbmc"}));

    auto* serve = app.add_subcommand("serve", "HTTP/JSON service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::vector<std::string> preload;
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--load", preload, "KB files to load at startup")->check(CLI::ExistingFile);

    auto* gen = app.add_subcommand("generate", "write a generated battalion KB");
    BattalionSpec spec;
    std::string gen_out;
    gen->add_option("--units", spec.units, "units per group")->check(CLI::PositiveNumber);
    gen->add_option("--batteries", spec.batteries)->check(CLI::PositiveNumber);
    gen->add_option("--groups", spec.groups, "group kinds per battery")->check(CLI::PositiveNumber);
    gen->add_flag("--generic-batteries", spec.generic_batteries, "leave the batteries unnamed");
    gen->add_option("-o,--out", gen_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) return cmd_check(check_files);
        if (*fmt) return cmd_fmt(fmt_file, fmt_in_place, fmt_check);
        if (*query) return cmd_query(query_file, query_text, flags);
        if (*bench) return cmd_bench(bench_config, bench_out, bench_parallel);
        if (*repl) {
            Service service;
            return run_repl(service, std::cin, std::cout, parse_backend(repl_backend), true, repl_file);
        }
        if (*serve) return cmd_serve(host, port, preload);
        if (*gen) {
            auto src = generate_battalion_kb(spec);
            if (gen_out.empty()) {
                std::cout << src.text;
            } else {
                std::ofstream(gen_out) << src.text;
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << to_string(e.code()) << ": " << e.diagnostic() << "\n";
        return 1;
    }
    return 0;
}
