// Command-line front end: ask, repl, load, validate-rules, serve.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>
#include <httplib.h>

#include "bioquery/bioquery.hpp"
#include "bioquery/http_api.hpp"

namespace fs = std::filesystem;
using namespace bioquery;

namespace {

struct Options {
    std::string lexicon = std::string(BIOQUERY_DATA_DIR) + "/lexicon.tsv";
    std::string rules = std::string(BIOQUERY_DATA_DIR) + "/rules.lp";
    std::string templates = std::string(BIOQUERY_DATA_DIR) + "/templates.tsv";
    std::string manifest = std::string(BIOQUERY_DATA_DIR) + "/manifest.tsv";
};

KnowledgeBase load(const Options& o, bool report_rows) {
    ManifestReport report;
    auto kb = load_knowledge_base({o.lexicon, o.rules, o.templates, o.manifest}, &report);
    for (const auto& [path, r] : report.files) {
        if (report_rows || !r.errors.empty())
            std::cerr << path.string() << ": " << r.rows_added << " added, " << r.duplicates << " duplicates, "
                      << r.errors.size() << " rejected\n";
        for (const auto& e : r.errors) std::cerr << "  line " << e.line << ": " << e.reason << "\n";
    }
    return kb;
}

void print_query_error(const Error& e, const std::string& query) {
    std::cerr << "error: " << e.what() << "\n";
    std::size_t position = std::string::npos;
    if (auto* g = dynamic_cast<const GrammarError*>(&e)) position = g->position();
    else if (auto* t = dynamic_cast<const TypeMismatch*>(&e)) position = t->position();
    else if (auto* u = dynamic_cast<const UnknownWord*>(&e)) position = u->begin();
    if (position != std::string::npos) {
        std::cerr << "  " << query << "\n  " << std::string(std::min(position, query.size()), ' ') << "^\n";
    }
}

struct AskFlags {
    bool explain = false;
    bool program = false;
};

int answer(Service& service, const std::string& query, const AskFlags& flags) {
    try {
        const auto result = service.handle_query(query);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        if (flags.program) std::cout << result.program;
        if (result.answers.empty()) std::cerr << "no answers\n";
        for (const auto& a : result.answers) {
            std::cout << text::join(a, "\t") << "\n";
            if (flags.explain) std::cout << service.handle_explain(result.query_id, a).text << "\n";
        }
        return 0;
    } catch (const Error& e) {
        print_query_error(e, query);
        return 1;
    }
}

void repl(Service& service, AskFlags flags) {
    const bool interactive = isatty(STDIN_FILENO);
    std::string line;
    for (;;) {
        if (interactive) std::cout << "?- " << std::flush;
        if (!std::getline(std::cin, line)) break;
        const auto trimmed = std::string(text::trim(line));
        if (trimmed.empty()) continue;
        if (trimmed == ":quit" || trimmed == ":q") break;
        if (trimmed.rfind(":explain", 0) == 0) {
            flags.explain = trimmed.find("off") == std::string::npos;
            continue;
        }
        if (trimmed.rfind(":program", 0) == 0) {
            flags.program = trimmed.find("off") == std::string::npos;
            continue;
        }
        if (trimmed.rfind(":complete ", 0) == 0) {
            for (const auto& s : service.handle_complete(trimmed.substr(10))) std::cout << s << "\n";
            continue;
        }
        answer(service, trimmed, flags);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Answer biomedical questions in controlled English over integrated fact sources"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opts;
    app.add_option("--lexicon", opts.lexicon, "Lexicon file")->envname("BQ_LEXICON");
    app.add_option("--rules", opts.rules, "Rule layer file")->envname("BQ_RULES");
    app.add_option("--templates", opts.templates, "Explanation template file")->envname("BQ_TEMPLATES");
    app.add_option("--manifest", opts.manifest, "Fact manifest (path TAB source label per line)")
        ->envname("BQ_MANIFEST");

    AskFlags ask_flags;
    std::string query;
    auto* ask = app.add_subcommand("ask", "Answer one query");
    ask->add_option("query", query, "The question, e.g. \"Which drugs treat the disease Asthma?\"")->required();
    ask->add_flag("--explain", ask_flags.explain, "Explain every answer");
    ask->add_flag("--program", ask_flags.program, "Print the compiled rule");

    auto* repl_cmd = app.add_subcommand("repl", "Read queries from standard input, one per line");
    repl_cmd->add_flag("--explain", ask_flags.explain, "Explain every answer");
    repl_cmd->add_flag("--program", ask_flags.program, "Print the compiled rule");

    auto* load_cmd = app.add_subcommand("load", "Load the fact manifest and print statistics");

    std::string rules_path;
    auto* validate = app.add_subcommand("validate-rules", "Check a rule layer file");
    validate->add_option("path", rules_path, "Rule file")->required();

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string static_dir;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("--port", port, "Port")->envname("BQ_PORT");
    serve->add_option("--host", host, "Address to bind");
    serve->add_option("--static", static_dir, "Directory of UI assets to serve at /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            const auto layer = parse_rules(read_file(rules_path));
            const auto graph = dependency_graph(layer);
            std::cout << layer.size() << " rules, " << graph.nodes.size() << " predicates, " << graph.edge_count()
                      << " dependencies\n";
            return 0;
        }

        Service service(load(opts, load_cmd->parsed()));

        if (load_cmd->parsed()) {
            std::cout << service.stats_json().dump(2) << "\n";
            return 0;
        }
        if (ask->parsed()) return answer(service, query, ask_flags);
        if (repl_cmd->parsed()) {
            repl(service, ask_flags);
            return 0;
        }
        if (serve->parsed()) {
            httplib::Server server;
            http::mount(server, service);
            if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
                std::cerr << "error: cannot serve " << static_dir << "\n";
                return 2;
            }
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            if (!server.listen(host, port)) {
                std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
                return 2;
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
