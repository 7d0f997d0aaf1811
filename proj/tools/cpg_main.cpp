// cpg: command-line front end over the guideline graph library.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cpg/api.hpp"
#include "cpg/completion.hpp"
#include "cpg/enrichment.hpp"
#include "cpg/graph.hpp"
#include "cpg/qa.hpp"
#include "cpg/query.hpp"
#include "cpg/render.hpp"
#include "cpg/service.hpp"

namespace {

using namespace cpg;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct Globals {
    bool json = false;
    int hop_cap = kDefaultHopCap;
    std::size_t row_cap = kDefaultRowCap;
    std::size_t parallelism = 4;
};

// Domain failure already reported to the user.
struct Reported {
    int status;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

QaOptions qa_options(const Globals& g) {
    QaOptions o;
    o.hop_cap = g.hop_cap;
    o.row_cap = g.row_cap;
    o.parallelism = g.parallelism;
    return o;
}

std::shared_ptr<CompletionClient> make_client(const std::string& mock_path) {
    if (!mock_path.empty()) return std::make_shared<ScriptedClient>(load_transcript_file(mock_path));
    if (auto cfg = HttpClientConfig::from_env()) return std::make_shared<HttpCompletionClient>(*cfg);
    return nullptr;
}

std::shared_ptr<CompletionClient> require_client(const std::string& mock_path) {
    auto c = make_client(mock_path);
    if (!c) throw std::runtime_error("no completion client: pass --mock or set CPG_LLM_ENDPOINT");
    return c;
}

// Accepts a QA dataset (train questions supply the exemplars) or a bare list
// of {"question","query"} objects.
std::vector<QueryExemplar> load_query_exemplars(const std::string& path) {
    auto text = read_file(path);
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_array() && !j.empty() && j.front().is_object() && j.front().contains("query")) {
        std::vector<QueryExemplar> out;
        for (const auto& e : j) out.push_back({e.at("question").get<std::string>(), e.at("query").get<std::string>()});
        return out;
    }
    return train_exemplars(load_dataset(text));
}

void print_json(const api::Json& j) { std::cout << api::serialize(j); }

// ---- human-readable output ----

void print_stats(const GuidelineGraph& g) {
    auto s = stats(g);
    std::cout << "version: " << g.version() << "\n\n";
    std::cout << std::left << std::setw(20) << "Node category" << "Count\n";
    for (auto c : kAllCategories)
        std::cout << std::setw(20) << category_display_name(c) << s.category(c) << "\n";
    std::cout << std::setw(20) << "Unlabeled" << s.unlabeled_nodes << "\n";
    std::cout << std::setw(20) << "Total" << s.total_nodes << "\n\n";
    std::cout << std::setw(20) << "Relation" << "Count\n";
    for (auto r : kAllRelations) std::cout << std::setw(20) << relation_display_name(r) << s.relation(r) << "\n";
    std::cout << std::setw(20) << "Unlabeled" << s.unlabeled_edges << "\n";
    std::cout << std::setw(20) << "Total" << s.total_edges << "\n";
}

std::string describe_value(const GuidelineGraph& g, const ResultValue& v) {
    std::string out;
    if (const auto* p = std::get_if<PathMatch>(&v)) {
        for (std::size_t i = 0; i < p->nodes.size(); ++i) {
            if (i > 0) {
                const auto& rel = g.edges()[p->edges[i - 1]].relation;
                out += " -[" + std::string(rel ? relation_token(*rel) : "") + "]-> ";
            }
            out += g.nodes()[p->nodes[i]].id;
        }
    } else if (const auto* l = std::get_if<NodeListValue>(&v)) {
        out += "[";
        for (std::size_t i = 0; i < l->nodes.size(); ++i) out += (i ? ", " : "") + g.nodes()[l->nodes[i]].id;
        out += "]";
    } else if (const auto* n = std::get_if<NodeValue>(&v)) {
        out += g.nodes()[n->node].id + ": " + g.nodes()[n->node].content;
    } else {
        const auto& pv = std::get<PropertyValue>(v);
        out += pv.text ? *pv.text : "null";
    }
    return out;
}

void print_results(const GuidelineGraph& g, const ResultSet& rs) {
    for (std::size_t i = 0; i < rs.columns.size(); ++i) std::cout << (i ? " | " : "") << rs.columns[i];
    std::cout << "\n";
    for (const auto& row : rs.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? " | " : "") << describe_value(g, row[i]);
        std::cout << "\n";
    }
    std::cout << "(" << rs.rows.size() << (rs.rows.size() == 1 ? " row)\n" : " rows)\n");
}

void report_query_error(const Globals& g, const QueryError& e) {
    if (g.json) print_json(api::query_error_payload(e));
    std::cerr << "cpg: " << to_string(e.code()) << " at " << e.position() << ": " << e.message() << "\n";
    if (!e.expected().empty()) {
        std::cerr << "  expected one of:";
        for (const auto& x : e.expected()) std::cerr << " " << x;
        std::cerr << "\n";
    }
    throw Reported{kExitDomain};
}

// ---- subcommands ----

void cmd_ingest(const Globals& g, const std::string& file, const std::string& out) {
    auto graph = load_graph_file(file);
    write_output(out, export_graph(graph));
    if (!out.empty() && out != "-") {
        if (g.json)
            print_json(api::validate_payload(graph));
        else
            print_stats(graph);
    }
}

void cmd_validate(const Globals& g, const std::string& file) {
    auto graph = load_graph_file(file);
    if (g.json)
        print_json(api::validate_payload(graph));
    else
        print_stats(graph);
}

void cmd_classify(const Globals& g, const std::string& file, const std::string& mode_text,
                  const std::string& exemplars, const std::string& gold, const std::string& lexicon,
                  const std::string& mock) {
    auto graph = load_graph_file(file);
    ClassifyOptions opts;
    opts.mode = *parse_classification_mode(mode_text);
    opts.parallelism = g.parallelism;
    if (!exemplars.empty()) opts.exemplars = load_exemplars(read_file(exemplars));
    if (!lexicon.empty()) opts.lexicon = Lexicon::from_json(read_file(lexicon));
    std::shared_ptr<CompletionClient> client;
    if (opts.mode != ClassificationMode::Heuristic) client = require_client(mock);
    auto result = classify_nodes(graph, client.get(), opts);
    std::optional<AccuracyReport> acc;
    if (!gold.empty()) acc = score_classification(result, load_gold_labels(read_file(gold)));
    if (g.json) {
        print_json(api::classification_payload(result, acc));
        return;
    }
    for (const auto& [id, p] : result.predictions) {
        std::cout << std::left << std::setw(12) << id;
        if (const auto* c = std::get_if<NodeCategory>(&p))
            std::cout << category_display_name(*c) << "\n";
        else
            std::cout << "FAILED: " << std::get<ClassificationFailure>(p).detail << "\n";
    }
    if (acc) {
        std::cout << "\naccuracy: " << acc->accuracy << "% (" << acc->correct << "/" << acc->total << ")\n";
        std::cout << std::setw(20) << "predicted \\ gold";
        for (auto c : kAllCategories) std::cout << std::setw(20) << category_display_name(c);
        std::cout << "\n";
        for (std::size_t r = 0; r < 4; ++r) {
            std::cout << std::setw(20) << (r < 3 ? std::string(category_display_name(kAllCategories[r])) : "(failure)");
            for (std::size_t c = 0; c < 3; ++c) std::cout << std::setw(20) << acc->confusion[r][c];
            std::cout << "\n";
        }
    }
}

void cmd_label_relations(const Globals& g, const std::string& file, const std::string& out) {
    auto labeled = label_all_relations(load_graph_file(file));
    write_output(out, export_graph(labeled));
    if (!out.empty() && out != "-") {
        if (g.json)
            print_json(api::validate_payload(labeled));
        else
            print_stats(labeled);
    }
}

void cmd_query(const Globals& g, const std::string& file, const std::string& inline_query,
               const std::string& query_file) {
    auto graph = load_graph_file(file);
    std::string cql = query_file.empty() ? inline_query : read_file(query_file);
    try {
        if (g.json) {
            print_json(api::query_payload(graph, cql, qa_options(g)));
            return;
        }
        auto ast = parse_query(cql, ParseOptions{g.hop_cap});
        print_results(graph, evaluate(ast, graph, EvalOptions{g.row_cap}));
    } catch (const QueryError& e) {
        report_query_error(g, e);
    }
}

void cmd_ask(const Globals& g, const std::string& file, const std::string& question, const std::string& exemplars,
             const std::string& mock) {
    auto graph = load_graph_file(file);
    auto client = require_client(mock);
    auto ex = exemplars.empty() ? std::vector<QueryExemplar>{} : load_query_exemplars(exemplars);
    auto result = ask(question, graph, *client, ex, qa_options(g));
    if (g.json) {
        print_json(api::ask_payload(result));
        return;
    }
    std::cout << "query:\n" << result.query << "\n";
    if (result.error) {
        std::cout << "error: " << display_name(*result.error);
        if (!result.error_detail.empty()) std::cout << " (" << result.error_detail << ")";
        std::cout << "\n";
    }
    for (const auto& a : result.answers) std::cout << "\n" << a.text() << "\n";
}

void cmd_eval(const Globals& g, const std::string& file, const std::string& dataset, const std::string& mock) {
    auto graph = load_graph_file(file);
    auto client = require_client(mock);
    auto report = run_eval(load_dataset(read_file(dataset)), graph, *client, qa_options(g));
    if (g.json)
        print_json(api::eval_payload(report));
    else
        std::cout << format_eval_table(report);
}

void cmd_serve(const Globals& g, const std::string& file, std::string listen, const std::string& exemplars,
               const std::string& classify_exemplars, const std::string& mock) {
    ServiceConfig cfg;
    cfg.graph_path = file;
    if (listen.empty())
        if (const char* env = std::getenv("CPG_LISTEN_ADDR")) listen = env;
    if (!listen.empty()) cfg.set_listen_address(listen);
    cfg.hop_cap = g.hop_cap;
    cfg.row_cap = g.row_cap;
    cfg.parallelism = g.parallelism;
    cfg.client = make_client(mock);
    if (!exemplars.empty()) cfg.query_exemplars = load_query_exemplars(exemplars);
    if (!classify_exemplars.empty()) cfg.classify_exemplars = load_exemplars(read_file(classify_exemplars));
    GuidelineService service(cfg);
    std::cerr << "cpg: serving " << file << " on " << cfg.host << ":" << cfg.port << "\n";
    if (!service.listen()) throw std::runtime_error("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
}

int report_domain_error(const Globals& g, std::string_view code, const std::string& what) {
    if (g.json) print_json(api::error_payload(code, what));
    std::cerr << "cpg: " << what << "\n";
    return kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guideline knowledge-graph engine"};
    app.require_subcommand(1);
    Globals g;
    app.add_flag("--json", g.json, "Machine-readable JSON on stdout");
    app.add_option("--hop-cap", g.hop_cap, "Maximum variable-length hop bound")->check(CLI::PositiveNumber);
    app.add_option("--row-cap", g.row_cap, "Maximum result rows")->check(CLI::PositiveNumber);
    app.add_option("--parallelism", g.parallelism, "Concurrent completion requests")->check(CLI::PositiveNumber);

    std::string file, out, mode = "heuristic", exemplars, gold, lexicon, mock, inline_query, query_file, question,
                           dataset, listen, classify_exemplars;

    auto* ingest = app.add_subcommand("ingest", "Load a graph document and write its canonical form");
    ingest->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    ingest->add_option("-o,--output", out, "Output path (default stdout)");

    auto* validate = app.add_subcommand("validate", "Check a graph document and print its statistics");
    validate->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);

    auto* classify = app.add_subcommand("classify", "Categorize every node");
    classify->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    classify->add_option("--mode", mode, "heuristic|zero-shot|few-shot")
        ->check(CLI::IsMember({"heuristic", "zero-shot", "few-shot"}));
    classify->add_option("--exemplars", exemplars, "Few-shot exemplars")->check(CLI::ExistingFile);
    classify->add_option("--gold", gold, "Gold labels to score against")->check(CLI::ExistingFile);
    classify->add_option("--lexicon", lexicon, "Heuristic lexicon")->check(CLI::ExistingFile);
    classify->add_option("--mock", mock, "Scripted completion transcript (JSONL)")->check(CLI::ExistingFile);

    auto* label = app.add_subcommand("label-relations", "Label every relation from its endpoint categories");
    label->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    label->add_option("-o,--output", out, "Output path (default stdout)");

    auto* query = app.add_subcommand("query", "Run a CQL query");
    query->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    auto* q_inline = query->add_option("-q,--query", inline_query, "Query text");
    auto* q_file = query->add_option("-f,--query-file", query_file, "Query file")->check(CLI::ExistingFile);
    q_inline->excludes(q_file);

    auto* askc = app.add_subcommand("ask", "Answer a question through generated CQL");
    askc->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    askc->add_option("question", question, "Question text")->required();
    askc->add_option("--exemplars", exemplars, "QA dataset or question/query list")->check(CLI::ExistingFile);
    askc->add_option("--mock", mock, "Scripted completion transcript (JSONL)")->check(CLI::ExistingFile);

    auto* eval = app.add_subcommand("eval", "Run the error-taxonomy evaluation");
    eval->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    eval->add_option("--dataset", dataset, "QA dataset")->required()->check(CLI::ExistingFile);
    eval->add_option("--mock", mock, "Scripted completion transcript (JSONL)")->check(CLI::ExistingFile);

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("file", file, "Graph document")->required()->check(CLI::ExistingFile);
    serve->add_option("--listen", listen, "host:port (default CPG_LISTEN_ADDR or 127.0.0.1:8080)");
    serve->add_option("--exemplars", exemplars, "QA dataset or question/query list")->check(CLI::ExistingFile);
    serve->add_option("--classify-exemplars", classify_exemplars, "Few-shot exemplars")->check(CLI::ExistingFile);
    serve->add_option("--mock", mock, "Scripted completion transcript (JSONL)")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*query && q_inline->count() == 0 && q_file->count() == 0) {
        std::cerr << "query: one of -q or -f is required\n" << query->help();
        return kExitUsage;
    }

    try {
        if (*ingest) cmd_ingest(g, file, out);
        else if (*validate) cmd_validate(g, file);
        else if (*classify) cmd_classify(g, file, mode, exemplars, gold, lexicon, mock);
        else if (*label) cmd_label_relations(g, file, out);
        else if (*query) cmd_query(g, file, inline_query, query_file);
        else if (*askc) cmd_ask(g, file, question, exemplars, mock);
        else if (*eval) cmd_eval(g, file, dataset, mock);
        else if (*serve) cmd_serve(g, file, listen, exemplars, classify_exemplars, mock);
    } catch (const Reported& r) {
        return r.status;
    } catch (const GraphError& e) {
        return report_domain_error(g, to_string(e.code()), e.what());
    } catch (const EnrichmentError& e) {
        return report_domain_error(g, to_string(e.code()), e.what());
    } catch (const QueryError& e) {
        return report_domain_error(g, to_string(e.code()), e.what());
    } catch (const QaError& e) {
        return report_domain_error(g, e.code() == QaError::Code::ClientFailure ? "ClientFailure" : "QaError", e.what());
    } catch (const std::exception& e) {
        return report_domain_error(g, "Error", e.what());
    }
    return kExitOk;
}
