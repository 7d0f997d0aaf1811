#include "cpg/qa.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cpg/completion.hpp"
#include "cpg/percent.hpp"

namespace cpg {

std::string_view to_string(ErrorType e) {
    switch (e) {
        case ErrorType::TypeI: return "TypeI";
        case ErrorType::TypeII: return "TypeII";
        case ErrorType::TypeIII: return "TypeIII";
        case ErrorType::NoError: return "NoError";
    }
    return "?";
}

std::string_view display_name(ErrorType e) {
    switch (e) {
        case ErrorType::TypeI: return "Type-I";
        case ErrorType::TypeII: return "Type-II";
        case ErrorType::TypeIII: return "Type-III";
        case ErrorType::NoError: return "No Error";
    }
    return "?";
}

std::vector<QaQuestion> load_dataset(std::string_view json_text) {
    using nlohmann::json;
    auto bad = [](const std::string& what) { return QaError(QaError::Code::MalformedDataset, what); };
    auto j = json::parse(json_text.begin(), json_text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw bad("dataset must be a JSON array");
    std::vector<QaQuestion> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& q = j[i];
        std::string where = "dataset[" + std::to_string(i) + "]";
        try {
            QaQuestion item;
            item.id = q.at("id").get<std::string>();
            item.text = q.at("text").get<std::string>();
            auto set = q.at("set").get<std::string>();
            if (set == "A")
                item.set = QuestionSet::A;
            else if (set == "B")
                item.set = QuestionSet::B;
            else
                throw bad(where + ": set must be A or B");
            auto split = q.at("split").get<std::string>();
            if (split == "train")
                item.split = Split::Train;
            else if (split == "test")
                item.split = Split::Test;
            else
                throw bad(where + ": split must be train or test");
            if (auto g = q.find("goldQuery"); g != q.end() && !g->is_null()) item.gold_query = g->get<std::string>();
            if (auto l = q.find("expectedLiterals"); l != q.end() && !l->is_null())
                item.expected_literals = l->get<std::vector<std::string>>();
            if (item.split == Split::Train && !item.gold_query) throw bad(where + ": train questions need goldQuery");
            out.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw bad(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<QueryExemplar> train_exemplars(const std::vector<QaQuestion>& dataset) {
    std::vector<QueryExemplar> out;
    for (const auto& q : dataset)
        if (q.split == Split::Train) out.push_back({q.text, *q.gold_query});
    return out;
}

std::string schema_summary() {
    return "Node labels: Disease_Condition, Treatment_Option, Evaluation\n"
           "Node properties: content (guideline text of the node), context (label at the top of the guideline "
           "page; may be absent)\n"
           "Relationship types: requires, indicates, isFollowedBy\n"
           "(:Disease_Condition)-[:requires]->(:Treatment_Option)\n"
           "(:Evaluation)-[:indicates]->(:Disease_Condition)\n"
           "every other connected pair of nodes: -[:isFollowedBy]->\n";
}

std::string build_query_prompt(std::string_view schema, const std::vector<QueryExemplar>& exemplars,
                               std::string_view question) {
    if (exemplars.empty()) throw QaError(QaError::Code::EmptyExemplarList, "query prompt needs at least one exemplar");
    std::string out =
        "Translate the question into a Cypher query over the guideline knowledge graph described below. "
        "Answer with the query only.\n\nSchema:\n";
    out += schema;
    if (!out.ends_with('\n')) out += '\n';
    out += "\nExamples:\n";
    for (const auto& ex : exemplars) {
        out += "Question: ";
        out += ex.question;
        out += "\nCypher:\n";
        out += ex.query;
        if (!out.ends_with('\n')) out += '\n';
        out += '\n';
    }
    out += "Question: ";
    out += question;
    out += "\nCypher:\n";
    return out;
}

std::string strip_code_fences(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    auto s = trim(text);
    if (s.starts_with("```")) {
        auto eol = s.find('\n');
        s = eol == std::string_view::npos ? std::string_view{} : s.substr(eol + 1);
        if (auto close = s.rfind("```"); close != std::string_view::npos) s = s.substr(0, close);
        s = trim(s);
    }
    return std::string(s);
}

std::string generate_query(std::string_view prompt, CompletionClient& client, const QaOptions& options) {
    CompletionRequest req;
    req.prompt = std::string(prompt);
    req.model = options.model;
    req.max_tokens = options.max_tokens;
    req.temperature = 0.0;
    auto outcome = client.complete(req);
    if (!outcome.ok())
        throw QaError(QaError::Code::ClientFailure,
                      "completion failed (" + std::string(to_string(outcome.error().kind)) + "): " + outcome.error().message);
    return strip_code_fences(outcome.text());
}

namespace {

// Empty, or unknown because the row cap was hit.
bool yields_rows(const QueryAst& ast, const GuidelineGraph& graph, const QaOptions& options) {
    try {
        return !evaluate(ast, graph, EvalOptions{options.row_cap}).empty();
    } catch (const QueryError& e) {
        if (e.code() == QueryErrc::ResultLimitExceeded) return true;
        throw;
    }
}

}  // namespace

ErrorClassification classify_error(std::string_view query, const GuidelineGraph& graph, const QaOptions& options) {
    ErrorClassification out;
    QueryAst ast;
    try {
        ast = parse_query(query, ParseOptions{options.hop_cap});
    } catch (const QueryError& e) {
        out.type = ErrorType::TypeI;
        out.detail = e.what();
        return out;
    }

    for (const auto& clause : ast.clauses) {
        const auto* w = std::get_if<WhereClause>(&clause);
        if (!w) continue;
        for (const auto& f : w->filters) {
            bool found = std::any_of(graph.nodes().begin(), graph.nodes().end(),
                                     [&](const GuidelineNode& n) { return filter_matches(f, n); });
            if (!found) out.unmatched_needles.push_back(f.needle);
        }
    }
    if (!out.unmatched_needles.empty()) {
        out.type = ErrorType::TypeII;
        out.detail = "no node matches";
        for (const auto& n : out.unmatched_needles) out.detail += " \"" + n + "\"";
        return out;
    }

    if (!yields_rows(ast, graph, options) && yields_rows(with_upper_bounds(ast, options.hop_cap), graph, options)) {
        out.type = ErrorType::TypeIII;
        out.detail = "empty until hop bounds are raised to " + std::to_string(options.hop_cap);
        return out;
    }
    out.type = ErrorType::NoError;
    return out;
}

AskResult ask(std::string_view question, const GuidelineGraph& graph, CompletionClient& client,
              const std::vector<QueryExemplar>& exemplars, const QaOptions& options) {
    AskResult result;
    auto prompt = build_query_prompt(schema_summary(), exemplars, question);
    result.query = generate_query(prompt, client, options);
    auto cls = classify_error(result.query, graph, options);
    if (cls.type != ErrorType::NoError) {
        result.error = cls.type;
        result.error_detail = cls.detail;
        return result;
    }
    auto rows = evaluate(parse_query(result.query, ParseOptions{options.hop_cap}), graph, EvalOptions{options.row_cap});
    try {
        result.answers = render_subgraph(graph, rows);
    } catch (const RenderError& e) {
        if (e.code() != RenderErrc::NoPathInResults) throw;
        result.error_detail = e.what();
    }
    return result;
}

std::string EvalReport::set_percent(QuestionSet s, ErrorType e) const {
    const auto& c = s == QuestionSet::A ? set_a : set_b;
    return truncate2_percent(c.count[static_cast<std::size_t>(e)], c.total);
}

std::string EvalReport::overall_percent(ErrorType e) const {
    auto i = static_cast<std::size_t>(e);
    return truncate2_percent(set_a.count[i] + set_b.count[i], set_a.total + set_b.total);
}

EvalReport aggregate(std::vector<QuestionOutcome> outcomes) {
    EvalReport r;
    for (const auto& o : outcomes) {
        auto& c = o.set == QuestionSet::A ? r.set_a : r.set_b;
        ++c.count[static_cast<std::size_t>(o.type)];
        ++c.total;
    }
    r.outcomes = std::move(outcomes);
    return r;
}

EvalReport run_eval(const std::vector<QaQuestion>& dataset, const GuidelineGraph& graph, CompletionClient& client,
                    const QaOptions& options) {
    auto exemplars = train_exemplars(dataset);
    std::vector<const QaQuestion*> tests;
    for (const auto& q : dataset)
        if (q.split == Split::Test) tests.push_back(&q);
    if (tests.empty()) throw QaError(QaError::Code::MalformedDataset, "dataset has no test questions");
    auto schema = schema_summary();

    std::vector<QuestionOutcome> outcomes(tests.size());
    auto run_one = [&](std::size_t i) {
        const auto& q = *tests[i];
        QuestionOutcome o{q.id, q.set, {}, ErrorType::TypeI, {}};
        try {
            o.query = generate_query(build_query_prompt(schema, exemplars, q.text), client, options);
            auto cls = classify_error(o.query, graph, options);
            o.type = cls.type;
            o.note = cls.detail;
        } catch (const QaError& e) {
            if (e.code() != QaError::Code::ClientFailure) throw;
            o.type = ErrorType::TypeI;
            o.note = std::string("client failure: ") + e.what();
        }
        outcomes[i] = std::move(o);
    };

    std::size_t workers = std::clamp<std::size_t>(options.parallelism, 1, tests.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < tests.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < tests.size();) run_one(i);
            });
    }
    return aggregate(std::move(outcomes));
}

std::string format_eval_table(const EvalReport& report) {
    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"Error Type", "#Occurrences in Query set A", "#Occurrences in Query set B", "Overall Error (%)"});
    for (auto e : kAllErrorTypes) {
        auto i = static_cast<std::size_t>(e);
        rows.push_back({std::string(display_name(e)),
                        std::to_string(report.set_a.count[i]) + " (" + report.set_percent(QuestionSet::A, e) + "%)",
                        std::to_string(report.set_b.count[i]) + " (" + report.set_percent(QuestionSet::B, e) + "%)",
                        report.overall_percent(e)});
    }
    rows.push_back({"Total", std::to_string(report.set_a.total), std::to_string(report.set_b.total), "-"});

    std::array<std::size_t, 4> width{};
    for (const auto& r : rows)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], r[c].size());
    std::ostringstream out;
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < 4; ++c) {
            out << r[c];
            if (c + 1 < 4) out << std::string(width[c] - r[c].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace cpg
