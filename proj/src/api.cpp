#include "cpg/api.hpp"

namespace cpg::api {

namespace {

Json nullable(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

Json path_payload(const GuidelineGraph& graph, const PathMatch& path) {
    Json nodes = Json::array();
    for (auto n : path.nodes) nodes.push_back(graph.nodes()[n].id);
    Json relations = Json::array();
    for (auto e : path.edges) {
        const auto& r = graph.edges()[e].relation;
        relations.push_back(r ? Json(relation_token(*r)) : Json(nullptr));
    }
    Json j;
    j["nodes"] = std::move(nodes);
    j["relations"] = std::move(relations);
    return j;
}

}  // namespace

std::string serialize(const Json& payload) { return payload.dump(2) + "\n"; }

Json stats_payload(const GraphStats& s) {
    Json nodes;
    for (auto c : kAllCategories) nodes[std::string(category_token(c))] = s.category(c);
    nodes["Unlabeled"] = s.unlabeled_nodes;
    nodes["total"] = s.total_nodes;
    Json edges;
    for (auto r : kAllRelations) edges[std::string(relation_token(r))] = s.relation(r);
    edges["Unlabeled"] = s.unlabeled_edges;
    edges["total"] = s.total_edges;
    Json j;
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j;
}

Json validate_payload(const GuidelineGraph& graph) {
    Json j;
    j["version"] = graph.version();
    j["stats"] = stats_payload(stats(graph));
    return j;
}

Json node_payload(const GuidelineNode& n) {
    Json j;
    j["id"] = n.id;
    j["content"] = n.content;
    j["context"] = nullable(n.context);
    j["category"] = n.category ? Json(category_token(*n.category)) : Json(nullptr);
    j["page"] = nullable(n.page);
    return j;
}

Json neighbors_payload(const GuidelineGraph& graph, std::string_view node_id, Direction direction) {
    auto list = neighbors(graph, node_id, direction);
    Json items = Json::array();
    for (const auto& nb : list) {
        Json item;
        item["relation"] = nb.edge->relation ? Json(relation_token(*nb.edge->relation)) : Json(nullptr);
        item["node"] = node_payload(*nb.node);
        items.push_back(std::move(item));
    }
    Json j;
    j["node"] = std::string(node_id);
    j["direction"] = direction == Direction::Outgoing ? "out" : "in";
    j["neighbors"] = std::move(items);
    return j;
}

Json result_set_payload(const GuidelineGraph& graph, const ResultSet& results) {
    Json rows = Json::array();
    for (const auto& row : results.rows) {
        Json out = Json::array();
        for (const auto& v : row) {
            if (const auto* p = std::get_if<PathMatch>(&v)) {
                out.push_back(path_payload(graph, *p));
            } else if (const auto* l = std::get_if<NodeListValue>(&v)) {
                Json nodes = Json::array();
                for (auto n : l->nodes) nodes.push_back(node_payload(graph.nodes()[n]));
                out.push_back(std::move(nodes));
            } else if (const auto* n = std::get_if<NodeValue>(&v)) {
                out.push_back(node_payload(graph.nodes()[n->node]));
            } else if (const auto* pr = std::get_if<PropertyValue>(&v)) {
                out.push_back(nullable(pr->text));
            }
        }
        rows.push_back(std::move(out));
    }
    Json j;
    j["columns"] = results.columns;
    j["rows"] = std::move(rows);
    return j;
}

Json query_payload(const GuidelineGraph& graph, std::string_view cql, const QaOptions& options) {
    auto ast = parse_query(cql, ParseOptions{options.hop_cap});
    return result_set_payload(graph, evaluate(ast, graph, EvalOptions{options.row_cap}));
}

Json answers_payload(const std::vector<RenderedAnswer>& answers) {
    Json paths = Json::array();
    for (const auto& a : answers) {
        Json p;
        p["nodeIds"] = a.node_ids;
        p["text"] = a.text();
        p["fallbackUsed"] = a.fallback_used;
        paths.push_back(std::move(p));
    }
    Json j;
    j["paths"] = std::move(paths);
    return j;
}

Json ask_payload(const AskResult& r) {
    Json j;
    j["query"] = r.query;
    j["error"] = r.error ? Json(to_string(*r.error)) : Json(nullptr);
    j["detail"] = r.error_detail.empty() ? Json(nullptr) : Json(r.error_detail);
    j["answers"] = answers_payload(r.answers)["paths"];
    return j;
}

Json classification_payload(const ClassificationResult& result, const std::optional<AccuracyReport>& accuracy) {
    Json predictions;
    for (const auto& [id, p] : result.predictions) {
        if (const auto* c = std::get_if<NodeCategory>(&p)) {
            predictions[id] = category_token(*c);
        } else {
            const auto& f = std::get<ClassificationFailure>(p);
            Json fail;
            fail["failure"] = f.kind == ClassificationFailure::Kind::UnparseableLabel ? "UnparseableLabel" : "ClientFailure";
            fail["detail"] = f.detail;
            predictions[id] = std::move(fail);
        }
    }
    Json j;
    j["mode"] = to_string(result.mode);
    j["predictions"] = predictions.is_null() ? Json::object() : std::move(predictions);
    if (accuracy) {
        Json a;
        a["correct"] = accuracy->correct;
        a["total"] = accuracy->total;
        a["accuracy"] = accuracy->accuracy;
        Json confusion;
        constexpr const char* kRows[] = {"DiseaseCondition", "TreatmentOption", "Evaluation", "failure"};
        for (std::size_t r = 0; r < 4; ++r) {
            Json row;
            for (auto c : kAllCategories) row[std::string(category_token(c))] = accuracy->confusion[r][static_cast<std::size_t>(c)];
            confusion[kRows[r]] = std::move(row);
        }
        a["confusion"] = std::move(confusion);
        j["accuracy"] = std::move(a);
    }
    return j;
}

Json eval_payload(const EvalReport& report) {
    Json rows = Json::array();
    for (auto e : kAllErrorTypes) {
        auto i = static_cast<std::size_t>(e);
        Json row;
        row["errorType"] = to_string(e);
        row["setA"] = report.set_a.count[i];
        row["setAPercent"] = report.set_percent(QuestionSet::A, e);
        row["setB"] = report.set_b.count[i];
        row["setBPercent"] = report.set_percent(QuestionSet::B, e);
        row["overallPercent"] = report.overall_percent(e);
        rows.push_back(std::move(row));
    }
    Json totals;
    totals["setA"] = report.set_a.total;
    totals["setB"] = report.set_b.total;
    Json questions = Json::array();
    for (const auto& o : report.outcomes) {
        Json q;
        q["id"] = o.id;
        q["set"] = o.set == QuestionSet::A ? "A" : "B";
        q["errorType"] = to_string(o.type);
        q["query"] = o.query;
        q["note"] = o.note.empty() ? Json(nullptr) : Json(o.note);
        questions.push_back(std::move(q));
    }
    Json j;
    j["rows"] = std::move(rows);
    j["totals"] = std::move(totals);
    j["questions"] = std::move(questions);
    return j;
}

Json query_error_payload(const QueryError& e) {
    Json j;
    j["error"] = to_string(e.code());
    j["message"] = e.message();
    j["position"] = e.position();
    j["expected"] = e.expected();
    return j;
}

Json error_payload(std::string_view code, std::string_view message) {
    Json j;
    j["error"] = std::string(code);
    j["message"] = std::string(message);
    return j;
}

}  // namespace cpg::api
