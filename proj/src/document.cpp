#include "cpg/graph.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cpg {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Upstream extraction properties that carry no meaning for QA and are dropped on load.
constexpr std::array<std::string_view, 5> kDroppedNodeKeys{"footnotes", "t_score", "m_score", "prev",
                                                           "n_score"};

[[noreturn]] void malformed(const std::string& what) { throw GraphError(GraphErrc::MalformedDocument, what); }

std::string require_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(where + ": missing '" + key + "'");
    if (!it->is_string()) malformed(where + ": '" + key + "' must be a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) malformed(where + ": '" + key + "' must be a string or null");
    return it->get<std::string>();
}

GuidelineNode parse_node(const json& j, std::size_t pos) {
    std::string where = "nodes[" + std::to_string(pos) + "]";
    if (!j.is_object()) malformed(where + " is not an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "id" || key == "content" || key == "context" || key == "category" || key == "page") continue;
        if (std::find(kDroppedNodeKeys.begin(), kDroppedNodeKeys.end(), key) != kDroppedNodeKeys.end()) continue;
        malformed(where + ": unknown property '" + key + "'");
    }
    GuidelineNode n;
    n.id = require_string(j, "id", where);
    n.content = require_string(j, "content", where);
    n.context = optional_string(j, "context", where);
    n.page = optional_string(j, "page", where);
    if (auto tok = optional_string(j, "category", where)) {
        n.category = parse_category_token(*tok);
        if (!n.category)
            throw GraphError(GraphErrc::UnknownCategoryToken, where + ": unknown category '" + *tok + "'");
    }
    return n;
}

GuidelineEdge parse_edge(const json& j, std::size_t pos) {
    std::string where = "edges[" + std::to_string(pos) + "]";
    if (!j.is_object()) malformed(where + " is not an object");
    for (const auto& [key, value] : j.items())
        if (key != "source" && key != "target" && key != "relation")
            malformed(where + ": unknown property '" + key + "'");
    GuidelineEdge e;
    e.source = require_string(j, "source", where);
    e.target = require_string(j, "target", where);
    if (auto tok = optional_string(j, "relation", where)) {
        e.relation = parse_relation_token(*tok);
        if (!e.relation)
            throw GraphError(GraphErrc::UnknownRelationToken, where + ": unknown relation '" + *tok + "'");
    }
    return e;
}

ordered_json nullable(const std::optional<std::string>& s) {
    return s ? ordered_json(*s) : ordered_json(nullptr);
}

}  // namespace

GuidelineGraph load_graph(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        malformed(e.what());
    }
    if (!doc.is_object()) malformed("document root must be an object");
    for (const auto& [key, value] : doc.items())
        if (key != "@context" && key != "version" && key != "nodes" && key != "edges")
            malformed("unknown top-level key '" + key + "'");
    require_string(doc, "@context", "document");
    std::string version = require_string(doc, "version", "document");

    auto nodes_it = doc.find("nodes");
    auto edges_it = doc.find("edges");
    if (nodes_it == doc.end() || !nodes_it->is_array()) malformed("'nodes' must be an array");
    if (edges_it == doc.end() || !edges_it->is_array()) malformed("'edges' must be an array");

    std::vector<GuidelineNode> nodes;
    nodes.reserve(nodes_it->size());
    for (std::size_t i = 0; i < nodes_it->size(); ++i) nodes.push_back(parse_node((*nodes_it)[i], i));
    std::vector<GuidelineEdge> edges;
    edges.reserve(edges_it->size());
    for (std::size_t i = 0; i < edges_it->size(); ++i) edges.push_back(parse_edge((*edges_it)[i], i));

    return GuidelineGraph::build(std::move(version), std::move(nodes), std::move(edges));
}

GuidelineGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError(GraphErrc::MalformedDocument, "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_graph(buf.str());
}

std::string export_graph(const GuidelineGraph& graph) {
    ordered_json doc;
    doc["@context"] = kDocumentContext;
    doc["version"] = graph.version();
    auto& nodes = doc["nodes"] = ordered_json::array();
    for (const auto& n : graph.nodes()) {
        ordered_json j;
        j["id"] = n.id;
        j["content"] = n.content;
        j["context"] = nullable(n.context);
        j["category"] = n.category ? ordered_json(category_token(*n.category)) : ordered_json(nullptr);
        j["page"] = nullable(n.page);
        nodes.push_back(std::move(j));
    }
    auto& edges = doc["edges"] = ordered_json::array();
    for (const auto& e : graph.edges()) {
        ordered_json j;
        j["source"] = e.source;
        j["target"] = e.target;
        j["relation"] = e.relation ? ordered_json(relation_token(*e.relation)) : ordered_json(nullptr);
        edges.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

}  // namespace cpg
