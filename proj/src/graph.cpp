#include "cpg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

namespace cpg {

namespace {

constexpr std::array<std::string_view, 3> kCategoryTokens{"DiseaseCondition", "TreatmentOption",
                                                          "Evaluation"};
constexpr std::array<std::string_view, 3> kCategoryNames{"Disease Condition", "Treatment Option",
                                                         "Evaluation"};
constexpr std::array<std::string_view, 3> kCategoryLabels{"Disease_Condition", "Treatment_Option",
                                                          "Evaluation"};
constexpr std::array<std::string_view, 3> kRelationTokens{"requires", "indicates", "isFollowedBy"};
constexpr std::array<std::string_view, 3> kRelationNames{"requires", "indicates", "is followed by"};

std::string_view relation_key(const std::optional<RelationType>& r) {
    return r ? relation_token(*r) : std::string_view{};
}

bool edge_less(const GuidelineEdge& a, const GuidelineEdge& b) {
    return std::tuple(std::string_view(a.source), std::string_view(a.target), relation_key(a.relation)) <
           std::tuple(std::string_view(b.source), std::string_view(b.target), relation_key(b.relation));
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view category_token(NodeCategory c) { return kCategoryTokens[static_cast<std::size_t>(c)]; }
std::string_view relation_token(RelationType r) { return kRelationTokens[static_cast<std::size_t>(r)]; }
std::string_view category_display_name(NodeCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view relation_display_name(RelationType r) { return kRelationNames[static_cast<std::size_t>(r)]; }
std::string_view category_query_label(NodeCategory c) { return kCategoryLabels[static_cast<std::size_t>(c)]; }

std::optional<NodeCategory> parse_category_token(std::string_view s) {
    for (auto c : kAllCategories)
        if (category_token(c) == s) return c;
    return std::nullopt;
}

std::optional<RelationType> parse_relation_token(std::string_view s) {
    for (auto r : kAllRelations)
        if (relation_token(r) == s) return r;
    return std::nullopt;
}

std::optional<NodeCategory> parse_category_query_label(std::string_view s) {
    for (auto c : kAllCategories)
        if (category_query_label(c) == s) return c;
    return std::nullopt;
}

std::string_view to_string(GraphErrc e) {
    switch (e) {
        case GraphErrc::MalformedDocument: return "MalformedDocument";
        case GraphErrc::DanglingEdge: return "DanglingEdge";
        case GraphErrc::DuplicateNodeId: return "DuplicateNodeId";
        case GraphErrc::SelfLoop: return "SelfLoop";
        case GraphErrc::UnknownCategoryToken: return "UnknownCategoryToken";
        case GraphErrc::UnknownRelationToken: return "UnknownRelationToken";
        case GraphErrc::UnknownNode: return "UnknownNode";
    }
    return "?";
}

GraphError::GraphError(GraphErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

GuidelineGraph GuidelineGraph::build(std::string version, std::vector<GuidelineNode> nodes,
                                     std::vector<GuidelineEdge> edges) {
    GuidelineGraph g;
    g.version_ = std::move(version);

    std::sort(nodes.begin(), nodes.end(),
              [](const GuidelineNode& a, const GuidelineNode& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0 && nodes[i].id == nodes[i - 1].id)
            throw GraphError(GraphErrc::DuplicateNodeId, "node id '" + nodes[i].id + "' appears twice");
        if (nodes[i].id.empty()) throw GraphError(GraphErrc::MalformedDocument, "node with empty id");
        if (blank(nodes[i].content))
            throw GraphError(GraphErrc::MalformedDocument, "node '" + nodes[i].id + "' has empty content");
    }
    g.nodes_ = std::move(nodes);
    g.index_.reserve(g.nodes_.size());
    for (std::size_t i = 0; i < g.nodes_.size(); ++i) g.index_.emplace(g.nodes_[i].id, i);

    std::sort(edges.begin(), edges.end(), edge_less);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (!g.index_.count(e.source))
            throw GraphError(GraphErrc::DanglingEdge, "edge source '" + e.source + "' does not exist");
        if (!g.index_.count(e.target))
            throw GraphError(GraphErrc::DanglingEdge, "edge target '" + e.target + "' does not exist");
        if (e.source == e.target) throw GraphError(GraphErrc::SelfLoop, "self-loop on '" + e.source + "'");
        if (i > 0 && e == edges[i - 1])
            throw GraphError(GraphErrc::MalformedDocument,
                             "duplicate edge " + e.source + " -> " + e.target);
    }
    g.edges_ = std::move(edges);

    g.out_.assign(g.nodes_.size(), {});
    g.in_.assign(g.nodes_.size(), {});
    g.edge_ends_.reserve(g.edges_.size());
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
        std::size_t s = g.index_.at(g.edges_[i].source);
        std::size_t t = g.index_.at(g.edges_[i].target);
        g.edge_ends_.emplace_back(s, t);
        g.out_[s].push_back(i);
        g.in_[t].push_back(i);
    }
    return g;
}

const GuidelineNode* GuidelineGraph::find(std::string_view id) const {
    auto i = index_of(id);
    return i ? &nodes_[*i] : nullptr;
}

std::optional<std::size_t> GuidelineGraph::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const GuidelineNode& GuidelineGraph::node(std::string_view id) const {
    if (const auto* n = find(id)) return *n;
    throw GraphError(GraphErrc::UnknownNode, "no node with id '" + std::string(id) + "'");
}

GuidelineGraph GuidelineGraph::with_categories(
    const std::unordered_map<std::string, NodeCategory>& cats) const {
    GuidelineGraph g = *this;
    for (auto& n : g.nodes_) {
        auto it = cats.find(n.id);
        if (it != cats.end()) n.category = it->second;
    }
    return g;
}

GuidelineGraph GuidelineGraph::with_relations(
    const std::vector<std::optional<RelationType>>& relations) const {
    if (relations.size() != edges_.size())
        throw std::invalid_argument("with_relations: size mismatch");
    std::vector<GuidelineEdge> edges = edges_;
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i].relation = relations[i];
    // Relabeling can reorder edges or collapse parallel ones into duplicates.
    return build(version_, nodes_, std::move(edges));
}

GraphStats stats(const GuidelineGraph& graph) {
    GraphStats s;
    for (const auto& n : graph.nodes()) {
        if (n.category)
            ++s.per_category[static_cast<std::size_t>(*n.category)];
        else
            ++s.unlabeled_nodes;
    }
    for (const auto& e : graph.edges()) {
        if (e.relation)
            ++s.per_relation[static_cast<std::size_t>(*e.relation)];
        else
            ++s.unlabeled_edges;
    }
    s.total_nodes = graph.node_count();
    s.total_edges = graph.edge_count();
    return s;
}

std::vector<Neighbor> neighbors(const GuidelineGraph& graph, std::string_view node_id, Direction dir) {
    auto idx = graph.index_of(node_id);
    if (!idx) throw GraphError(GraphErrc::UnknownNode, "no node with id '" + std::string(node_id) + "'");

    const auto& edge_ids = dir == Direction::Outgoing ? graph.out_edges(*idx) : graph.in_edges(*idx);
    std::vector<Neighbor> out;
    out.reserve(edge_ids.size());
    for (auto ei : edge_ids) {
        const auto& e = graph.edges()[ei];
        std::size_t other = dir == Direction::Outgoing ? graph.edge_target_index(ei) : graph.edge_source_index(ei);
        out.push_back({&e, &graph.nodes()[other]});
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        return std::tuple(relation_key(a.edge->relation), std::string_view(a.node->id)) <
               std::tuple(relation_key(b.edge->relation), std::string_view(b.node->id));
    });
    return out;
}

}  // namespace cpg
