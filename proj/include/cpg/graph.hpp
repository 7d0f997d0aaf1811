#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpg {

enum class NodeCategory { DiseaseCondition, TreatmentOption, Evaluation };
enum class RelationType { Requires, Indicates, IsFollowedBy };

inline constexpr std::array<NodeCategory, 3> kAllCategories{
    NodeCategory::DiseaseCondition, NodeCategory::TreatmentOption, NodeCategory::Evaluation};
inline constexpr std::array<RelationType, 3> kAllRelations{
    RelationType::Requires, RelationType::Indicates, RelationType::IsFollowedBy};

// Document tokens: "DiseaseCondition", "requires", ...
std::string_view category_token(NodeCategory c);
std::string_view relation_token(RelationType r);
std::optional<NodeCategory> parse_category_token(std::string_view s);
std::optional<RelationType> parse_relation_token(std::string_view s);

// Human-readable names: "Disease Condition", "is followed by", ...
std::string_view category_display_name(NodeCategory c);
std::string_view relation_display_name(RelationType r);

// Query-language labels: "Disease_Condition", ...
std::string_view category_query_label(NodeCategory c);
std::optional<NodeCategory> parse_category_query_label(std::string_view s);

struct GuidelineNode {
    std::string id;
    std::string content;
    std::optional<std::string> context;
    std::optional<NodeCategory> category;  // nullopt == Unlabeled
    std::optional<std::string> page;

    friend bool operator==(const GuidelineNode&, const GuidelineNode&) = default;
};

struct GuidelineEdge {
    std::string source;
    std::string target;
    std::optional<RelationType> relation;  // nullopt == Unlabeled

    friend bool operator==(const GuidelineEdge&, const GuidelineEdge&) = default;
};

enum class GraphErrc {
    MalformedDocument,
    DanglingEdge,
    DuplicateNodeId,
    SelfLoop,
    UnknownCategoryToken,
    UnknownRelationToken,
    UnknownNode,
};

std::string_view to_string(GraphErrc e);

class GraphError : public std::runtime_error {
public:
    GraphError(GraphErrc code, const std::string& what);
    GraphErrc code() const noexcept { return code_; }

private:
    GraphErrc code_;
};

enum class Direction { Outgoing, Incoming };

struct Neighbor {
    const GuidelineEdge* edge;
    const GuidelineNode* node;
};

struct GraphStats {
    std::array<std::size_t, 3> per_category{};  // indexed by NodeCategory
    std::size_t unlabeled_nodes = 0;
    std::size_t total_nodes = 0;
    std::array<std::size_t, 3> per_relation{};  // indexed by RelationType
    std::size_t unlabeled_edges = 0;
    std::size_t total_edges = 0;

    std::size_t category(NodeCategory c) const { return per_category[static_cast<std::size_t>(c)]; }
    std::size_t relation(RelationType r) const { return per_relation[static_cast<std::size_t>(r)]; }

    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

// Immutable guideline graph. Nodes are kept sorted by id, edges by
// (source, target, relation); adjacency lists hold edge indices.
class GuidelineGraph {
public:
    GuidelineGraph() = default;

    // Validates and builds. Throws GraphError on dangling endpoints,
    // duplicate ids, self-loops, duplicate edge triples or empty content.
    static GuidelineGraph build(std::string version, std::vector<GuidelineNode> nodes,
                                std::vector<GuidelineEdge> edges);

    const std::string& version() const { return version_; }
    const std::vector<GuidelineNode>& nodes() const { return nodes_; }
    const std::vector<GuidelineEdge>& edges() const { return edges_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const GuidelineNode* find(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;
    const GuidelineNode& node(std::string_view id) const;  // throws UnknownNode

    // Edge indices leaving/entering node index i, in (target|source, relation) order.
    const std::vector<std::size_t>& out_edges(std::size_t node_index) const { return out_[node_index]; }
    const std::vector<std::size_t>& in_edges(std::size_t node_index) const { return in_[node_index]; }
    std::size_t edge_source_index(std::size_t edge_index) const { return edge_ends_[edge_index].first; }
    std::size_t edge_target_index(std::size_t edge_index) const { return edge_ends_[edge_index].second; }

    // Returns a copy with replaced node categories / edge relations; ids unchanged.
    GuidelineGraph with_categories(const std::unordered_map<std::string, NodeCategory>& cats) const;
    GuidelineGraph with_relations(const std::vector<std::optional<RelationType>>& relations) const;

    friend bool operator==(const GuidelineGraph& a, const GuidelineGraph& b) {
        return a.version_ == b.version_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    std::string version_;
    std::vector<GuidelineNode> nodes_;
    std::vector<GuidelineEdge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::pair<std::size_t, std::size_t>> edge_ends_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

GraphStats stats(const GuidelineGraph& graph);

// Ordered by relation token (unlabeled first), then neighbor id.
std::vector<Neighbor> neighbors(const GuidelineGraph& graph, std::string_view node_id, Direction dir);

// On-disk guideline document.
inline constexpr std::string_view kDocumentContext = "https://example.org/cpg/v1";

GuidelineGraph load_graph(std::string_view document);
GuidelineGraph load_graph_file(const std::string& path);
std::string export_graph(const GuidelineGraph& graph);

}  // namespace cpg
