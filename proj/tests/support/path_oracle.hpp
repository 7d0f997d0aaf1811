#pragma once

#include <functional>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpg/graph.hpp"
#include "cpg/query.hpp"

namespace oracle {

struct OracleSizeExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An edge as it appears in the document.
struct RawEdge {
    std::string source;
    std::string target;
    std::string relation;  // "" when unlabeled

    auto operator<=>(const RawEdge&) const = default;
};

// Trail as its edge sequence plus node sequence.
struct RawPath {
    std::vector<std::string> nodes;
    std::vector<RawEdge> edges;

    auto operator<=>(const RawPath&) const = default;
};

using NodePredicate = std::function<bool(const cpg::GuidelineNode&)>;

// Exhaustive depth-first enumeration of directed trails over the raw node and
// edge lists. Shares nothing with the query engine. Throws above 12 nodes.
std::set<RawPath> enumerate_paths_oracle(const std::vector<cpg::GuidelineNode>& nodes,
                                         const std::vector<RawEdge>& edges, const NodePredicate& start,
                                         const NodePredicate& end, int min, int max);

// Converts a path column value from the engine.
RawPath to_raw(const cpg::GuidelineGraph& graph, const cpg::PathMatch& path);

// Random valid graph: up to max_nodes nodes, max_edges edges, some unlabeled.
struct RandomGraph {
    std::vector<cpg::GuidelineNode> nodes;
    std::vector<RawEdge> edges;
    cpg::GuidelineGraph graph;
};

RandomGraph random_graph(std::mt19937& rng, int max_nodes, int max_edges, double unlabeled_rate = 0.15);

// Random single-pattern query with its start/end predicates and bounds.
struct RandomQuery {
    std::string text;
    NodePredicate start;
    NodePredicate end;
    int min;
    int max;
};

RandomQuery random_query(std::mt19937& rng, int max_bound);

// Random AST for render/parse round trips.
cpg::QueryAst random_ast(std::mt19937& rng);

}  // namespace oracle
