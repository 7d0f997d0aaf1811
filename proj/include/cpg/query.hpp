#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpg/graph.hpp"

namespace cpg {

// ---------------------------------------------------------------------------
// AST for CQL, the Cypher subset: MATCH / WHERE / WITH / RETURN with labeled
// node patterns, directed (optionally variable-length) hops and CONTAINS filters.

enum class NodeProperty { Content, Context };

std::string_view to_string(NodeProperty p);

struct NodePattern {
    std::optional<std::string> variable;
    std::optional<NodeCategory> label;

    friend bool operator==(const NodePattern&, const NodePattern&) = default;
};

struct HopBounds {
    int min = 1;
    int max = 1;

    friend bool operator==(const HopBounds&, const HopBounds&) = default;
};

// Always directed left to right. No bounds means exactly one edge.
struct Hop {
    std::optional<HopBounds> bounds;

    int min_length() const { return bounds ? bounds->min : 1; }
    int max_length() const { return bounds ? bounds->max : 1; }

    friend bool operator==(const Hop&, const Hop&) = default;
};

struct PathPattern {
    std::optional<std::string> path_variable;
    std::vector<NodePattern> nodes;  // nodes.size() == hops.size() + 1
    std::vector<Hop> hops;

    friend bool operator==(const PathPattern&, const PathPattern&) = default;
};

struct ContainsFilter {
    std::string variable;
    NodeProperty property = NodeProperty::Content;
    std::string needle;
    bool case_folded = false;  // either side wrapped in toLower()

    friend bool operator==(const ContainsFilter&, const ContainsFilter&) = default;
};

struct MatchClause {
    std::vector<PathPattern> patterns;
    friend bool operator==(const MatchClause&, const MatchClause&) = default;
};

struct WhereClause {
    std::vector<ContainsFilter> filters;  // conjunction
    friend bool operator==(const WhereClause&, const WhereClause&) = default;
};

struct WithClause {
    std::vector<std::string> variables;
    friend bool operator==(const WithClause&, const WithClause&) = default;
};

struct ReturnItem {
    enum class Kind { Variable, Nodes, Property };
    Kind kind = Kind::Variable;
    std::string variable;
    NodeProperty property = NodeProperty::Content;  // Kind::Property only

    std::string column_name() const;

    friend bool operator==(const ReturnItem&, const ReturnItem&) = default;
};

using Clause = std::variant<MatchClause, WhereClause, WithClause>;

struct QueryAst {
    std::vector<Clause> clauses;  // first is a MatchClause
    std::vector<ReturnItem> returns;

    friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

// ---------------------------------------------------------------------------
// Errors

enum class QueryErrc { SyntaxError, UnboundVariable, UnknownLabel, UnknownProperty, BoundsError, ResultLimitExceeded };

std::string_view to_string(QueryErrc e);

class QueryError : public std::runtime_error {
public:
    QueryError(QueryErrc code, std::size_t position, std::string message, std::vector<std::string> expected = {});

    QueryErrc code() const noexcept { return code_; }
    // Byte offset into the query text.
    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }
    const std::string& message() const noexcept { return message_; }

private:
    QueryErrc code_;
    std::size_t position_;
    std::string message_;
    std::vector<std::string> expected_;
};

inline constexpr int kDefaultHopCap = 10;
inline constexpr std::size_t kDefaultRowCap = 10000;

struct ParseOptions {
    int hop_cap = kDefaultHopCap;
};

// Never aborts: returns an AST or throws QueryError.
QueryAst parse_query(std::string_view text, const ParseOptions& options = {});

// Canonical text; parse_query(render_query(a)) == a.
std::string render_query(const QueryAst& ast);

// ---------------------------------------------------------------------------
// Evaluation

// node0, edge0, node1, ..., edge_{k-1}, node_k as indices into the graph.
struct PathMatch {
    std::vector<std::size_t> nodes;
    std::vector<std::size_t> edges;

    std::size_t length() const { return edges.size(); }
    friend bool operator==(const PathMatch&, const PathMatch&) = default;
    friend auto operator<=>(const PathMatch&, const PathMatch&) = default;
};

struct NodeListValue {
    std::vector<std::size_t> nodes;
    friend bool operator==(const NodeListValue&, const NodeListValue&) = default;
};

struct NodeValue {
    std::size_t node;
    friend bool operator==(const NodeValue&, const NodeValue&) = default;
};

struct PropertyValue {
    std::size_t node;
    NodeProperty property;
    std::optional<std::string> text;
    friend bool operator==(const PropertyValue&, const PropertyValue&) = default;
};

using ResultValue = std::variant<PathMatch, NodeListValue, NodeValue, PropertyValue>;
using ResultRow = std::vector<ResultValue>;

// Rows ordered by (total path length, node-id sequence); no duplicates.
struct ResultSet {
    std::vector<std::string> columns;
    std::vector<ResultRow> rows;

    bool empty() const { return rows.empty(); }
};

struct EvalOptions {
    std::size_t row_cap = kDefaultRowCap;
};

ResultSet evaluate(const QueryAst& ast, const GuidelineGraph& graph, const EvalOptions& options = {});

// Substring test used by WHERE filters; absent context never matches.
bool filter_matches(const ContainsFilter& filter, const GuidelineNode& node);

// Copy of the AST with every variable-length upper bound set to `max`.
QueryAst with_upper_bounds(const QueryAst& ast, int max);

}  // namespace cpg
