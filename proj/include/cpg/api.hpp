#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cpg/enrichment.hpp"
#include "cpg/graph.hpp"
#include "cpg/qa.hpp"
#include "cpg/query.hpp"
#include "cpg/render.hpp"

// JSON payloads shared by the CLI (--json), the HTTP service and library
// callers, so that all three emit byte-identical documents.
namespace cpg::api {

using Json = nlohmann::ordered_json;

// Two-space indented, trailing newline.
std::string serialize(const Json& payload);

Json stats_payload(const GraphStats& stats);
Json validate_payload(const GuidelineGraph& graph);
Json node_payload(const GuidelineNode& node);
Json neighbors_payload(const GuidelineGraph& graph, std::string_view node_id, Direction direction);

Json result_set_payload(const GuidelineGraph& graph, const ResultSet& results);
// Parses and evaluates; throws QueryError.
Json query_payload(const GuidelineGraph& graph, std::string_view cql, const QaOptions& options = {});

Json answers_payload(const std::vector<RenderedAnswer>& answers);
Json ask_payload(const AskResult& result);

Json classification_payload(const ClassificationResult& result, const std::optional<AccuracyReport>& accuracy = {});
Json eval_payload(const EvalReport& report);

Json query_error_payload(const QueryError& error);
Json error_payload(std::string_view code, std::string_view message);

}  // namespace cpg::api
