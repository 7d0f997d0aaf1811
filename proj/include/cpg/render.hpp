#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cpg/graph.hpp"
#include "cpg/query.hpp"

namespace cpg {

enum class TemplatePosition { First, Subsequent };

struct TemplateKey {
    std::optional<NodeCategory> source;
    std::optional<RelationType> relation;
    std::optional<NodeCategory> destination;
    TemplatePosition position = TemplatePosition::First;
};

// Slots are written "{source}" and "{destination}".
struct AnswerTemplate {
    std::string_view text;
    bool fallback = false;
};

struct TemplateRow {
    NodeCategory source;
    RelationType relation;
    NodeCategory destination;
    std::string_view first;
    std::string_view subsequent;
};

// The eight canonical graph-semantics-to-sentence rows.
const std::array<TemplateRow, 8>& template_table();

inline constexpr std::string_view kFallbackTemplate = "After {source}, proceed to {destination}.";

// Total: non-canonical keys get kFallbackTemplate with fallback set.
AnswerTemplate template_for(const TemplateKey& key);

enum class RenderErrc { UnlabeledPathElement, NoPathInResults };

class RenderError : public std::runtime_error {
public:
    RenderError(RenderErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    RenderErrc code() const noexcept { return code_; }

private:
    RenderErrc code_;
};

struct RenderedAnswer {
    std::vector<std::string> node_ids;
    std::vector<std::string> sentences;  // one per edge
    bool fallback_used = false;

    std::string text() const;  // sentences joined by single spaces
};

RenderedAnswer render_path(const GuidelineGraph& graph, const PathMatch& path);

// One answer per row, using the row's first path column, in result order.
std::vector<RenderedAnswer> render_subgraph(const GuidelineGraph& graph, const ResultSet& results);

// Comparison form for rendered prose: drops commas that directly follow a
// closing double quote and collapses whitespace runs.
std::string normalize_answer(std::string_view text);

}  // namespace cpg
