#include "cpg/render.hpp"

#include <cctype>

namespace cpg {

namespace {

using C = NodeCategory;
using R = RelationType;

constexpr std::array<TemplateRow, 8> kTable{{
    {C::DiseaseCondition, R::Requires, C::TreatmentOption,
     "If the disease condition is {source}, use the treatment {destination}.",
     "If that disease condition has occurred, use the treatment {destination}."},
    {C::Evaluation, R::IsFollowedBy, C::TreatmentOption,
     "Evaluate the patient for {source}, then use the treatment {destination}.",
     "After the evaluation, use the treatment {destination}."},
    {C::TreatmentOption, R::IsFollowedBy, C::TreatmentOption,
     "After the treatment {source} is over, further use the treatment {destination}.",
     "After the previous treatment is over, further use the treatment {destination}."},
    {C::DiseaseCondition, R::IsFollowedBy, C::Evaluation,
     "If the disease condition is {source}, then evaluate the patient for {destination}.",
     "If that disease condition has occurred, then evaluate the patient for {destination}."},
    {C::TreatmentOption, R::IsFollowedBy, C::Evaluation,
     "After the treatment {source}, evaluate the patient for {destination}.",
     "After the previous treatment, evaluate the patient for {destination}."},
    {C::TreatmentOption, R::IsFollowedBy, C::DiseaseCondition,
     "Check if after the treatment {source}, the disease condition {destination} has occurred.",
     "Check if after the previous treatment, the disease condition {destination} has occurred."},
    {C::Evaluation, R::Indicates, C::DiseaseCondition,
     "Evaluate the patient for {source}, check if it indicates the disease condition {destination}.",
     "Based on the evaluation, check if it indicates the disease condition {destination}."},
    {C::DiseaseCondition, R::IsFollowedBy, C::DiseaseCondition,
     "If the current disease condition is {source}, further check if the disease condition is {destination}.",
     "If that disease condition has occurred, further check if the disease condition is {destination}."},
}};

void replace_all(std::string& s, std::string_view slot, const std::string& value) {
    for (auto pos = s.find(slot); pos != std::string::npos; pos = s.find(slot, pos + value.size()))
        s.replace(pos, slot.size(), value);
}

std::string quoted(const std::string& content) { return "\"" + content + "\""; }

}  // namespace

const std::array<TemplateRow, 8>& template_table() { return kTable; }

AnswerTemplate template_for(const TemplateKey& key) {
    if (key.source && key.relation && key.destination) {
        for (const auto& row : kTable)
            if (row.source == *key.source && row.relation == *key.relation && row.destination == *key.destination)
                return {key.position == TemplatePosition::First ? row.first : row.subsequent, false};
    }
    return {kFallbackTemplate, true};
}

std::string RenderedAnswer::text() const {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

RenderedAnswer render_path(const GuidelineGraph& graph, const PathMatch& path) {
    RenderedAnswer answer;
    for (auto n : path.nodes) {
        const auto& node = graph.nodes()[n];
        if (!node.category) throw RenderError(RenderErrc::UnlabeledPathElement, "node '" + node.id + "' has no category");
        answer.node_ids.push_back(node.id);
    }
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        const auto& edge = graph.edges()[path.edges[i]];
        if (!edge.relation)
            throw RenderError(RenderErrc::UnlabeledPathElement, "edge " + edge.source + " -> " + edge.target + " has no relation");
        const auto& src = graph.nodes()[path.nodes[i]];
        const auto& dst = graph.nodes()[path.nodes[i + 1]];
        auto tmpl = template_for({src.category, edge.relation, dst.category,
                                  i == 0 ? TemplatePosition::First : TemplatePosition::Subsequent});
        std::string sentence(tmpl.text);
        replace_all(sentence, "{source}", quoted(src.content));
        replace_all(sentence, "{destination}", quoted(dst.content));
        answer.sentences.push_back(std::move(sentence));
        answer.fallback_used = answer.fallback_used || tmpl.fallback;
    }
    return answer;
}

std::vector<RenderedAnswer> render_subgraph(const GuidelineGraph& graph, const ResultSet& results) {
    if (results.rows.empty()) throw RenderError(RenderErrc::NoPathInResults, "result set is empty");
    std::vector<RenderedAnswer> out;
    out.reserve(results.rows.size());
    for (const auto& row : results.rows) {
        const PathMatch* path = nullptr;
        for (const auto& v : row)
            if ((path = std::get_if<PathMatch>(&v))) break;
        if (!path) throw RenderError(RenderErrc::NoPathInResults, "result rows carry no path column");
        out.push_back(render_path(graph, *path));
    }
    return out;
}

std::string normalize_answer(std::string_view text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == ',' && i > 0 && text[i - 1] == '"') continue;
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
            continue;
        }
        out.push_back(c);
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace cpg
