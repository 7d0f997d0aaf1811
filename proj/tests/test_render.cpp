#include <doctest.h>

#include <random>

#include "cpg/enrichment.hpp"
#include "cpg/query.hpp"
#include "cpg/render.hpp"
#include "fixtures.hpp"

using namespace cpg;
using testing_support::fixture_path;
using testing_support::read_text;

namespace {

constexpr auto kDC = NodeCategory::DiseaseCondition;
constexpr auto kTO = NodeCategory::TreatmentOption;
constexpr auto kEV = NodeCategory::Evaluation;

const char* kSetBAnswer =
    "If the disease condition is \"Stage IIIB (T4, N2) Stage IIIC (T4, N3)\" then evaluate the patient for \"FDG-PET/CT "
    "scan (if not previously done) , Brain MRI with contrast , Pathologic confirmation of N2-3 disease by either: "
    "Mediastinoscopy Supraclavicular lymph node biopsy Thoracoscopy Needle biopsy Mediastinotomy EUS biopsy EBUS "
    "biopsy\". Based on the evaluation, check if it indicates the disease condition \"Contralateral mediastinal node "
    "negative\". If that disease condition has occurred, further check if the disease condition is \"Ipsilateral "
    "mediastinal node negative (T4, N0-1)\". If that disease condition has occurred, further check if the disease "
    "condition is \"Stage IIIA (T4, N0-1) unresectable\". If that disease condition has occurred, use the treatment "
    "\"Definitive concurrent chemoradiation (category 1)\".";

PathMatch path_of(const GuidelineGraph& g, const std::vector<std::string>& ids) {
    PathMatch p;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        p.nodes.push_back(*g.index_of(ids[i]));
        if (i == 0) continue;
        for (auto e : g.out_edges(p.nodes[i - 1]))
            if (g.edge_target_index(e) == p.nodes[i]) {
                p.edges.push_back(e);
                break;
            }
    }
    REQUIRE(p.edges.size() + 1 == p.nodes.size());
    return p;
}

}  // namespace

TEST_CASE("template table") {
    auto t = template_for({kDC, RelationType::Requires, kTO, TemplatePosition::First});
    CHECK(t.text == "If the disease condition is {source}, use the treatment {destination}.");
    CHECK_FALSE(t.fallback);
    t = template_for({kEV, RelationType::Indicates, kDC, TemplatePosition::Subsequent});
    CHECK(t.text == "Based on the evaluation, check if it indicates the disease condition {destination}.");
    t = template_for({kEV, RelationType::IsFollowedBy, kEV, TemplatePosition::First});
    CHECK(t.fallback);
    CHECK(t.text == kFallbackTemplate);

    int canonical = 0, labeled_fallback = 0;
    for (auto s : kAllCategories)
        for (auto r : kAllRelations)
            for (auto d : kAllCategories)
                for (auto pos : {TemplatePosition::First, TemplatePosition::Subsequent}) {
                    auto tt = template_for({s, r, d, pos});
                    if (!tt.fallback) ++canonical;
                    if (tt.fallback && r == label_relation(s, d)) ++labeled_fallback;
                }
    CHECK(canonical == 16);
    CHECK(labeled_fallback == 2);
    CHECK(template_for({std::nullopt, RelationType::Requires, kTO, TemplatePosition::First}).fallback);
}

TEST_CASE("fixture Set B path renders the reference answer") {
    auto g = load_graph_file(fixture_path("nscl-mini.json"));
    auto answer = render_path(g, path_of(g, {"n15", "n16", "n17", "n18", "n19", "n20"}));
    CHECK(answer.sentences.size() == 5);
    CHECK_FALSE(answer.fallback_used);
    CHECK(normalize_answer(answer.text()) == normalize_answer(kSetBAnswer));
}

TEST_CASE("single edge and fallback rendering") {
    auto g = GuidelineGraph::build("v",
                                   {{"a", "Operable", {}, kDC, {}}, {"b", "Surgery", {}, kTO, {}},
                                    {"c", "CT scan", {}, kEV, {}}, {"d", "PET scan", {}, kEV, {}}},
                                   {{"a", "b", RelationType::Requires}, {"c", "d", RelationType::IsFollowedBy}});
    auto one = render_path(g, path_of(g, {"a", "b"}));
    REQUIRE(one.sentences.size() == 1);
    CHECK(one.text() == "If the disease condition is \"Operable\", use the treatment \"Surgery\".");
    auto fb = render_path(g, path_of(g, {"c", "d"}));
    CHECK(fb.fallback_used);
    CHECK(fb.text() == "After \"CT scan\", proceed to \"PET scan\".");
}

TEST_CASE("unlabeled elements are rejected") {
    auto g = GuidelineGraph::build("v", {{"a", "A", {}, kDC, {}}, {"b", "B", {}, std::nullopt, {}}},
                                   {{"a", "b", RelationType::Requires}});
    CHECK_THROWS_AS(render_path(g, path_of(g, {"a", "b"})), RenderError);
}

TEST_CASE("render_subgraph") {
    auto g = load_graph_file(fixture_path("nscl-mini.json"));
    CHECK_THROWS_AS(render_subgraph(g, ResultSet{{"p"}, {}}), RenderError);
    auto rs = evaluate(parse_query(read_text(fixture_path("queries/set-a-handwritten.cql"))), g);
    auto answers = render_subgraph(g, rs);
    REQUIRE(answers.size() == rs.rows.size());
    CHECK(answers[0].text().starts_with("If the current disease condition is"));
    auto two = evaluate(parse_query("MATCH p=(a:Disease_Condition)-[]->(t:Treatment_Option) WHERE toLower(a.content) "
                                    "CONTAINS 'stage iiia (t4, n0-1)' RETURN p"),
                        g);
    auto paragraphs = render_subgraph(g, two);
    REQUIRE(paragraphs.size() == 2);
    CHECK(paragraphs[0].node_ids == std::vector<std::string>{"n19", "n20"});
    CHECK(paragraphs[1].node_ids == std::vector<std::string>{"n24", "n25"});
    auto no_path = evaluate(parse_query("MATCH (a:Disease_Condition) RETURN a"), g);
    CHECK_THROWS_AS(render_subgraph(g, no_path), RenderError);
}

TEST_CASE("random labeled paths: one sentence per edge, content verbatim") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        int k = static_cast<int>(rng() % 7) + 1;
        std::vector<GuidelineNode> nodes;
        std::vector<GuidelineEdge> edges;
        for (int i = 0; i <= k; ++i)
            nodes.push_back({"p" + std::to_string(i), "text " + std::to_string(rng() % 1000) + " #" + std::to_string(i),
                             {}, kAllCategories[rng() % 3], {}});
        for (int i = 0; i < k; ++i)
            edges.push_back({nodes[i].id, nodes[i + 1].id, label_relation(*nodes[i].category, *nodes[i + 1].category)});
        auto g = GuidelineGraph::build("v", nodes, edges);
        std::vector<std::string> ids;
        for (const auto& n : nodes) ids.push_back(n.id);
        auto a = render_path(g, path_of(g, ids));
        REQUIRE(static_cast<int>(a.sentences.size()) == k);
        for (int i = 0; i < k; ++i) {
            const auto& s = a.sentences[static_cast<std::size_t>(i)];
            CHECK(s.find("\"" + nodes[i + 1].content + "\"") != std::string::npos);
            auto pos = i == 0 ? TemplatePosition::First : TemplatePosition::Subsequent;
            auto tmpl = template_for({nodes[i].category, edges[i].relation, nodes[i + 1].category, pos});
            if (tmpl.text.find("{source}") != std::string_view::npos)
                CHECK(s.find("\"" + nodes[i].content + "\"") != std::string::npos);
        }
        CHECK(render_path(g, path_of(g, ids)).text() == a.text());
    }
}

TEST_CASE("normalize_answer") {
    CHECK(normalize_answer("is \"A\", further   check") == "is \"A\" further check");
    CHECK(normalize_answer("  \"x\" ,y ") == "\"x\" ,y");
}
