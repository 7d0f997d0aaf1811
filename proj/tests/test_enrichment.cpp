#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <random>

#include "cpg/completion.hpp"
#include "cpg/enrichment.hpp"
#include "cpg/render.hpp"
#include "fixtures.hpp"

using namespace cpg;
using testing_support::fixture_path;
using testing_support::read_text;
using testing_support::source_path;

namespace {


constexpr auto kDC = NodeCategory::DiseaseCondition;
constexpr auto kTO = NodeCategory::TreatmentOption;
constexpr auto kEV = NodeCategory::Evaluation;

GuidelineNode node(std::string id, std::string content, std::optional<std::string> context = {},
                   std::optional<NodeCategory> cat = {}) {
    return {std::move(id), std::move(content), std::move(context), cat, std::nullopt};
}

std::vector<Exemplar> fixture_exemplars() { return load_exemplars(read_text(fixture_path("exemplars.json"))); }

}  // namespace

TEST_CASE("relation rule") {
    CHECK(label_relation(kDC, kTO) == RelationType::Requires);
    CHECK(label_relation(kEV, kDC) == RelationType::Indicates);
    CHECK(label_relation(kEV, kEV) == RelationType::IsFollowedBy);
    std::array<int, 3> mult{};
    for (auto s : kAllCategories)
        for (auto d : kAllCategories) ++mult[static_cast<std::size_t>(label_relation(s, d))];
    CHECK(mult == std::array<int, 3>{1, 1, 7});
    for (const auto& row : template_table()) CHECK(label_relation(row.source, row.destination) == row.relation);
    CHECK_THROWS_AS(label_relation(std::optional<NodeCategory>{}, std::optional<NodeCategory>{kDC}), EnrichmentError);
}

TEST_CASE("label_all_relations on a chain") {
    auto g = GuidelineGraph::build("v", {node("a", "A", {}, kDC), node("b", "B", {}, kTO), node("c", "C", {}, kEV)},
                                   {{"a", "b", std::nullopt}, {"b", "c", std::nullopt}});
    auto labeled = label_all_relations(g);
    REQUIRE(labeled.edge_count() == 2);
    CHECK(labeled.edges()[0].relation == RelationType::Requires);
    CHECK(labeled.edges()[1].relation == RelationType::IsFollowedBy);
    CHECK(labeled.nodes() == g.nodes());
}

TEST_CASE("label_all_relations reports unlabeled endpoints") {
    auto g = GuidelineGraph::build("v", {node("a", "A", {}, kDC), node("b", "B")}, {{"a", "b", std::nullopt}});
    try {
        label_all_relations(g);
        FAIL("expected UnlabeledEndpoint");
    } catch (const EnrichmentError& e) {
        CHECK(e.code() == EnrichErrc::UnlabeledEndpoint);
        CHECK(e.node_ids() == std::vector<std::string>{"b"});
    }
}

TEST_CASE("label_all_relations merges edges that collapse") {
    auto g = GuidelineGraph::build("v", {node("a", "A", {}, kDC), node("b", "B", {}, kTO)},
                                   {{"a", "b", std::nullopt}, {"a", "b", RelationType::Indicates}});
    auto labeled = label_all_relations(g);
    REQUIRE(labeled.edge_count() == 1);
    CHECK(labeled.edges()[0].relation == RelationType::Requires);
}

TEST_CASE("fixture relations equal the per-edge rule recount") {
    auto expected = nlohmann::json::parse(read_text(source_path("tests/oracles/nscl-mini.expected.json")));
    auto unlabeled = load_graph_file(fixture_path("nscl-mini-unlabeled.json"));
    auto gold = load_gold_labels(read_text(fixture_path("gold-labels.json")));
    std::unordered_map<std::string, NodeCategory> cats(gold.begin(), gold.end());
    auto labeled = label_all_relations(unlabeled.with_categories(cats));
    auto s = stats(labeled);
    for (auto r : kAllRelations)
        CHECK(s.relation(r) == expected["ruleRelations"][std::string(relation_token(r))].get<std::size_t>());
    CHECK(labeled == load_graph_file(fixture_path("nscl-mini.json")));
}

TEST_CASE("heuristic categorizer") {
    CHECK(heuristic_categorize(node("x", "Concurrent chemoradiation")) == kTO);
    CHECK(heuristic_categorize(node("x", "Biomarker testing")) == kEV);
    CHECK(heuristic_categorize(node("x", "N3 positive")) == kDC);
    // whole words only
    CHECK(heuristic_categorize(node("x", "Start restaging")) == kDC);
    CHECK(heuristic_categorize(node("x", "rt boost")) == kTO);
    // a tie is broken by context
    CHECK(heuristic_categorize(node("x", "Surgery after scan", std::string("TREATMENT"))) == kTO);
    CHECK(heuristic_categorize(node("x", "Surgery after scan", std::string("PET"))) == kEV);
    CHECK(heuristic_categorize(node("x", "Surgery after scan")) == kDC);
    // no content hit: context is not consulted
    CHECK(heuristic_categorize(node("x", "Operable", std::string("INITIAL TREATMENT"))) == kDC);
}

TEST_CASE("heuristic mode matches the independent lexicon re-run") {
    auto expected = nlohmann::json::parse(read_text(source_path("tests/oracles/nscl-mini.expected.json")));
    auto g = load_graph_file(fixture_path("nscl-mini.json"));
    ClassifyOptions opts;
    opts.lexicon = Lexicon::from_json(read_text(fixture_path("lexicon.json")));
    auto result = classify_nodes(g, nullptr, opts);
    REQUIRE(result.predictions.size() == g.node_count());
    for (const auto& [id, p] : result.predictions)
        CHECK_MESSAGE(std::string(category_token(std::get<NodeCategory>(p))) == expected["heuristic"][id].get<std::string>(), id);
}

TEST_CASE("prompt goldens") {
    auto operable = node("n", "Operable", std::string("clinical stage"));
    CHECK(build_zero_shot_prompt(operable) == read_text(source_path("tests/golden/zero-shot-operable.txt")));
    CHECK(build_zero_shot_prompt(node("n", "N3 positive")) ==
          read_text(source_path("tests/golden/zero-shot-no-context.txt")));
    CHECK(build_few_shot_prompt(operable, fixture_exemplars()) ==
          read_text(source_path("tests/golden/few-shot-operable.txt")));
    CHECK(build_zero_shot_prompt(operable) == build_zero_shot_prompt(operable));
}

TEST_CASE("few-shot structure") {
    auto target = node("n", "Operable", std::string("clinical stage"));
    CHECK_THROWS_AS(build_few_shot_prompt(target, {}), EnrichmentError);

    auto count = [](const std::string& s, const std::string& needle) {
        std::size_t n = 0;
        for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
        return n;
    };
    auto one = build_few_shot_prompt(target, {{"Stage IA", std::nullopt, kDC}});
    CHECK(count(one, "label: ") == 1);
    CHECK(one.find("context: Not Available. Use only node text.\nlabel: Disease Condition") != std::string::npos);

    std::vector<Exemplar> many;
    for (int i = 0; i < 23; ++i)
        many.push_back({"exemplar " + std::to_string(i), std::nullopt, kAllCategories[static_cast<std::size_t>(i % 3)]});
    auto prompt = build_few_shot_prompt(target, many);
    CHECK(count(prompt, "label: ") == 23);
    std::size_t last = 0;
    for (int i = 0; i < 23; ++i) {
        auto at = prompt.find("node text: exemplar " + std::to_string(i) + "\n");
        REQUIRE(at != std::string::npos);
        CHECK(at > last);
        last = at;
    }
    auto zero = build_zero_shot_prompt(target);
    auto instruction = zero.substr(0, zero.find('\n'));
    CHECK(prompt.starts_with(instruction));
    CHECK(prompt.ends_with("node text: Operable\ncontext: clinical stage"));
}

TEST_CASE("parse_category_reply") {
    CHECK(parse_category_reply("Disease Condition") == kDC);
    CHECK(parse_category_reply("Label: treatment option.") == kTO);
    CHECK(parse_category_reply("Evaluation of Disease Condition") == kEV);
    CHECK(parse_category_reply("  TREATMENT_OPTION ") == kTO);
    for (auto c : kAllCategories) {
        std::string name(category_display_name(c));
        std::string upper = name, lower = name;
        std::transform(name.begin(), name.end(), upper.begin(), ::toupper);
        std::transform(name.begin(), name.end(), lower.begin(), ::tolower);
        CHECK(parse_category_reply(upper) == c);
        CHECK(parse_category_reply(lower) == c);
    }
    CHECK_THROWS_AS(parse_category_reply("banana"), EnrichmentError);
}

TEST_CASE("LLM classification with scripted clients") {
    auto g = load_graph_file(fixture_path("nscl-mini.json"));
    auto gold = load_gold_labels(read_text(fixture_path("gold-labels.json")));

    ScriptedClient echo;
    for (const auto& n : g.nodes()) echo.script_prompt(build_zero_shot_prompt(n), std::string(category_display_name(*n.category)));
    ClassifyOptions opts;
    opts.mode = ClassificationMode::ZeroShot;
    opts.parallelism = 4;
    auto result = classify_nodes(g, &echo, opts);
    CHECK(result.failure_count() == 0);
    auto report = score_classification(result, gold);
    CHECK(report.accuracy == "100.00");
    CHECK(report.correct == 38);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            if (r != c) CHECK(report.confusion[r][c] == 0);

    ScriptedClient flaky;
    for (const auto& n : g.nodes())
        flaky.script_prompt(build_few_shot_prompt(n, fixture_exemplars()),
                            n.id == "n05" ? "banana" : std::string(category_display_name(*n.category)));
    opts.mode = ClassificationMode::FewShot;
    opts.exemplars = fixture_exemplars();
    auto partial = classify_nodes(g, &flaky, opts);
    CHECK(partial.failure_count() == 1);
    auto failure = std::get_if<ClassificationFailure>(&partial.predictions.at("n05"));
    REQUIRE(failure);
    CHECK(failure->kind == ClassificationFailure::Kind::UnparseableLabel);
    CHECK(std::get<NodeCategory>(partial.predictions.at("n06")) == kTO);
    auto scored = score_classification(partial, gold);
    CHECK(scored.correct == 37);
    CHECK(scored.confusion[3][0] == 1);

    opts.exemplars.clear();
    CHECK_THROWS_AS(classify_nodes(g, &flaky, opts), EnrichmentError);
}

TEST_CASE("client failures are recorded per node") {
    auto g = GuidelineGraph::build("v", {node("a", "A"), node("b", "B")}, {});
    ScriptedClient client;
    client.script_next(CompletionOutcome::reply("Evaluation"));
    client.script_next(CompletionOutcome::failure(FailureKind::Timeout, "slow"));
    ClassifyOptions opts;
    opts.mode = ClassificationMode::ZeroShot;
    auto r = classify_nodes(g, &client, opts);
    CHECK(r.failure_count() == 1);
    CHECK(r.predictions.size() == 2);
}

TEST_CASE("scoring arithmetic") {
    ClassificationResult r{ClassificationMode::Heuristic, {}};
    std::map<std::string, NodeCategory> gold;
    for (int i = 0; i < 10; ++i) {
        auto id = "x" + std::to_string(i);
        gold[id] = kDC;
        r.predictions[id] = i == 0 ? kTO : kDC;
    }
    CHECK(score_classification(r, gold).accuracy == "90.00");
    for (auto& [id, p] : r.predictions) p = kEV;
    auto zero = score_classification(r, gold);
    CHECK(zero.accuracy == "0.00");
    CHECK(zero.correct == 0);
    gold.erase("x3");
    CHECK_THROWS_AS(score_classification(r, gold), EnrichmentError);
}

TEST_CASE("accuracy is invariant under id permutation") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<NodeCategory, NodeCategory>> pairs;
        for (int i = 0; i < 20; ++i)
            pairs.push_back({kAllCategories[rng() % 3], kAllCategories[rng() % 3]});
        auto score = [&](const std::vector<std::pair<NodeCategory, NodeCategory>>& ps) {
            ClassificationResult r{ClassificationMode::Heuristic, {}};
            std::map<std::string, NodeCategory> gold;
            for (std::size_t i = 0; i < ps.size(); ++i) {
                r.predictions["id" + std::to_string(i)] = ps[i].first;
                gold["id" + std::to_string(i)] = ps[i].second;
            }
            return score_classification(r, gold);
        };
        auto a = score(pairs);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        auto b = score(pairs);
        CHECK(a.accuracy == b.accuracy);
        CHECK(a.confusion == b.confusion);
    }
}
