#include <doctest.h>

#include <json.hpp>
#include <random>

#include "cpg/completion.hpp"
#include "cpg/percent.hpp"
#include "cpg/qa.hpp"
#include "fixtures.hpp"

using namespace cpg;
using testing_support::fixture_path;
using testing_support::read_text;
using testing_support::source_path;

namespace {

GuidelineGraph fixture() { return load_graph_file(fixture_path("nscl-mini.json")); }

std::vector<QaQuestion> dataset() { return load_dataset(read_text(fixture_path("qa.json"))); }

const char* kSetAAnswer =
    "If the current disease condition is \"Stage IB, peripheral (T2a, N0); Stage I, central (T1abc-T2a, N0); Stage "
    "II (T1abc-T2ab, N1; T2b, N0); Stage IIB (T3, N0); Stage IIIA (T3, N1)\" further check if the disease condition "
    "is \"Stage IB (peripheral T2a, N0) Stage I (central T1abc-T2a, N0) Stage II (T1abc-T2ab, N1; T2b, N0) Stage IIB "
    "(T3, N0) Stage IIIA (T3, N1)\". If that disease condition has occurred, then evaluate the patient for \"Evaluate "
    "for perioperative therapy , PFTs (if not previously done) , Bronchoscopy, Pathologic mediastinal lymph node "
    "evaluation , FDG-PET/CT scan (if not previously done) , Brain MRI with contrast (Stage II, IIIA) (Stage IB "
    "[optional])\". Based on the evaluation, check if it indicates the disease condition \"No nodal disease\". If "
    "that disease condition has occurred, further check if the disease condition is \"Operable\". If that disease "
    "condition has occurred, use the treatment \"Surgical exploration and resection + mediastinal lymph node "
    "dissection or systematic lymph node sampling after preoperative systemic therapy, if planned\".";

}  // namespace

TEST_CASE("dataset shape") {
    auto ds = dataset();
    int a = 0, b = 0, a_train = 0, b_train = 0;
    for (const auto& q : ds) {
        (q.set == QuestionSet::A ? a : b)++;
        if (q.split == Split::Train) (q.set == QuestionSet::A ? a_train : b_train)++;
    }
    CHECK(a == 26);
    CHECK(b == 46);
    CHECK(a_train == 3);
    CHECK(b_train == 10);
    CHECK(train_exemplars(ds).size() == 13);
    CHECK_THROWS_AS(load_dataset(R"([{"id":"q","text":"t","set":"A","split":"train","goldQuery":null}])"), QaError);
    CHECK_THROWS_AS(load_dataset(R"([{"id":"q","text":"t","set":"C","split":"test"}])"), QaError);
}

TEST_CASE("query prompt") {
    std::vector<QueryExemplar> one{{"What is the treatment pathway for a superior sulcus tumor?",
                                    "MATCH (n:Disease_Condition)\nWHERE toLower(n.content) CONTAINS \"superior sulcus\"\n"
                                    "WITH n\nMATCH path=(n)-[*1..5]->(t:Treatment_Option)\nRETURN path, nodes(path);"}};
    auto prompt = build_query_prompt(schema_summary(), one,
                                     "What is the treatment pathway for Stage I, central (T1abc-T2a, N0)?");
    CHECK(prompt == read_text(source_path("tests/golden/query-prompt-one-exemplar.txt")));
    CHECK(prompt == build_query_prompt(schema_summary(), one,
                                       "What is the treatment pathway for Stage I, central (T1abc-T2a, N0)?"));
    CHECK_THROWS_AS(build_query_prompt(schema_summary(), {}, "q"), QaError);

    auto ex = train_exemplars(dataset());
    auto full = build_query_prompt(schema_summary(), ex, "q?");
    std::size_t pairs = 0;
    for (auto p = full.find("Question: "); p != std::string::npos; p = full.find("Question: ", p + 1)) ++pairs;
    CHECK(pairs == 14);
    for (auto label : {"Disease_Condition", "Treatment_Option", "Evaluation", "requires", "indicates", "isFollowedBy",
                       "content", "context"})
        CHECK(full.find(label) != std::string::npos);
}

TEST_CASE("generate_query") {
    auto generated = read_text(fixture_path("queries/set-a-generated.cql"));
    ScriptedClient mock;
    mock.script_next(CompletionOutcome::reply(generated));
    CHECK(generate_query("prompt", mock) == generated.substr(0, generated.size() - 1));
    mock.script_next(CompletionOutcome::reply("```cypher\nMATCH (n) RETURN n\n```\n"));
    CHECK(generate_query("prompt", mock) == "MATCH (n) RETURN n");
    mock.script_next(CompletionOutcome::failure(FailureKind::Timeout, "timed out"));
    try {
        generate_query("prompt", mock);
        FAIL("expected ClientFailure");
    } catch (const QaError& e) {
        CHECK(e.code() == QaError::Code::ClientFailure);
    }
}

TEST_CASE("error taxonomy detectors") {
    auto g = fixture();
    CHECK(classify_error("MATCH (n RETURN n", g).type == ErrorType::TypeI);

    auto type2 = classify_error(
        "MATCH (n:Disease_Condition) WHERE toLower(n.content) CONTAINS \"resectable superior sulcus\" WITH n "
        "MATCH path=(n)-[*1..5]->(t:Treatment_Option) RETURN path, nodes(path);",
        g);
    CHECK(type2.type == ErrorType::TypeII);
    CHECK(type2.unmatched_needles == std::vector<std::string>{"resectable superior sulcus"});
    CHECK(g.node("n32").content == "Superior sulcus");
    CHECK(g.node("n33").content == "Resectable");

    auto bounded = [](int hi) {
        return "MATCH (n:Disease_Condition) WHERE toLower(n.content) CONTAINS \"stage i, central\" AND "
               "toLower(n.context) CONTAINS \"clinical stage\" WITH n MATCH path=(n)-[*1.." +
               std::to_string(hi) + "]->(t:Treatment_Option) WHERE toLower(t.content) CONTAINS \"surgical exploration\" "
                                    "RETURN path";
    };
    CHECK(evaluate(parse_query(bounded(4)), g).empty());
    CHECK_FALSE(evaluate(parse_query(bounded(7)), g).empty());
    CHECK(classify_error(bounded(4), g).type == ErrorType::TypeIII);
    CHECK(classify_error(bounded(7), g).type == ErrorType::NoError);

    // empty even at the cap: not a length error
    CHECK(classify_error("MATCH p=(n:Treatment_Option)-[*1..2]->(m:Disease_Condition) WHERE toLower(m.content) "
                         "CONTAINS 'stage iiib' RETURN p",
                         g)
              .type == ErrorType::NoError);
    // priority: unparseable beats everything
    CHECK(classify_error("MATCH (n) WHERE n.content CONTAINS 'zzz' RETURN", g).type == ErrorType::TypeI);
}

TEST_CASE("TypeIII monotonicity on the fixture") {
    auto g = fixture();
    std::mt19937 rng(4);
    const char* starts[] = {"stage iiib", "no nodal", "superior sulcus", "operable", "recurrence"};
    for (int i = 0; i < 60; ++i) {
        int lo = static_cast<int>(rng() % 3) + 1, hi = lo + static_cast<int>(rng() % 3);
        auto q = [&](int h) {
            return std::string("MATCH p=(n:Disease_Condition)-[*") + std::to_string(lo) + ".." + std::to_string(h) +
                   "]->(t:Treatment_Option) WHERE toLower(n.content) CONTAINS '" + starts[rng() % 5] + "' RETURN p";
        };
        auto base = q(hi);
        auto bigger = base;
        bigger.replace(bigger.find(".." + std::to_string(hi)), 2 + std::to_string(hi).size(), ".." + std::to_string(hi + 2));
        if (!evaluate(parse_query(base), g).empty()) CHECK_FALSE(evaluate(parse_query(bigger), g).empty());
    }
}

TEST_CASE("ask") {
    auto g = fixture();
    auto ex = train_exemplars(dataset());
    std::string question = "What is the treatment pathway for Stage I, central (T1abc-T2a, N0)?";
    ScriptedClient mock;
    mock.script_prompt(build_query_prompt(schema_summary(), ex, question),
                       read_text(fixture_path("queries/set-a-handwritten.cql")));
    auto r = ask(question, g, mock, ex);
    CHECK_FALSE(r.error.has_value());
    REQUIRE_FALSE(r.answers.empty());
    CHECK(normalize_answer(r.answers[0].text()) == normalize_answer(kSetAAnswer));
    CHECK(r.query.starts_with("match (n:Disease_Condition)"));

    ScriptedClient gibberish;
    gibberish.script_next(CompletionOutcome::reply("I am not sure what you mean."));
    auto bad = ask(question, g, gibberish, ex);
    CHECK(bad.error == ErrorType::TypeI);
    CHECK(bad.answers.empty());
    CHECK(bad.query == "I am not sure what you mean.");

    // a needle guaranteed absent: longer than any content in the corpus
    std::string needle = "absent";
    for (const auto& n : g.nodes())
        while (n.content.find(needle) != std::string::npos || needle.size() <= n.content.size()) needle += "x";
    ScriptedClient miss;
    miss.script_next(CompletionOutcome::reply("MATCH p=(n)-[]->(m) WHERE n.content CONTAINS '" + needle + "' RETURN p"));
    auto missing = ask(question, g, miss, ex);
    CHECK(missing.error == ErrorType::TypeII);
    CHECK(missing.answers.empty());

    ScriptedClient down;
    down.script_next(CompletionOutcome::failure(FailureKind::Transport, "refused"));
    CHECK_THROWS_AS(ask(question, g, down, ex), QaError);
}

TEST_CASE("every answer sentence instantiates a template with graph content") {
    auto g = fixture();
    auto ds = dataset();
    for (const auto& q : ds) {
        auto rs = evaluate(parse_query(*q.gold_query), g);
        if (rs.empty()) continue;
        for (const auto& a : render_subgraph(g, rs)) {
            REQUIRE(a.sentences.size() + 1 == a.node_ids.size());
            for (std::size_t i = 0; i < a.sentences.size(); ++i)
                CHECK(a.sentences[i].find("\"" + g.node(a.node_ids[i + 1]).content + "\"") != std::string::npos);
        }
    }
}

TEST_CASE("scripted evaluation reproduces the error table") {
    auto g = fixture();
    ScriptedClient mock(load_transcript_file(fixture_path("qa-transcript.jsonl")));
    QaOptions opts;
    opts.parallelism = 4;
    auto report = run_eval(dataset(), g, mock, opts);
    CHECK(report.set_a.total == 23);
    CHECK(report.set_b.total == 36);
    CHECK(report.set_a.count == std::array<std::size_t, 4>{1, 3, 2, 17});
    CHECK(report.set_b.count == std::array<std::size_t, 4>{3, 8, 3, 22});
    CHECK(report.set_percent(QuestionSet::A, ErrorType::TypeI) == "4.34");
    CHECK(report.set_percent(QuestionSet::A, ErrorType::TypeII) == "13.04");
    CHECK(report.set_percent(QuestionSet::A, ErrorType::TypeIII) == "8.69");
    CHECK(report.set_percent(QuestionSet::A, ErrorType::NoError) == "73.91");
    CHECK(report.set_percent(QuestionSet::B, ErrorType::TypeII) == "22.22");
    CHECK(report.set_percent(QuestionSet::B, ErrorType::NoError) == "61.11");
    CHECK(report.overall_percent(ErrorType::TypeI) == "6.77");
    CHECK(report.overall_percent(ErrorType::TypeII) == "18.64");
    CHECK(report.overall_percent(ErrorType::TypeIII) == "8.47");
    CHECK(report.overall_percent(ErrorType::NoError) == "66.10");

    // each question's type is the one its scripted reply was built to show
    auto replies = nlohmann::json::parse(read_text(fixture_path("qa-replies.json")));
    for (const auto& o : report.outcomes)
        CHECK_MESSAGE(std::string(to_string(o.type)) == replies[o.id]["expect"].get<std::string>(), o.id);

    auto table = format_eval_table(report);
    CHECK(table.find("1 (4.34%)") != std::string::npos);
    CHECK(table.find("8 (22.22%)") != std::string::npos);
    CHECK(table.find("66.10") != std::string::npos);
}

TEST_CASE("client failures during evaluation become annotated TypeI") {
    auto g = fixture();
    auto ds = dataset();
    ScriptedClient dead;
    auto report = run_eval(ds, g, dead);
    CHECK(report.set_a.count[0] == 23);
    CHECK(report.outcomes.front().note.starts_with("client failure"));
}

TEST_CASE("all-correct scripted run") {
    std::vector<QaQuestion> ds;
    std::string good = "MATCH p=(n:Disease_Condition)-[]->(t:Treatment_Option) RETURN p";
    ds.push_back({"t0", "train question", QuestionSet::A, Split::Train, good, std::nullopt});
    for (int i = 0; i < 10; ++i)
        ds.push_back({"q" + std::to_string(i), "question " + std::to_string(i), QuestionSet::A, Split::Test, std::nullopt,
                      std::nullopt});
    ScriptedClient mock;
    for (int i = 0; i < 10; ++i) mock.script_next(CompletionOutcome::reply(good));
    auto r = run_eval(ds, fixture(), mock);
    CHECK(r.set_percent(QuestionSet::A, ErrorType::NoError) == "100.00");
    CHECK(r.set_percent(QuestionSet::A, ErrorType::TypeI) == "0.00");
    CHECK(r.overall_percent(ErrorType::NoError) == "100.00");
    CHECK(r.set_percent(QuestionSet::B, ErrorType::NoError) == "0.00");
}

TEST_CASE("report arithmetic fuzz") {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<QuestionOutcome> outcomes;
        std::array<std::array<std::size_t, 4>, 2> counts{};
        int n = static_cast<int>(rng() % 80) + 1;
        for (int i = 0; i < n; ++i) {
            auto set = rng() % 2 ? QuestionSet::A : QuestionSet::B;
            auto type = kAllErrorTypes[rng() % 4];
            ++counts[set == QuestionSet::A ? 0 : 1][static_cast<std::size_t>(type)];
            outcomes.push_back({"q" + std::to_string(i), set, "", type, ""});
        }
        std::shuffle(outcomes.begin(), outcomes.end(), rng);
        auto r = aggregate(outcomes);
        std::size_t ta = 0, tb = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            ta += r.set_a.count[k];
            tb += r.set_b.count[k];
            CHECK(r.set_a.count[k] == counts[0][k]);
        }
        CHECK(ta == r.set_a.total);
        CHECK(tb == r.set_b.total);
        for (auto e : kAllErrorTypes) {
            auto k = static_cast<std::size_t>(e);
            auto part = counts[0][k] + counts[1][k];
            auto whole = r.set_a.total + r.set_b.total;
            // independent recomputation in integer arithmetic
            auto bp = part * 10000 / whole;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%zu.%02zu", bp / 100, bp % 100);
            CHECK(r.overall_percent(e) == buf);
        }
    }
}

TEST_CASE("truncation") {
    CHECK(truncate2_percent(1, 23) == "4.34");
    CHECK(truncate2_percent(4, 59) == "6.77");
    CHECK(truncate2_percent(2, 3) == "66.66");
    CHECK(truncate2_percent(0, 0) == "0.00");
    CHECK(truncate2_percent(5, 5) == "100.00");
}
