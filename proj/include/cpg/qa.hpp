#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cpg/graph.hpp"
#include "cpg/query.hpp"
#include "cpg/render.hpp"

namespace cpg {

class CompletionClient;

enum class QuestionSet { A, B };
enum class Split { Train, Test };

struct QaQuestion {
    std::string id;
    std::string text;
    QuestionSet set = QuestionSet::A;
    Split split = Split::Test;
    std::optional<std::string> gold_query;  // required for train questions
    std::optional<std::vector<std::string>> expected_literals;
};

std::vector<QaQuestion> load_dataset(std::string_view json_text);

struct QueryExemplar {
    std::string question;
    std::string query;
};

// Train questions with their gold queries, in dataset order.
std::vector<QueryExemplar> train_exemplars(const std::vector<QaQuestion>& dataset);

enum class ErrorType { TypeI, TypeII, TypeIII, NoError };

inline constexpr std::array<ErrorType, 4> kAllErrorTypes{ErrorType::TypeI, ErrorType::TypeII, ErrorType::TypeIII,
                                                        ErrorType::NoError};

std::string_view to_string(ErrorType e);        // "TypeI", ...
std::string_view display_name(ErrorType e);     // "Type-I", ..., "No Error"

class QaError : public std::runtime_error {
public:
    enum class Code { EmptyExemplarList, ClientFailure, MalformedDataset };
    QaError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct QaOptions {
    int hop_cap = kDefaultHopCap;
    std::size_t row_cap = kDefaultRowCap;
    std::string model = "gpt-3.5-turbo-instruct";
    int max_tokens = 512;
    std::size_t parallelism = 1;
};

// Labels, relation names and properties of the guideline graph.
std::string schema_summary();

std::string build_query_prompt(std::string_view schema, const std::vector<QueryExemplar>& exemplars,
                               std::string_view question);

// Raw completion with surrounding whitespace and code fences removed.
std::string strip_code_fences(std::string_view text);

// Throws QaError(ClientFailure).
std::string generate_query(std::string_view prompt, CompletionClient& client, const QaOptions& options = {});

struct ErrorClassification {
    ErrorType type = ErrorType::NoError;
    std::string detail;                       // parse error text, unmatched needles, ...
    std::vector<std::string> unmatched_needles;
};

// TypeI: does not parse. TypeII: a CONTAINS needle matches no node's property.
// TypeIII: empty result that becomes non-empty once every variable-length
// upper bound is raised to the hop cap. Otherwise NoError.
ErrorClassification classify_error(std::string_view query, const GuidelineGraph& graph, const QaOptions& options = {});

struct AskResult {
    std::string query;
    std::optional<ErrorType> error;
    std::string error_detail;
    std::vector<RenderedAnswer> answers;
};

AskResult ask(std::string_view question, const GuidelineGraph& graph, CompletionClient& client,
              const std::vector<QueryExemplar>& exemplars, const QaOptions& options = {});

struct QuestionOutcome {
    std::string id;
    QuestionSet set;
    std::string query;
    ErrorType type;
    std::string note;
};

struct SetCounts {
    std::array<std::size_t, 4> count{};  // indexed by ErrorType
    std::size_t total = 0;
};

struct EvalReport {
    SetCounts set_a;
    SetCounts set_b;
    std::vector<QuestionOutcome> outcomes;  // test questions in dataset order

    std::string set_percent(QuestionSet s, ErrorType e) const;
    std::string overall_percent(ErrorType e) const;
};

// Aggregates already-classified outcomes.
EvalReport aggregate(std::vector<QuestionOutcome> outcomes);

EvalReport run_eval(const std::vector<QaQuestion>& dataset, const GuidelineGraph& graph, CompletionClient& client,
                    const QaOptions& options = {});

// Aligned plain-text table: error type, set A, set B, overall.
std::string format_eval_table(const EvalReport& report);

}  // namespace cpg
