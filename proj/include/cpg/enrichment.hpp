#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpg/graph.hpp"

namespace cpg {

class CompletionClient;

enum class EnrichErrc { UnlabeledEndpoint, EmptyExemplarList, UnparseableLabel, MissingGoldLabel, MalformedInput };

std::string_view to_string(EnrichErrc e);

class EnrichmentError : public std::runtime_error {
public:
    EnrichmentError(EnrichErrc code, const std::string& what, std::vector<std::string> node_ids = {});
    EnrichErrc code() const noexcept { return code_; }
    // Offending node ids, for UnlabeledEndpoint.
    const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }

private:
    EnrichErrc code_;
    std::vector<std::string> node_ids_;
};

// ---- relation rule ----

// DiseaseCondition -> TreatmentOption is Requires, Evaluation -> DiseaseCondition
// is Indicates, every other ordered pair IsFollowedBy.
RelationType label_relation(NodeCategory source, NodeCategory destination);

// Throws UnlabeledEndpoint when either side is Unlabeled.
RelationType label_relation(std::optional<NodeCategory> source, std::optional<NodeCategory> destination);

// Relabels every edge by the rule. Parallel edges that end up with the same
// relation are merged. Throws UnlabeledEndpoint listing every unlabeled endpoint.
GuidelineGraph label_all_relations(const GuidelineGraph& graph);

// ---- heuristic categorizer ----

struct Lexicon {
    std::vector<std::string> treatment;
    std::vector<std::string> evaluation;

    static Lexicon defaults();
    static Lexicon from_json(std::string_view text);
};

// Whole-word, case-insensitive lexicon vote over content. A non-zero tie is
// broken by the same vote over the context; anything unresolved, or no hit at
// all, is a DiseaseCondition.
NodeCategory heuristic_categorize(const GuidelineNode& node, const Lexicon& lexicon = Lexicon::defaults());

// ---- prompts ----

struct Exemplar {
    std::string content;
    std::optional<std::string> context;
    NodeCategory label;
};

std::vector<Exemplar> load_exemplars(std::string_view json_text);

inline constexpr std::string_view kMissingContext = "Not Available. Use only node text.";

std::string build_zero_shot_prompt(const GuidelineNode& node);
std::string build_few_shot_prompt(const GuidelineNode& node, const std::vector<Exemplar>& exemplars);

// Earliest-occurring category name wins. Throws UnparseableLabel.
NodeCategory parse_category_reply(std::string_view reply);

// ---- batch classification ----

enum class ClassificationMode { Heuristic, ZeroShot, FewShot };

std::string_view to_string(ClassificationMode m);
std::optional<ClassificationMode> parse_classification_mode(std::string_view s);

struct ClassificationFailure {
    enum class Kind { UnparseableLabel, ClientFailure };
    Kind kind;
    std::string detail;

    friend bool operator==(const ClassificationFailure&, const ClassificationFailure&) = default;
};

using Prediction = std::variant<NodeCategory, ClassificationFailure>;

struct ClassificationResult {
    ClassificationMode mode;
    std::map<std::string, Prediction> predictions;  // keyed by node id

    std::size_t failure_count() const;
};

struct ClassifyOptions {
    ClassificationMode mode = ClassificationMode::Heuristic;
    std::vector<Exemplar> exemplars;  // required for FewShot
    Lexicon lexicon = Lexicon::defaults();
    std::string model = "gpt-3.5-turbo-instruct";
    int max_tokens = 16;
    std::size_t parallelism = 1;
    bool only_unlabeled = false;  // submit only nodes without a category
};

// Heuristic mode ignores the client (may be null). Per-node client failures
// are recorded, never thrown.
ClassificationResult classify_nodes(const GuidelineGraph& graph, CompletionClient* client,
                                    const ClassifyOptions& options);

// Writes successful predictions onto the graph's nodes.
GuidelineGraph apply_classification(const GuidelineGraph& graph, const ClassificationResult& result);

// ---- scoring ----

struct AccuracyReport {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::string accuracy;  // percent, truncated to 2 decimals
    // rows: predicted category (3) + failure row; columns: gold category
    std::array<std::array<std::size_t, 3>, 4> confusion{};
};

std::map<std::string, NodeCategory> load_gold_labels(std::string_view json_text);

AccuracyReport score_classification(const ClassificationResult& predicted,
                                    const std::map<std::string, NodeCategory>& gold);

}  // namespace cpg
