#include "cpg/enrichment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <set>
#include <thread>

#include <json.hpp>

#include "cpg/completion.hpp"
#include "cpg/percent.hpp"

namespace cpg {

std::string_view to_string(EnrichErrc e) {
    switch (e) {
        case EnrichErrc::UnlabeledEndpoint: return "UnlabeledEndpoint";
        case EnrichErrc::EmptyExemplarList: return "EmptyExemplarList";
        case EnrichErrc::UnparseableLabel: return "UnparseableLabel";
        case EnrichErrc::MissingGoldLabel: return "MissingGoldLabel";
        case EnrichErrc::MalformedInput: return "MalformedInput";
    }
    return "?";
}

EnrichmentError::EnrichmentError(EnrichErrc code, const std::string& what, std::vector<std::string> node_ids)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), node_ids_(std::move(node_ids)) {}

// ---------------------------------------------------------------------------
// Relation rule

RelationType label_relation(NodeCategory source, NodeCategory destination) {
    if (source == NodeCategory::DiseaseCondition && destination == NodeCategory::TreatmentOption)
        return RelationType::Requires;
    if (source == NodeCategory::Evaluation && destination == NodeCategory::DiseaseCondition)
        return RelationType::Indicates;
    return RelationType::IsFollowedBy;
}

RelationType label_relation(std::optional<NodeCategory> source, std::optional<NodeCategory> destination) {
    if (!source || !destination)
        throw EnrichmentError(EnrichErrc::UnlabeledEndpoint, "relation endpoints must both be categorized");
    return label_relation(*source, *destination);
}

GuidelineGraph label_all_relations(const GuidelineGraph& graph) {
    std::set<std::string> unlabeled;
    for (const auto& e : graph.edges()) {
        for (const auto* id : {&e.source, &e.target})
            if (!graph.node(*id).category) unlabeled.insert(*id);
    }
    if (!unlabeled.empty()) {
        std::vector<std::string> ids(unlabeled.begin(), unlabeled.end());
        std::string list;
        for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
        throw EnrichmentError(EnrichErrc::UnlabeledEndpoint, "unlabeled nodes: " + list, std::move(ids));
    }

    std::vector<GuidelineEdge> edges;
    edges.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) {
        GuidelineEdge relabeled = e;
        relabeled.relation = label_relation(*graph.node(e.source).category, *graph.node(e.target).category);
        if (std::find(edges.begin(), edges.end(), relabeled) == edges.end()) edges.push_back(std::move(relabeled));
    }
    return GuidelineGraph::build(graph.version(), graph.nodes(), std::move(edges));
}

// ---------------------------------------------------------------------------
// Heuristic categorizer

namespace {

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Number of whole-word occurrences of any lexicon entry (entries may span words).
std::size_t lexicon_hits(const std::vector<std::string>& text, const std::vector<std::string>& lexicon) {
    std::size_t hits = 0;
    for (const auto& entry : lexicon) {
        auto needle = words(entry);
        if (needle.empty() || needle.size() > text.size()) continue;
        for (std::size_t i = 0; i + needle.size() <= text.size(); ++i)
            if (std::equal(needle.begin(), needle.end(), text.begin() + static_cast<std::ptrdiff_t>(i))) ++hits;
    }
    return hits;
}

}  // namespace

Lexicon Lexicon::defaults() {
    return Lexicon{{"therapy", "chemoradiation", "resection", "RT", "surgery", "treatment"},
                   {"scan", "MRI", "biopsy", "testing", "evaluation", "PET", "PFTs"}};
}

Lexicon Lexicon::from_json(std::string_view text) {
    auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw EnrichmentError(EnrichErrc::MalformedInput, "lexicon is not a JSON object");
    Lexicon lex;
    try {
        lex.treatment = j.at("treatment").get<std::vector<std::string>>();
        lex.evaluation = j.at("evaluation").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw EnrichmentError(EnrichErrc::MalformedInput, std::string("lexicon: ") + e.what());
    }
    return lex;
}

NodeCategory heuristic_categorize(const GuidelineNode& node, const Lexicon& lexicon) {
    auto content = words(node.content);
    std::size_t treat = lexicon_hits(content, lexicon.treatment);
    std::size_t eval = lexicon_hits(content, lexicon.evaluation);
    if (treat == 0 && eval == 0) return NodeCategory::DiseaseCondition;
    if (treat == eval && node.context) {
        auto context = words(*node.context);
        treat += lexicon_hits(context, lexicon.treatment);
        eval += lexicon_hits(context, lexicon.evaluation);
    }
    if (treat > eval) return NodeCategory::TreatmentOption;
    if (eval > treat) return NodeCategory::Evaluation;
    return NodeCategory::DiseaseCondition;
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

constexpr std::string_view kInstruction =
    "You are an expert oncologist, and you are interpreting an NCCN Non-small cell lung cancer guideline. "
    "You have decided to categorise the content in each node of the NCCN CPG graph as either: Disease "
    "Condition, Treatment Option, or Evaluation. Given the following node text from the guideline please "
    "assign the most appropriate label among the ones mentioned. You may use the context whenever there "
    "is a discrepancy between two labels but give major importance to the node text.";

std::string node_lines(std::string_view content, const std::optional<std::string>& context) {
    std::string out = "node text: ";
    out += content;
    out += "\ncontext: ";
    out += context ? std::string_view(*context) : kMissingContext;
    return out;
}

}  // namespace

std::vector<Exemplar> load_exemplars(std::string_view json_text) {
    auto j = nlohmann::json::parse(json_text.begin(), json_text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw EnrichmentError(EnrichErrc::MalformedInput, "exemplars must be a JSON array");
    std::vector<Exemplar> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        std::string where = "exemplars[" + std::to_string(i) + "]";
        try {
            Exemplar ex;
            ex.content = e.at("content").get<std::string>();
            if (auto c = e.find("context"); c != e.end() && !c->is_null()) ex.context = c->get<std::string>();
            auto label = parse_category_token(e.at("label").get<std::string>());
            if (!label) throw EnrichmentError(EnrichErrc::MalformedInput, where + ": unknown label");
            if (ex.content.find_first_not_of(" \t\r\n") == std::string::npos)
                throw EnrichmentError(EnrichErrc::MalformedInput, where + ": empty content");
            ex.label = *label;
            out.push_back(std::move(ex));
        } catch (const nlohmann::json::exception& err) {
            throw EnrichmentError(EnrichErrc::MalformedInput, where + ": " + err.what());
        }
    }
    return out;
}

std::string build_zero_shot_prompt(const GuidelineNode& node) {
    std::string out(kInstruction);
    out += '\n';
    out += node_lines(node.content, node.context);
    return out;
}

std::string build_few_shot_prompt(const GuidelineNode& node, const std::vector<Exemplar>& exemplars) {
    if (exemplars.empty()) throw EnrichmentError(EnrichErrc::EmptyExemplarList, "few-shot prompt needs at least one exemplar");
    std::string out(kInstruction);
    out += "\nHere are some examples:\n";
    for (const auto& ex : exemplars) {
        out += node_lines(ex.content, ex.context);
        out += "\nlabel: ";
        out += category_display_name(ex.label);
        out += "\n\n";
    }
    out += node_lines(node.content, node.context);
    return out;
}

NodeCategory parse_category_reply(std::string_view reply) {
    // Fold case, treat '_' and '-' as spaces and collapse whitespace runs.
    std::string norm;
    for (char ch : reply) {
        auto c = static_cast<unsigned char>(ch);
        char out = (c == '_' || c == '-' || std::isspace(c)) ? ' ' : static_cast<char>(std::tolower(c));
        if (out == ' ' && (norm.empty() || norm.back() == ' ')) continue;
        norm.push_back(out);
    }

    struct Name {
        std::string_view text;
        NodeCategory category;
    };
    static constexpr Name kNames[] = {
        {"disease condition", NodeCategory::DiseaseCondition}, {"diseasecondition", NodeCategory::DiseaseCondition},
        {"treatment option", NodeCategory::TreatmentOption},   {"treatmentoption", NodeCategory::TreatmentOption},
        {"evaluation", NodeCategory::Evaluation},
    };
    std::optional<NodeCategory> best;
    std::size_t best_pos = std::string::npos;
    for (const auto& name : kNames) {
        auto pos = norm.find(name.text);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = name.category;
        }
    }
    if (!best) throw EnrichmentError(EnrichErrc::UnparseableLabel, "no category name in reply '" + std::string(reply) + "'");
    return *best;
}

// ---------------------------------------------------------------------------
// Batch classification

std::string_view to_string(ClassificationMode m) {
    switch (m) {
        case ClassificationMode::Heuristic: return "heuristic";
        case ClassificationMode::ZeroShot: return "zero-shot";
        case ClassificationMode::FewShot: return "few-shot";
    }
    return "?";
}

std::optional<ClassificationMode> parse_classification_mode(std::string_view s) {
    for (auto m : {ClassificationMode::Heuristic, ClassificationMode::ZeroShot, ClassificationMode::FewShot})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::size_t ClassificationResult::failure_count() const {
    return static_cast<std::size_t>(std::count_if(predictions.begin(), predictions.end(), [](const auto& kv) {
        return std::holds_alternative<ClassificationFailure>(kv.second);
    }));
}

ClassificationResult classify_nodes(const GuidelineGraph& graph, CompletionClient* client, const ClassifyOptions& options) {
    if (options.mode == ClassificationMode::FewShot && options.exemplars.empty())
        throw EnrichmentError(EnrichErrc::EmptyExemplarList, "few-shot mode requires exemplars");
    if (options.mode != ClassificationMode::Heuristic && client == nullptr)
        throw std::invalid_argument("LLM classification requires a completion client");

    std::vector<const GuidelineNode*> nodes;
    for (const auto& n : graph.nodes())
        if (!options.only_unlabeled || !n.category) nodes.push_back(&n);
    std::vector<Prediction> slots(nodes.size(), ClassificationFailure{ClassificationFailure::Kind::ClientFailure, "not run"});

    auto classify_one = [&](std::size_t i) -> Prediction {
        const auto& node = *nodes[i];
        if (options.mode == ClassificationMode::Heuristic) return heuristic_categorize(node, options.lexicon);
        CompletionRequest req;
        req.prompt = options.mode == ClassificationMode::ZeroShot ? build_zero_shot_prompt(node)
                                                                  : build_few_shot_prompt(node, options.exemplars);
        req.model = options.model;
        req.max_tokens = options.max_tokens;
        req.temperature = 0.0;
        auto outcome = client->complete(req);
        if (!outcome.ok())
            return ClassificationFailure{ClassificationFailure::Kind::ClientFailure,
                                         std::string(to_string(outcome.error().kind)) + ": " + outcome.error().message};
        try {
            return parse_category_reply(outcome.text());
        } catch (const EnrichmentError&) {
            return ClassificationFailure{ClassificationFailure::Kind::UnparseableLabel, outcome.text()};
        }
    };

    std::size_t workers = options.mode == ClassificationMode::Heuristic
                              ? 1
                              : std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(1, nodes.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < nodes.size(); ++i) slots[i] = classify_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < nodes.size();) slots[i] = classify_one(i);
            });
    }

    ClassificationResult result{options.mode, {}};
    for (std::size_t i = 0; i < nodes.size(); ++i) result.predictions.emplace(nodes[i]->id, std::move(slots[i]));
    return result;
}

GuidelineGraph apply_classification(const GuidelineGraph& graph, const ClassificationResult& result) {
    std::unordered_map<std::string, NodeCategory> cats;
    for (const auto& [id, p] : result.predictions)
        if (const auto* c = std::get_if<NodeCategory>(&p)) cats.emplace(id, *c);
    return graph.with_categories(cats);
}

// ---------------------------------------------------------------------------
// Scoring

std::map<std::string, NodeCategory> load_gold_labels(std::string_view json_text) {
    auto j = nlohmann::json::parse(json_text.begin(), json_text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw EnrichmentError(EnrichErrc::MalformedInput, "gold labels must be a JSON object");
    std::map<std::string, NodeCategory> out;
    for (const auto& [id, v] : j.items()) {
        auto c = v.is_string() ? parse_category_token(v.get<std::string>()) : std::nullopt;
        if (!c) throw EnrichmentError(EnrichErrc::MalformedInput, "gold label for '" + id + "' is not a category");
        out.emplace(id, *c);
    }
    return out;
}

AccuracyReport score_classification(const ClassificationResult& predicted, const std::map<std::string, NodeCategory>& gold) {
    AccuracyReport r;
    for (const auto& [id, p] : predicted.predictions) {
        auto g = gold.find(id);
        if (g == gold.end()) throw EnrichmentError(EnrichErrc::MissingGoldLabel, "no gold label for '" + id + "'", {id});
        auto col = static_cast<std::size_t>(g->second);
        ++r.total;
        if (const auto* c = std::get_if<NodeCategory>(&p)) {
            ++r.confusion[static_cast<std::size_t>(*c)][col];
            if (*c == g->second) ++r.correct;
        } else {
            ++r.confusion[3][col];
        }
    }
    r.accuracy = truncate2_percent(r.correct, r.total);
    return r;
}

}  // namespace cpg
