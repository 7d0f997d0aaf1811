// Builds the scripted completion transcript for a QA dataset: every test
// question's text-to-query prompt is keyed to its reply. Each reply is
// classified and checked against the error type it is meant to exhibit.
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cpg/completion.hpp"
#include "cpg/graph.hpp"
#include "cpg/qa.hpp"
#include "cpg/query.hpp"

namespace {

std::string slurp(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string("cannot read ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 5) {
        std::cerr << "usage: make_transcript <graph.json> <qa.json> <replies.json> <out.jsonl>\n";
        return 2;
    }
    try {
        auto graph = cpg::load_graph_file(argv[1]);
        auto dataset = cpg::load_dataset(slurp(argv[2]));
        auto replies = nlohmann::json::parse(slurp(argv[3]));
        auto exemplars = cpg::train_exemplars(dataset);
        auto schema = cpg::schema_summary();

        std::vector<cpg::TranscriptEntry> entries;
        int mismatches = 0;
        for (const auto& q : dataset) {
            if (q.split != cpg::Split::Test) continue;
            const auto& r = replies.at(q.id);
            auto reply = r.at("reply").get<std::string>();
            auto expect = r.at("expect").get<std::string>();
            auto prompt = cpg::build_query_prompt(schema, exemplars, q.text);
            entries.push_back({cpg::prompt_sha256(prompt), reply});

            auto query = cpg::strip_code_fences(reply);
            auto cls = cpg::classify_error(query, graph);
            std::size_t rows = 0;
            if (cls.type == cpg::ErrorType::NoError) rows = cpg::evaluate(cpg::parse_query(query), graph).rows.size();
            bool ok = cpg::to_string(cls.type) == expect && (cls.type != cpg::ErrorType::NoError || rows > 0);
            if (!ok) ++mismatches;
            std::cerr << (ok ? "ok   " : "BAD  ") << q.id << " " << cpg::to_string(cls.type) << " (want " << expect
                      << ", rows " << rows << ") " << cls.detail << "\n";
        }
        std::ofstream out(argv[4], std::ios::binary);
        out << cpg::format_transcript(entries);
        return mismatches == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "make_transcript: " << e.what() << "\n";
        return 1;
    }
}
