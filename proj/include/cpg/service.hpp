#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cpg/enrichment.hpp"
#include "cpg/graph.hpp"
#include "cpg/qa.hpp"

namespace httplib {
class Server;
}

namespace cpg {

class CompletionClient;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string graph_path;
    int hop_cap = kDefaultHopCap;
    std::size_t row_cap = kDefaultRowCap;
    std::size_t parallelism = 4;
    ClassificationMode enrich_mode = ClassificationMode::Heuristic;
    std::vector<Exemplar> classify_exemplars;  // few-shot classification
    std::vector<QueryExemplar> query_exemplars;  // /ask prompt
    std::shared_ptr<CompletionClient> client;    // may be null: /ask and LLM modes then answer 502

    // "host:port" as in CPG_LISTEN_ADDR.
    void set_listen_address(const std::string& addr);
    // Throws std::invalid_argument on non-positive caps.
    void validate() const;
};

// HTTP front end over an immutable graph snapshot. /enrich builds a new
// snapshot and swaps it in; in-flight readers keep the one they started with.
class GuidelineService {
public:
    explicit GuidelineService(ServiceConfig config);  // loads config.graph_path
    GuidelineService(ServiceConfig config, GuidelineGraph graph);
    ~GuidelineService();

    GuidelineService(const GuidelineService&) = delete;
    GuidelineService& operator=(const GuidelineService&) = delete;

    std::shared_ptr<const GuidelineGraph> snapshot() const;

    // Categorizes unlabeled nodes with the configured mode, relabels every
    // relation and publishes the result. Serialized against other enrichments.
    std::shared_ptr<const GuidelineGraph> enrich(std::optional<ClassificationMode> mode = std::nullopt);

    // Blocking.
    bool listen();
    // Binds an ephemeral port on host and returns it; serve with listen_after_bind().
    int bind_any_port();
    bool listen_after_bind();
    void stop();

    QaOptions qa_options() const;

private:
    void install_routes();

    ServiceConfig config_;
    mutable std::mutex snapshot_mu_;
    std::shared_ptr<const GuidelineGraph> snapshot_;
    std::mutex enrich_mu_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace cpg
