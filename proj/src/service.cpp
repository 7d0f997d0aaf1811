#include "cpg/service.hpp"

#include <stdexcept>

#include <httplib.h>

#include "cpg/api.hpp"
#include "cpg/completion.hpp"

namespace cpg {

void ServiceConfig::set_listen_address(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("listen address must be host:port");
    host = addr.substr(0, colon);
    port = std::stoi(addr.substr(colon + 1));
}

void ServiceConfig::validate() const {
    if (hop_cap <= 0) throw std::invalid_argument("hop cap must be positive");
    if (row_cap == 0) throw std::invalid_argument("row cap must be positive");
    if (parallelism == 0) throw std::invalid_argument("parallelism must be positive");
}

namespace {

using api::Json;

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(api::serialize(body), "application/json");
}

std::optional<Json> parse_body(const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::ordered_json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        reply(res, 400, api::error_payload("MalformedBody", "request body must be a JSON object"));
        return std::nullopt;
    }
    return body;
}

std::optional<std::string> string_field(const Json& body, const char* key, httplib::Response& res) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        reply(res, 400, api::error_payload("MalformedBody", std::string("missing string field '") + key + "'"));
        return std::nullopt;
    }
    return it->get<std::string>();
}

}  // namespace

GuidelineService::GuidelineService(ServiceConfig config)
    : GuidelineService(config, load_graph_file(config.graph_path)) {}

GuidelineService::GuidelineService(ServiceConfig config, GuidelineGraph graph)
    : config_(std::move(config)),
      snapshot_(std::make_shared<const GuidelineGraph>(std::move(graph))),
      server_(std::make_unique<httplib::Server>()) {
    config_.validate();
    server_->new_task_queue = [n = config_.parallelism] { return new httplib::ThreadPool(std::max<std::size_t>(n, 2)); };
    install_routes();
}

GuidelineService::~GuidelineService() { stop(); }

std::shared_ptr<const GuidelineGraph> GuidelineService::snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return snapshot_;
}

QaOptions GuidelineService::qa_options() const {
    QaOptions o;
    o.hop_cap = config_.hop_cap;
    o.row_cap = config_.row_cap;
    o.parallelism = config_.parallelism;
    return o;
}

std::shared_ptr<const GuidelineGraph> GuidelineService::enrich(std::optional<ClassificationMode> mode) {
    std::lock_guard serial(enrich_mu_);
    auto current = snapshot();
    ClassifyOptions opts;
    opts.mode = mode.value_or(config_.enrich_mode);
    opts.exemplars = config_.classify_exemplars;
    opts.parallelism = config_.parallelism;
    opts.only_unlabeled = true;
    auto result = classify_nodes(*current, config_.client.get(), opts);
    if (result.failure_count() > 0) {
        for (const auto& [id, p] : result.predictions)
            if (const auto* f = std::get_if<ClassificationFailure>(&p))
                throw std::runtime_error("classification of '" + id + "' failed: " + f->detail);
    }
    auto next = std::make_shared<const GuidelineGraph>(label_all_relations(apply_classification(*current, result)));
    std::lock_guard lock(snapshot_mu_);
    snapshot_ = next;
    return next;
}

void GuidelineService::install_routes() {
    auto& srv = *server_;

    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        Json j;
        j["status"] = "ok";
        reply(res, 200, j);
    });

    srv.Get("/graph/stats", [this](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, api::validate_payload(*snapshot()));
    });

    srv.Get(R"(/node/([^/]+)/neighbors)", [this](const httplib::Request& req, httplib::Response& res) {
        auto g = snapshot();
        auto dir_param = req.has_param("direction") ? req.get_param_value("direction") : std::string("out");
        if (dir_param != "out" && dir_param != "in") {
            reply(res, 400, api::error_payload("MalformedRequest", "direction must be 'out' or 'in'"));
            return;
        }
        auto id = req.matches[1].str();
        if (!g->find(id)) {
            reply(res, 404, api::error_payload("UnknownNode", "no node with id '" + id + "'"));
            return;
        }
        reply(res, 200, api::neighbors_payload(*g, id, dir_param == "out" ? Direction::Outgoing : Direction::Incoming));
    });

    srv.Get(R"(/node/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto g = snapshot();
        auto id = req.matches[1].str();
        const auto* n = g->find(id);
        if (!n) {
            reply(res, 404, api::error_payload("UnknownNode", "no node with id '" + id + "'"));
            return;
        }
        reply(res, 200, api::node_payload(*n));
    });

    srv.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        auto cql = string_field(*body, "cql", res);
        if (!cql) return;
        auto g = snapshot();
        try {
            reply(res, 200, api::query_payload(*g, *cql, qa_options()));
        } catch (const QueryError& e) {
            reply(res, 422, api::query_error_payload(e));
        }
    });

    srv.Post("/ask", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        auto question = string_field(*body, "question", res);
        if (!question) return;
        if (!config_.client) {
            reply(res, 502, api::error_payload("ClientFailure", "no completion client configured"));
            return;
        }
        auto g = snapshot();
        try {
            reply(res, 200, api::ask_payload(ask(*question, *g, *config_.client, config_.query_exemplars, qa_options())));
        } catch (const QaError& e) {
            if (e.code() == QaError::Code::ClientFailure)
                reply(res, 502, api::error_payload("ClientFailure", e.what()));
            else
                reply(res, 500, api::error_payload("ConfigurationError", e.what()));
        }
    });

    srv.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        auto mode_text = string_field(*body, "mode", res);
        if (!mode_text) return;
        auto mode = parse_classification_mode(*mode_text);
        if (!mode) {
            reply(res, 400, api::error_payload("MalformedBody", "mode must be heuristic, zero-shot or few-shot"));
            return;
        }
        if (*mode != ClassificationMode::Heuristic && !config_.client) {
            reply(res, 502, api::error_payload("ClientFailure", "no completion client configured"));
            return;
        }
        ClassifyOptions opts;
        opts.mode = *mode;
        opts.exemplars = config_.classify_exemplars;
        opts.parallelism = config_.parallelism;
        try {
            reply(res, 200, api::classification_payload(classify_nodes(*snapshot(), config_.client.get(), opts)));
        } catch (const EnrichmentError& e) {
            reply(res, 400, api::error_payload(to_string(e.code()), e.what()));
        }
    });

    srv.Post("/enrich", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        std::optional<ClassificationMode> mode;
        if (auto it = body->find("mode"); it != body->end()) {
            mode = it->is_string() ? parse_classification_mode(it->get<std::string>()) : std::nullopt;
            if (!mode) {
                reply(res, 400, api::error_payload("MalformedBody", "mode must be heuristic, zero-shot or few-shot"));
                return;
            }
        }
        if (mode.value_or(config_.enrich_mode) != ClassificationMode::Heuristic && !config_.client) {
            reply(res, 502, api::error_payload("ClientFailure", "no completion client configured"));
            return;
        }
        try {
            reply(res, 200, api::validate_payload(*enrich(mode)));
        } catch (const EnrichmentError& e) {
            reply(res, 400, api::error_payload(to_string(e.code()), e.what()));
        } catch (const GraphError& e) {
            reply(res, 500, api::error_payload(to_string(e.code()), e.what()));
        } catch (const std::runtime_error& e) {
            reply(res, 502, api::error_payload("ClientFailure", e.what()));
        }
    });
}

bool GuidelineService::listen() { return server_->listen(config_.host, config_.port); }

int GuidelineService::bind_any_port() { return server_->bind_to_any_port(config_.host); }

bool GuidelineService::listen_after_bind() { return server_->listen_after_bind(); }

void GuidelineService::stop() {
    if (server_) server_->stop();
}

}  // namespace cpg
