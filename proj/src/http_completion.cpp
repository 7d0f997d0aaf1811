#include "cpg/completion.hpp"

#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace cpg {

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

bool transient(FailureKind k) { return k != FailureKind::MalformedResponse; }

}  // namespace

std::optional<HttpClientConfig> HttpClientConfig::from_env() {
    auto endpoint = env("CPG_LLM_ENDPOINT");
    if (!endpoint) return std::nullopt;
    HttpClientConfig c;
    c.endpoint = *endpoint;
    c.api_key = env("CPG_LLM_KEY").value_or("");
    if (auto m = env("CPG_LLM_MODEL")) c.model = *m;
    if (auto t = env("CPG_LLM_TIMEOUT")) c.timeout = std::chrono::seconds(std::stoi(*t));
    if (auto r = env("CPG_LLM_RETRIES")) c.retry_budget = std::stoi(*r);
    return c;
}

HttpCompletionClient::HttpCompletionClient(HttpClientConfig config)
    : config_(std::move(config)), in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight))) {
    auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint must be an absolute URL");
    auto path_start = config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        scheme_host_port_ = config_.endpoint;
        path_ = "/";
    } else {
        scheme_host_port_ = config_.endpoint.substr(0, path_start);
        path_ = config_.endpoint.substr(path_start);
    }
}

std::string HttpCompletionClient::request_body(const CompletionRequest& request) {
    nlohmann::ordered_json j;
    j["model"] = request.model;
    j["prompt"] = request.prompt;
    j["max_tokens"] = request.max_tokens;
    j["temperature"] = request.temperature;
    return j.dump();
}

CompletionOutcome HttpCompletionClient::parse_response(std::string_view body) {
    nlohmann::json j = nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
    if (j.is_discarded()) return CompletionOutcome::failure(FailureKind::MalformedResponse, "response is not JSON");
    auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty())
        return CompletionOutcome::failure(FailureKind::MalformedResponse, "response has no choices");
    const auto& first = (*choices)[0];
    auto text = first.find("text");
    if (text == first.end() || !text->is_string())
        return CompletionOutcome::failure(FailureKind::MalformedResponse, "choices[0].text missing");
    return CompletionOutcome::reply(text->get<std::string>());
}

CompletionOutcome HttpCompletionClient::attempt(const CompletionRequest& request) {
    httplib::Client cli(scheme_host_port_);
    auto secs = config_.timeout.count();
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    cli.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    CompletionRequest req = request;
    if (req.model.empty()) req.model = config_.model;

    auto started = std::chrono::steady_clock::now();
    auto res = cli.Post(path_, headers, request_body(req), "application/json");
    if (!res) {
        auto err = res.error();
        bool timed_out = err == httplib::Error::ConnectionTimeout ||
                         (err == httplib::Error::Read &&
                          std::chrono::steady_clock::now() - started >= config_.timeout);
        return CompletionOutcome::failure(timed_out ? FailureKind::Timeout : FailureKind::Transport,
                                          httplib::to_string(err));
    }
    if (res->status == 429) return CompletionOutcome::failure(FailureKind::RateLimit, "HTTP 429");
    if (res->status >= 500) return CompletionOutcome::failure(FailureKind::Transport, "HTTP " + std::to_string(res->status));
    if (res->status != 200)
        return CompletionOutcome::failure(FailureKind::MalformedResponse, "HTTP " + std::to_string(res->status));
    return parse_response(res->body);
}

CompletionOutcome HttpCompletionClient::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) throw std::invalid_argument("completion prompt must be non-empty");
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    auto backoff = config_.initial_backoff;
    for (int tries = 0;; ++tries) {
        auto outcome = attempt(request);
        if (outcome.ok() || !transient(outcome.error().kind) || tries >= config_.retry_budget) return outcome;
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

}  // namespace cpg
