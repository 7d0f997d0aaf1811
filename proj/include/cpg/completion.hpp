#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cpg {

struct CompletionRequest {
    std::string prompt;
    std::string model = "gpt-3.5-turbo-instruct";
    int max_tokens = 256;
    double temperature = 0.0;
};

enum class FailureKind { Transport, RateLimit, MalformedResponse, Timeout };

std::string_view to_string(FailureKind k);

struct CompletionFailure {
    FailureKind kind;
    std::string message;

    friend bool operator==(const CompletionFailure&, const CompletionFailure&) = default;
};

// Exactly one of reply text or failure.
class CompletionOutcome {
public:
    static CompletionOutcome reply(std::string text) { return CompletionOutcome(std::move(text)); }
    static CompletionOutcome failure(FailureKind kind, std::string message) {
        return CompletionOutcome(CompletionFailure{kind, std::move(message)});
    }

    bool ok() const { return std::holds_alternative<std::string>(value_); }
    const std::string& text() const { return std::get<std::string>(value_); }
    const CompletionFailure& error() const { return std::get<CompletionFailure>(value_); }

    friend bool operator==(const CompletionOutcome&, const CompletionOutcome&) = default;

private:
    explicit CompletionOutcome(std::variant<std::string, CompletionFailure> v) : value_(std::move(v)) {}
    std::variant<std::string, CompletionFailure> value_;
};

// All LLM access goes through this interface. Implementations must be safe
// for concurrent use.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual CompletionOutcome complete(const CompletionRequest& request) = 0;
};

// Lowercase hex SHA-256 of the prompt bytes.
std::string prompt_sha256(std::string_view prompt);

struct TranscriptEntry {
    std::string prompt_sha256;
    std::string reply;
};

std::vector<TranscriptEntry> parse_transcript(std::string_view jsonl);
std::vector<TranscriptEntry> load_transcript_file(const std::string& path);
std::string format_transcript(const std::vector<TranscriptEntry>& entries);

// Scripted replies keyed by prompt hash; prompts without a keyed reply consume
// the sequential script in order. Nothing left -> MalformedResponse.
class ScriptedClient : public CompletionClient {
public:
    ScriptedClient() = default;
    explicit ScriptedClient(const std::vector<TranscriptEntry>& transcript);

    void script_prompt(std::string_view prompt, std::string reply);
    void script_hash(std::string sha256, std::string reply);
    void script_next(CompletionOutcome outcome);

    CompletionOutcome complete(const CompletionRequest& request) override;

    std::size_t calls() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> by_hash_;
    std::deque<CompletionOutcome> sequence_;
    std::size_t calls_ = 0;
};

// Forwards to another client and records every successful exchange.
class RecordingClient : public CompletionClient {
public:
    explicit RecordingClient(CompletionClient& inner) : inner_(inner) {}
    CompletionOutcome complete(const CompletionRequest& request) override;
    std::vector<TranscriptEntry> transcript() const;

private:
    CompletionClient& inner_;
    mutable std::mutex mu_;
    std::vector<TranscriptEntry> entries_;
};

struct HttpClientConfig {
    std::string endpoint;  // e.g. https://api.openai.com/v1/completions
    std::string api_key;
    std::string model = "gpt-3.5-turbo-instruct";
    std::chrono::seconds timeout{30};
    int retry_budget = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::size_t max_in_flight = 4;

    // CPG_LLM_ENDPOINT, CPG_LLM_KEY, CPG_LLM_MODEL, CPG_LLM_TIMEOUT, CPG_LLM_RETRIES.
    static std::optional<HttpClientConfig> from_env();
};

// OpenAI-compatible completions client. Retries transport errors, timeouts,
// 429 and 5xx with exponential backoff; malformed bodies are not retried.
class HttpCompletionClient : public CompletionClient {
public:
    explicit HttpCompletionClient(HttpClientConfig config);
    CompletionOutcome complete(const CompletionRequest& request) override;

    // Request body on the wire: {"model","prompt","max_tokens","temperature"}.
    static std::string request_body(const CompletionRequest& request);
    // Extracts choices[0].text.
    static CompletionOutcome parse_response(std::string_view body);

private:
    CompletionOutcome attempt(const CompletionRequest& request);

    HttpClientConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::counting_semaphore<> in_flight_;
};

}  // namespace cpg
