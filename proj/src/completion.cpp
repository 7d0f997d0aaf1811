#include "cpg/completion.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <openssl/evp.h>

#include <json.hpp>

namespace cpg {

std::string_view to_string(FailureKind k) {
    switch (k) {
        case FailureKind::Transport: return "transport";
        case FailureKind::RateLimit: return "rate-limit";
        case FailureKind::MalformedResponse: return "malformed-response";
        case FailureKind::Timeout: return "timeout";
    }
    return "?";
}

std::string prompt_sha256(std::string_view prompt) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

std::vector<TranscriptEntry> parse_transcript(std::string_view jsonl) {
    std::vector<TranscriptEntry> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.push_back({j.at("prompt_sha256").get<std::string>(), j.at("reply").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("transcript line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<TranscriptEntry> load_transcript_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read transcript '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_transcript(buf.str());
}

std::string format_transcript(const std::vector<TranscriptEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["prompt_sha256"] = e.prompt_sha256;
        j["reply"] = e.reply;
        out += j.dump();
        out += '\n';
    }
    return out;
}

ScriptedClient::ScriptedClient(const std::vector<TranscriptEntry>& transcript) {
    for (const auto& e : transcript) by_hash_[e.prompt_sha256] = e.reply;
}

void ScriptedClient::script_prompt(std::string_view prompt, std::string reply) {
    script_hash(prompt_sha256(prompt), std::move(reply));
}

void ScriptedClient::script_hash(std::string sha256, std::string reply) {
    std::lock_guard lock(mu_);
    by_hash_[std::move(sha256)] = std::move(reply);
}

void ScriptedClient::script_next(CompletionOutcome outcome) {
    std::lock_guard lock(mu_);
    sequence_.push_back(std::move(outcome));
}

CompletionOutcome ScriptedClient::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) throw std::invalid_argument("completion prompt must be non-empty");
    auto hash = prompt_sha256(request.prompt);
    std::lock_guard lock(mu_);
    ++calls_;
    if (auto it = by_hash_.find(hash); it != by_hash_.end()) return CompletionOutcome::reply(it->second);
    if (!sequence_.empty()) {
        auto next = std::move(sequence_.front());
        sequence_.pop_front();
        return next;
    }
    return CompletionOutcome::failure(FailureKind::MalformedResponse, "no scripted reply for prompt " + hash);
}

std::size_t ScriptedClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

CompletionOutcome RecordingClient::complete(const CompletionRequest& request) {
    auto outcome = inner_.complete(request);
    if (outcome.ok()) {
        std::lock_guard lock(mu_);
        entries_.push_back({prompt_sha256(request.prompt), outcome.text()});
    }
    return outcome;
}

std::vector<TranscriptEntry> RecordingClient::transcript() const {
    std::lock_guard lock(mu_);
    return entries_;
}

}  // namespace cpg
