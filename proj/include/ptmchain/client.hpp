#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ptmchain::card {

struct CompletionRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.0;
    int timeout_ms = 30000;
};

struct CompletionResponse {
    bool ok = false;
    std::string text;
    std::string error;
};

/// Text-completion backend. Implementations must be safe to call repeatedly
/// with the same request and should not retry internally beyond their
/// configured bound.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

/// Offline client for tests and dry runs. Every request is recorded.
/// Scripted rules map a substring probe against the prompt to a canned
/// response; the first matching rule wins, then the fallback applies.
class MockClient : public CompletionClient {
public:
    enum class Fallback { EmptyObject, Echo, Fail };

    explicit MockClient(Fallback fallback = Fallback::EmptyObject)
        : fallback_(fallback) {}

    void script(std::string needle, std::string response) {
        rules_.emplace_back(std::move(needle), std::move(response));
    }

    CompletionResponse complete(const CompletionRequest& request) override;

    const std::vector<CompletionRequest>& requests() const { return requests_; }

private:
    Fallback fallback_;
    std::vector<std::pair<std::string, std::string>> rules_;
    std::vector<CompletionRequest> requests_;
};

struct LiveClientConfig {
    std::string base_url;             // e.g. "https://api.example.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "PTMCHAIN_API_KEY";
    int max_retries = 2;              // extra attempts on 429/5xx
    int timeout_ms = 60000;
};

/// HTTP client speaking the common chat-completions shape. The key is read
/// from the configured environment variable at construction; a missing key
/// is an immediate error rather than a failed request later.
class LiveClient : public CompletionClient {
public:
    explicit LiveClient(LiveClientConfig config);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    LiveClientConfig config_;
    std::string api_key_;
};

}  // namespace ptmchain::card
