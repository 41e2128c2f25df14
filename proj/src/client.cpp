#include "ptmchain/client.hpp"

#include <cstdlib>
#include <thread>

#ifdef PTMCHAIN_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <json.hpp>

#include "ptmchain/strings.hpp"
#include "ptmchain/types.hpp"

namespace ptmchain::card {

CompletionResponse MockClient::complete(const CompletionRequest& request) {
    requests_.push_back(request);
    for (const auto& [needle, response] : rules_) {
        if (contains(request.prompt, needle)) {
            return {true, response, ""};
        }
    }
    switch (fallback_) {
        case Fallback::EmptyObject: return {true, "{}", ""};
        case Fallback::Echo: return {true, request.prompt, ""};
        case Fallback::Fail: return {false, "", "mock client has no matching rule"};
    }
    return {false, "", "unreachable"};
}

LiveClient::LiveClient(LiveClientConfig config) : config_(std::move(config)) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) {
        throw Error("environment variable " + config_.api_key_env +
                    " is not set; refusing to construct a live client");
    }
    api_key_ = key;
    if (config_.base_url.empty()) throw Error("live client needs a base_url");
}

CompletionResponse LiveClient::complete(const CompletionRequest& request) {
    nlohmann::json body;
    body["model"] = request.model.empty() ? config_.model : request.model;
    body["temperature"] = request.temperature;
    body["messages"] =
        nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});

    httplib::Client cli(config_.base_url);
    int timeout_ms = request.timeout_ms > 0 ? request.timeout_ms : config_.timeout_ms;
    cli.set_connection_timeout(0, timeout_ms * 1000);
    cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(250 * attempt));
        }
        auto res = cli.Post(config_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "server returned status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            return {false, "", "server returned status " + std::to_string(res->status)};
        }
        auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (!doc.is_object()) return {false, "", "response body is not JSON"};
        try {
            return {true, doc.at("choices").at(0).at("message").at("content")
                              .get<std::string>(),
                    ""};
        } catch (const std::exception& e) {
            return {false, "", std::string("unexpected response shape: ") + e.what()};
        }
    }
    return {false, "", last_error + " after " + std::to_string(config_.max_retries + 1) +
                           " attempts"};
}

}  // namespace ptmchain::card
