#include "cor/llm_backend.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

namespace cor::backend {

using json = nlohmann::json;

namespace {

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("backend url needs a scheme: " + config_.url);
    const std::string scheme = config_.url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported backend url scheme: " + scheme);
    const auto path_start = config_.url.find('/', scheme_end + 3);
    scheme_host_port_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
    if (scheme_host_port_.size() <= scheme_end + 3) throw ConfigError("backend url has no host: " + config_.url);
    if (config_.max_attempts < 1) throw ConfigError("backend retries: max_attempts must be at least 1");
}

std::string HttpBackend::id() const {
    return "http:" + config_.model + "@" + config_.url;
}

GenResponse HttpBackend::do_generate(const GenRequest& request) {
    if (request.forced_prefix && !config_.prefill) {
        throw CapabilityError("backend configured without prefill support", 0);
    }

    json messages = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    json body{{"model", config_.model},
              {"temperature", request.temperature},
              {"max_tokens", request.max_new_tokens}};
    if (request.seed) body["seed"] = *request.seed;
    if (request.forced_prefix) {
        messages.push_back(json{{"role", "assistant"}, {"content", *request.forced_prefix}});
        body["continue_final_message"] = true;
        body["add_generation_prompt"] = false;
    }
    body["messages"] = std::move(messages);
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + config_.bearer_token);

    std::string last_error;
    auto delay = config_.base_delay;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(delay);
            delay = std::min(delay * 2, config_.max_delay);
        }
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        const auto result = client.Post(path_, headers, payload, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            spdlog::warn("backend attempt {}/{} failed: {}", attempt, config_.max_attempts, last_error);
            continue;
        }
        const int status = result->status;
        if (retryable_status(status)) {
            last_error = "HTTP " + std::to_string(status);
            spdlog::warn("backend attempt {}/{} failed: {}", attempt, config_.max_attempts, last_error);
            continue;
        }
        if (status != 200) {
            if (request.forced_prefix && (status == 400 || status == 422)) {
                throw CapabilityError("backend rejected assistant prefill (HTTP " + std::to_string(status) + ")",
                                      attempt);
            }
            throw BackendError("HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200), attempt);
        }
        GenResponse response;
        response.backend_id = id();
        try {
            const json reply = json::parse(result->body);
            const auto& content = reply.at("choices").at(0).at("message").at("content");
            response.text = content.is_null() ? std::string() : content.get<std::string>();
            if (reply.contains("usage") && reply["usage"].is_object()) {
                const auto& u = reply["usage"];
                response.usage = TokenUsage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0)};
            }
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed backend reply: ") + e.what(), attempt);
        }
        if (request.forced_prefix && response.text.rfind(*request.forced_prefix, 0) != 0) {
            response.text = *request.forced_prefix + response.text;
        }
        return response;
    }
    throw BackendError(last_error + " after " + std::to_string(config_.max_attempts) + " attempts",
                       config_.max_attempts);
}

}  // namespace cor::backend
