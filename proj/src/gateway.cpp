#include "faithfulrag/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "faithfulrag/digest.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

BackendConfig BackendConfig::scripted(std::vector<ScriptEntry> entries) {
    BackendConfig config;
    config.kind = Kind::scripted;
    config.script = std::move(entries);
    return config;
}

BackendConfig BackendConfig::http(std::string base_url, std::string api_key_env) {
    BackendConfig config;
    config.kind = Kind::http;
    config.base_url = std::move(base_url);
    config.api_key_env = std::move(api_key_env);
    return config;
}

std::string BackendConfig::id() const {
    if (kind == Kind::http) return "http:" + base_url;
    std::string material;
    for (const auto& entry : script) {
        material += entry.pattern;
        material.push_back('\x1f');
        material += entry.completion;
        material.push_back('\x1e');
    }
    return "scripted:" + digest::sha256_hex(material).substr(0, 16);
}

std::vector<ScriptEntry> load_script(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(util::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("entries"))
        throw ConfigError("script file is not a JSON object with an entries array: " +
                          path.string());
    std::vector<ScriptEntry> entries;
    for (const auto& e : j["entries"])
        entries.push_back({e.at("pattern").get<std::string>(),
                           e.at("completion").get<std::string>()});
    return entries;
}

Gateway::Gateway(BackendConfig config, ResponseCache* cache, Transport* transport,
                 int max_inflight)
    : config_(std::move(config)),
      cache_(cache),
      transport_(transport),
      inflight_(std::max(1, max_inflight)) {
    if (transport_ == nullptr && config_.kind == BackendConfig::Kind::http) {
        owned_transport_ = make_http_transport();
        transport_ = owned_transport_.get();
    }
}

namespace {

TokenUsage estimated_usage(const ChatRequest& request, const std::string& completion) {
    TokenUsage usage;
    usage.prompt_tokens =
        static_cast<std::int64_t>(util::split_whitespace(request.concatenated_content()).size());
    usage.completion_tokens = static_cast<std::int64_t>(util::split_whitespace(completion).size());
    return usage;
}

} // namespace

ChatResponse Gateway::complete(const ChatRequest& request) {
    request.validate();
    completions_served_.fetch_add(1);
    const std::string key = cache_key(request, config_.id());
    if (cache_) {
        if (auto record = cache_->get(key))
            return response_from_json(record->at("response"));
    }

    ChatResponse response;
    {
        inflight_.acquire();
        struct Release {
            std::counting_semaphore<4096>& sem;
            ~Release() { sem.release(); }
        } release{inflight_};
        response = config_.kind == BackendConfig::Kind::scripted ? complete_scripted(request)
                                                                 : complete_http(request);
    }

    if (cache_) {
        nlohmann::ordered_json record;
        record["request"] = nlohmann::json::parse(serialize_request(request));
        record["response"] = response_to_json(response);
        record["created_at"] = util::iso8601_now();
        cache_->put(key, record);
    }
    return response;
}

ChatResponse Gateway::complete_scripted(const ChatRequest& request) {
    const std::string haystack = request.concatenated_content();
    for (const auto& entry : config_.script) {
        if (util::contains(haystack, entry.pattern)) {
            ChatResponse response;
            response.content = entry.completion;
            response.finish_reason = FinishReason::stop;
            response.usage = estimated_usage(request, entry.completion);
            return response;
        }
    }
    throw faithfulrag::ScriptMiss("no script pattern matches the prompt (first 120 chars: \"" +
                                  haystack.substr(0, 120) + "\")");
}

ChatResponse Gateway::complete_http(const ChatRequest& request) {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr)
            throw ConfigError("API key environment variable not set: " + config_.api_key_env);
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }

    const std::string body = serialize_request(request);
    const int attempts = std::max(1, config_.retry.max_attempts);
    HttpResult result;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        network_calls_.fetch_add(1);
        result = transport_->post_json(config_.base_url, "/v1/chat/completions", headers, body);
        // Retry transport failures and 5xx; client errors are not retryable.
        if (!result.transport_failed() && result.status < 500) break;
        if (attempt < attempts)
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry.backoff_ms));
    }
    if (result.transport_failed())
        throw faithfulrag::NetworkError("chat completion failed after " +
                                        std::to_string(attempts) + " attempts: " + result.error);
    if (result.status >= 500)
        throw faithfulrag::NetworkError("chat completion failed after " +
                                        std::to_string(attempts) +
                                        " attempts: HTTP " + std::to_string(result.status));
    if (!result.ok())
        throw ProtocolError("chat completion rejected: HTTP " + std::to_string(result.status) +
                            " " + result.body.substr(0, 200));

    nlohmann::json j = nlohmann::json::parse(result.body, nullptr, false);
    if (j.is_discarded()) throw ProtocolError("chat completion response is not valid JSON");
    ChatResponse response;
    try {
        const auto& choice = j.at("choices").at(0);
        response.content = choice.at("message").at("content").get<std::string>();
        const std::string reason = choice.value("finish_reason", "stop");
        response.finish_reason = reason == "stop"     ? FinishReason::stop
                                 : reason == "length" ? FinishReason::length
                                                      : FinishReason::error;
        if (j.contains("usage")) {
            response.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            response.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed chat completion response: ") + e.what());
    }
    if (response.finish_reason == FinishReason::stop && response.content.empty())
        throw ProtocolError("chat completion finished with stop but carries no content");
    return response;
}

} // namespace faithfulrag
