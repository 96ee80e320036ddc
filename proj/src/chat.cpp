#include "faithfulrag/chat.hpp"

#include <cmath>

#include "faithfulrag/digest.hpp"
#include "faithfulrag/errors.hpp"

namespace faithfulrag {

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw ValidationError("unknown message role: " + name);
}

const char* finish_reason_name(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

void ChatRequest::validate() const {
    if (model.empty()) throw ValidationError("chat request has empty model");
    if (messages.empty()) throw ValidationError("chat request has no messages");
    for (const auto& m : messages)
        if (m.content.empty()) throw ValidationError("chat message has empty content");
    if (temperature < 0.0 || !std::isfinite(temperature))
        throw ValidationError("temperature must be a finite value >= 0");
    if (max_tokens && *max_tokens <= 0)
        throw ValidationError("max_tokens must be positive when present");
}

std::string ChatRequest::concatenated_content() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out.push_back('\n');
        out += m.content;
    }
    return out;
}

std::string serialize_request(const ChatRequest& request) {
    request.validate();
    nlohmann::ordered_json body;
    body["model"] = request.model;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& m : request.messages) {
        nlohmann::ordered_json msg;
        msg["role"] = role_name(m.role);
        msg["content"] = m.content;
        messages.push_back(std::move(msg));
    }
    body["messages"] = std::move(messages);
    // Canonical numeric form: 0 dumps as 0, not 0.0.
    double integral = 0.0;
    if (std::modf(request.temperature, &integral) == 0.0)
        body["temperature"] = static_cast<std::int64_t>(integral);
    else
        body["temperature"] = request.temperature;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    return body.dump();
}

ChatRequest parse_request(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ProtocolError("chat request body is not a JSON object");
    ChatRequest request;
    try {
        request.model = j.at("model").get<std::string>();
        for (const auto& m : j.at("messages")) {
            request.messages.push_back(
                {parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
        }
        request.temperature = j.value("temperature", 0.0);
        if (j.contains("max_tokens")) request.max_tokens = j.at("max_tokens").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed chat request: ") + e.what());
    }
    request.validate();
    return request;
}

std::string cache_key(const ChatRequest& request, const std::string& backend_id) {
    return digest::sha256_hex(backend_id + "\n" + serialize_request(request));
}

nlohmann::ordered_json response_to_json(const ChatResponse& response) {
    return {{"content", response.content},
            {"finish_reason", finish_reason_name(response.finish_reason)},
            {"usage",
             {{"prompt_tokens", response.usage.prompt_tokens},
              {"completion_tokens", response.usage.completion_tokens}}}};
}

ChatResponse response_from_json(const nlohmann::json& j) {
    ChatResponse response;
    response.content = j.at("content").get<std::string>();
    std::string reason = j.at("finish_reason").get<std::string>();
    if (reason == "stop")
        response.finish_reason = FinishReason::stop;
    else if (reason == "length")
        response.finish_reason = FinishReason::length;
    else
        response.finish_reason = FinishReason::error;
    if (j.contains("usage")) {
        response.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        response.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    return response;
}

} // namespace faithfulrag
