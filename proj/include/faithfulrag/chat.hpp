#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace faithfulrag {

enum class Role { system, user, assistant };

const char* role_name(Role role);
Role parse_role(const std::string& name);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// One chat-completion request. Deterministic by default: temperature 0.
struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<int> max_tokens;

    bool operator==(const ChatRequest&) const = default;

    /// Throws ValidationError on empty model/messages or negative temperature.
    void validate() const;

    /// All message contents concatenated with newlines; what scripted
    /// backends match patterns against.
    std::string concatenated_content() const;
};

enum class FinishReason { stop, length, error };

const char* finish_reason_name(FinishReason reason);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
    TokenUsage usage;
};

/// Canonical OpenAI-compatible JSON body: keys in the fixed order
/// model, messages, temperature[, max_tokens]; message keys role, content.
/// Integral temperatures serialize without a decimal point.
std::string serialize_request(const ChatRequest& request);

/// Inverse of serialize_request, for replay tooling and round-trip checks.
ChatRequest parse_request(const std::string& body);

/// Content-addressed key: SHA-256 over backend id + canonical serialization.
std::string cache_key(const ChatRequest& request, const std::string& backend_id);

nlohmann::ordered_json response_to_json(const ChatResponse& response);
ChatResponse response_from_json(const nlohmann::json& j);

} // namespace faithfulrag
