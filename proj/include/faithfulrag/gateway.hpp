#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "faithfulrag/cache.hpp"
#include "faithfulrag/chat.hpp"
#include "faithfulrag/transport.hpp"

namespace faithfulrag {

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 250;
};

struct ScriptEntry {
    std::string pattern;
    std::string completion;
};

struct BackendConfig {
    enum class Kind { http, scripted };

    Kind kind = Kind::scripted;
    std::string base_url;                           // http only
    std::string api_key_env = "FAITHFULRAG_API_KEY"; // empty = no auth header
    std::vector<ScriptEntry> script;                // scripted only
    RetryPolicy retry;

    static BackendConfig scripted(std::vector<ScriptEntry> entries);
    static BackendConfig http(std::string base_url,
                              std::string api_key_env = "FAITHFULRAG_API_KEY");

    /// Stable identifier mixed into cache keys so distinct backends never
    /// share entries.
    std::string id() const;
};

/// Load a scripted backend's (pattern -> completion) entries from a JSON file
/// of the form {"entries": [{"pattern": ..., "completion": ...}, ...]}.
std::vector<ScriptEntry> load_script(const std::filesystem::path& path);

/// Chat-completion gateway over one backend, with an optional persistent
/// response cache. Safe for concurrent use; in-flight backend requests are
/// bounded by max_inflight.
class Gateway {
public:
    explicit Gateway(BackendConfig config, ResponseCache* cache = nullptr,
                     Transport* transport = nullptr, int max_inflight = 8);

    /// Resolve a request to a completion. Identical (request, backend) pairs
    /// are served from the cache on repeat calls, byte-identical.
    ChatResponse complete(const ChatRequest& request);

    const BackendConfig& config() const { return config_; }

    /// Number of requests that actually reached the transport. Cache hits and
    /// scripted completions do not count.
    std::uint64_t network_calls() const { return network_calls_.load(); }

    /// Total complete() calls resolved by any means (cache, script, network).
    std::uint64_t completions_served() const { return completions_served_.load(); }

private:
    ChatResponse complete_scripted(const ChatRequest& request);
    ChatResponse complete_http(const ChatRequest& request);

    BackendConfig config_;
    ResponseCache* cache_;
    Transport* transport_;
    std::unique_ptr<Transport> owned_transport_;
    std::counting_semaphore<4096> inflight_;
    std::atomic<std::uint64_t> network_calls_{0};
    std::atomic<std::uint64_t> completions_served_{0};
};

} // namespace faithfulrag
