#pragma once

#include <httplib.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <thread>

#include "faithfulrag/gateway.hpp"
#include "faithfulrag/transport.hpp"
#include "faithfulrag/util.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return FAITHFULRAG_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path fixture_dir() { return source_dir() / "tests" / "fixtures"; }

/// Fresh directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("faithfulrag_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

/// Transport that trips the test when anything touches it. Used to prove
/// scripted backends and cache hits stay off the network.
class FailingTransport : public faithfulrag::Transport {
public:
    faithfulrag::HttpResult post_json(const std::string&, const std::string&,
                                      const std::vector<std::pair<std::string, std::string>>&,
                                      const std::string&) override {
        used.store(true);
        faithfulrag::HttpResult result;
        result.status = 0;
        result.error = "FailingTransport used";
        return result;
    }
    std::atomic<bool> used{false};
};

/// OpenAI-compatible stub: /v1/chat/completions answers from a script
/// (first matching pattern over the concatenated message contents) and
/// /v1/embeddings returns hashed bag-of-words counts. Counts every request.
class StubServer {
public:
    explicit StubServer(std::vector<faithfulrag::ScriptEntry> script)
        : script_(std::move(script)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            chat_requests.fetch_add(1);
            auto body = nlohmann::json::parse(req.body, nullptr, false);
            if (body.is_discarded()) {
                res.status = 400;
                res.set_content("{\"error\":\"bad json\"}", "application/json");
                return;
            }
            std::string haystack;
            for (const auto& m : body["messages"]) {
                if (!haystack.empty()) haystack.push_back('\n');
                haystack += m["content"].get<std::string>();
            }
            for (const auto& entry : script_) {
                if (haystack.find(entry.pattern) != std::string::npos) {
                    nlohmann::json reply = {
                        {"id", "stub"},
                        {"object", "chat.completion"},
                        {"choices",
                         {{{"index", 0},
                           {"message", {{"role", "assistant"}, {"content", entry.completion}}},
                           {"finish_reason", "stop"}}}},
                        {"usage",
                         {{"prompt_tokens",
                           faithfulrag::util::split_whitespace(haystack).size()},
                          {"completion_tokens",
                           faithfulrag::util::split_whitespace(entry.completion).size()}}}};
                    res.set_content(reply.dump(), "application/json");
                    return;
                }
            }
            res.status = 400;
            nlohmann::json err = {{"error", "no pattern matched"},
                                  {"prompt_head", haystack.substr(0, 200)}};
            res.set_content(err.dump(), "application/json");
        });

        server_.Post("/v1/embeddings", [this](const httplib::Request& req,
                                              httplib::Response& res) {
            embedding_requests.fetch_add(1);
            auto body = nlohmann::json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.contains("input")) {
                res.status = 400;
                res.set_content("{\"error\":\"bad json\"}", "application/json");
                return;
            }
            nlohmann::json data = nlohmann::json::array();
            size_t index = 0;
            for (const auto& text : body["input"]) {
                std::vector<double> counts(kDim, 0.0);
                for (const auto& token : faithfulrag::util::split_whitespace(
                         faithfulrag::util::to_lower(text.get<std::string>())))
                    counts[faithfulrag::util::fnv1a64(token) % kDim] += 1.0;
                data.push_back({{"object", "embedding"},
                                {"index", index++},
                                {"embedding", counts}});
            }
            nlohmann::json reply = {{"object", "list"}, {"data", data}};
            res.set_content(reply.dump(), "application/json");
        });

        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    static constexpr size_t kDim = 256;

    std::atomic<int> chat_requests{0};
    std::atomic<int> embedding_requests{0};

private:
    std::vector<faithfulrag::ScriptEntry> script_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace testsupport
