#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "faithfulrag/cache.hpp"
#include "faithfulrag/transport.hpp"

namespace faithfulrag {

/// Unit-normalized sentence embedding. All vectors from one provider share a
/// dimension, so cosine similarity reduces to a dot product.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

/// cos(a, b) for pre-normalized vectors: their dot product, in [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct EmbedderConfig {
    enum class Kind { http, bag_of_words_mock };

    Kind kind = Kind::bag_of_words_mock;
    std::string base_url; // http only
    std::string model;    // http only
    std::string api_key_env = "FAITHFULRAG_API_KEY";
    int mock_dim = 256;  // hashing dimension of the mock
    int batch_size = 32; // max texts per http request

    static EmbedderConfig mock(int dim = 256);
    static EmbedderConfig http(std::string base_url, std::string model);

    std::string id() const;
};

/// Canonical JSON body for POST /v1/embeddings: keys model, input.
std::string serialize_embedding_request(const std::string& model,
                                        const std::vector<std::string>& texts);

/// Sentence-embedding provider. The mock is a deterministic hashed
/// bag-of-words: lowercase, split on whitespace, FNV-1a 64 each token modulo
/// the hashing dimension, count, L2-normalize. The http provider speaks the
/// OpenAI embeddings wire format and can share the gateway's response cache.
class Embedder {
public:
    explicit Embedder(EmbedderConfig config, ResponseCache* cache = nullptr,
                      Transport* transport = nullptr);

    /// One unit vector per input text, order preserved.
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);

    const EmbedderConfig& config() const { return config_; }
    std::uint64_t network_calls() const { return network_calls_.load(); }

private:
    std::vector<EmbeddingVector> embed_mock(const std::vector<std::string>& texts) const;
    std::vector<EmbeddingVector> embed_http(const std::vector<std::string>& texts);
    nlohmann::json fetch_batch_json(const std::string& body);

    EmbedderConfig config_;
    ResponseCache* cache_;
    Transport* transport_;
    std::unique_ptr<Transport> owned_transport_;
    std::atomic<std::uint64_t> network_calls_{0};
};

} // namespace faithfulrag
