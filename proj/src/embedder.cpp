#include "faithfulrag/embedder.hpp"

#include <cmath>
#include <cstdlib>

#include "faithfulrag/digest.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/kernels.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw DimensionMismatch("cosine over mismatched dims " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
    return kernels::dot(a.values, b.values);
}

EmbedderConfig EmbedderConfig::mock(int dim) {
    EmbedderConfig config;
    config.kind = Kind::bag_of_words_mock;
    config.mock_dim = dim;
    return config;
}

EmbedderConfig EmbedderConfig::http(std::string base_url, std::string model) {
    EmbedderConfig config;
    config.kind = Kind::http;
    config.base_url = std::move(base_url);
    config.model = std::move(model);
    return config;
}

std::string EmbedderConfig::id() const {
    if (kind == Kind::http) return "embed-http:" + base_url + ":" + model;
    return "embed-mock:" + std::to_string(mock_dim);
}

std::string serialize_embedding_request(const std::string& model,
                                        const std::vector<std::string>& texts) {
    nlohmann::ordered_json body;
    body["model"] = model;
    body["input"] = texts;
    return body.dump();
}

Embedder::Embedder(EmbedderConfig config, ResponseCache* cache, Transport* transport)
    : config_(std::move(config)), cache_(cache), transport_(transport) {
    if (transport_ == nullptr && config_.kind == EmbedderConfig::Kind::http) {
        owned_transport_ = make_http_transport();
        transport_ = owned_transport_.get();
    }
}

namespace {

void normalize_in_place(std::vector<double>& values, const std::string& what) {
    double norm_sq = kernels::dot(values, values);
    if (norm_sq <= 0.0)
        throw ProviderError("zero-norm embedding rejected for " + what);
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : values) v *= inv;
}

} // namespace

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) throw EmptyInput("embed_batch called with no texts");
    for (const auto& t : texts)
        if (util::trim(t).empty()) throw EmptyInput("embed_batch given an empty text");
    return config_.kind == EmbedderConfig::Kind::bag_of_words_mock ? embed_mock(texts)
                                                                   : embed_http(texts);
}

std::vector<EmbeddingVector> Embedder::embed_mock(const std::vector<std::string>& texts) const {
    const auto dim = static_cast<std::size_t>(config_.mock_dim);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::vector<double> counts(dim, 0.0);
        for (const auto& token : util::split_whitespace(util::to_lower(text)))
            counts[util::fnv1a64(token) % dim] += 1.0;
        normalize_in_place(counts, "\"" + text.substr(0, 40) + "\"");
        out.push_back({std::move(counts)});
    }
    return out;
}

std::vector<EmbeddingVector> Embedder::embed_http(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    const std::size_t batch = std::max(1, config_.batch_size);
    for (std::size_t start = 0; start < texts.size(); start += batch) {
        std::vector<std::string> slice(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                       texts.begin() +
                                           static_cast<std::ptrdiff_t>(
                                               std::min(start + batch, texts.size())));
        const std::string body = serialize_embedding_request(config_.model, slice);
        const std::string key = digest::sha256_hex(config_.id() + "\n" + body);

        nlohmann::json data;
        bool from_cache = false;
        if (cache_) {
            if (auto record = cache_->get(key)) {
                data = record->at("embeddings");
                from_cache = true;
            }
        }
        if (!from_cache) {
            data = fetch_batch_json(body);
            if (cache_) {
                nlohmann::ordered_json record;
                record["request"] = nlohmann::json::parse(body);
                record["embeddings"] = data;
                record["created_at"] = util::iso8601_now();
                cache_->put(key, record);
            }
        }

        if (data.size() != slice.size())
            throw ProviderError("embedding provider returned " + std::to_string(data.size()) +
                                " vectors for " + std::to_string(slice.size()) + " inputs");
        for (std::size_t i = 0; i < slice.size(); ++i) {
            std::vector<double> values = data[i].get<std::vector<double>>();
            normalize_in_place(values, "\"" + slice[i].substr(0, 40) + "\"");
            out[start + i] = {std::move(values)};
        }
    }
    for (const auto& v : out)
        if (v.dim() != out.front().dim())
            throw DimensionMismatch("embedding provider returned inconsistent dimensions");
    return out;
}

nlohmann::json Embedder::fetch_batch_json(const std::string& body) {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    network_calls_.fetch_add(1);
    HttpResult result = transport_->post_json(config_.base_url, "/v1/embeddings", headers, body);
    if (result.transport_failed())
        throw ProviderError("embedding request failed: " + result.error);
    if (!result.ok())
        throw ProviderError("embedding request rejected: HTTP " + std::to_string(result.status));

    nlohmann::json j = nlohmann::json::parse(result.body, nullptr, false);
    if (j.is_discarded()) throw ProviderError("embedding response is not valid JSON");
    try {
        // Order by data[i].index, not array position.
        const auto& items = j.at("data");
        nlohmann::json ordered = nlohmann::json::array();
        for (std::size_t i = 0; i < items.size(); ++i) ordered.push_back(nullptr);
        for (const auto& item : items) {
            auto index = item.at("index").get<std::size_t>();
            if (index >= items.size())
                throw ProviderError("embedding response index out of range");
            ordered[index] = item.at("embedding");
        }
        return ordered;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what());
    }
}

} // namespace faithfulrag
