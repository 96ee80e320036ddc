#include "faithfulrag/alignment.hpp"

#include <algorithm>
#include <numeric>

#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

std::vector<Chunk> chunk_context(const std::string& context, int size) {
    if (size < 1) throw ValidationError("chunk size must be >= 1");
    std::vector<std::string> tokens = util::split_whitespace(context);
    if (tokens.empty()) throw EmptyContext("context is empty after trimming");

    std::vector<Chunk> chunks;
    const int total = static_cast<int>(tokens.size());
    for (int start = 0; start < total; start += size) {
        const int end = std::min(start + size, total);
        Chunk chunk;
        chunk.index = static_cast<int>(chunks.size());
        chunk.token_range = {start, end};
        chunk.text = util::join(
            std::vector<std::string>(tokens.begin() + start, tokens.begin() + end), " ");
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::vector<ScoredChunk> score_chunks(const std::vector<std::string>& facts,
                                      const std::vector<Chunk>& chunks, Embedder& embedder) {
    if (facts.empty()) throw ValidationError("score_chunks requires a non-empty fact set");
    if (chunks.empty()) throw ValidationError("score_chunks requires non-empty chunks");

    std::vector<EmbeddingVector> fact_vectors = embedder.embed_batch(facts);
    std::vector<std::string> chunk_texts;
    chunk_texts.reserve(chunks.size());
    for (const auto& chunk : chunks) chunk_texts.push_back(chunk.text);
    std::vector<EmbeddingVector> chunk_vectors = embedder.embed_batch(chunk_texts);

    std::vector<ScoredChunk> scored;
    scored.reserve(chunks.size());
    for (size_t j = 0; j < chunks.size(); ++j) {
        ScoredChunk sc;
        sc.chunk = chunks[j];
        sc.score = cosine(fact_vectors[0], chunk_vectors[j]);
        sc.best_fact_index = 0;
        for (size_t i = 1; i < fact_vectors.size(); ++i) {
            double s = cosine(fact_vectors[i], chunk_vectors[j]);
            if (s > sc.score) { // strict: ties keep the lowest fact index
                sc.score = s;
                sc.best_fact_index = static_cast<int>(i);
            }
        }
        scored.push_back(std::move(sc));
    }
    return scored;
}

AlignedContext select_top_k(const std::vector<ScoredChunk>& scored, int k) {
    if (scored.empty()) throw ValidationError("select_top_k requires non-empty scores");
    if (k < 1) throw ValidationError("k must be >= 1");

    std::vector<size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    const size_t take = std::min<size_t>(static_cast<size_t>(k), scored.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), [&](size_t a, size_t b) {
                          if (scored[a].score != scored[b].score)
                              return scored[a].score > scored[b].score;
                          return scored[a].chunk.index < scored[b].chunk.index;
                      });
    order.resize(take);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scored[a].chunk.index < scored[b].chunk.index;
    });

    AlignedContext aligned;
    aligned.k = k;
    std::vector<std::string> texts;
    for (size_t idx : order) {
        aligned.selected.push_back(scored[idx]);
        texts.push_back(scored[idx].chunk.text);
    }
    aligned.assembled_text = util::join(texts, "\n");
    return aligned;
}

} // namespace faithfulrag
