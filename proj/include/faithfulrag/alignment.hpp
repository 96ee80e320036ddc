#pragma once

#include <string>
#include <utility>
#include <vector>

#include "faithfulrag/embedder.hpp"

namespace faithfulrag {

/// One fixed-size window of the original context, in whitespace-token
/// coordinates. Chunks partition the token sequence; joining their texts with
/// single spaces restores the whitespace-normalized input.
struct Chunk {
    int index = 0;
    std::string text;
    std::pair<int, int> token_range; // [start, end)
};

std::vector<Chunk> chunk_context(const std::string& context, int size = 20);

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;      // max cosine over all self-facts
    int best_fact_index = 0; // lowest index achieving the max
};

/// Score every chunk against every fact; a chunk's score is its maximum
/// cosine over the fact set.
std::vector<ScoredChunk> score_chunks(const std::vector<std::string>& facts,
                                      const std::vector<Chunk>& chunks, Embedder& embedder);

struct AlignedContext {
    std::vector<ScoredChunk> selected; // document order
    std::string assembled_text;        // selected texts joined by newlines
    int k = 5;
};

/// The min(k, n) highest-scoring chunks, ties broken by lower chunk index,
/// assembled in original document order.
AlignedContext select_top_k(const std::vector<ScoredChunk>& scored, int k);

} // namespace faithfulrag
