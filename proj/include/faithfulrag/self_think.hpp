#pragma once

#include <string>
#include <vector>

#include "faithfulrag/alignment.hpp"
#include "faithfulrag/fact_mining.hpp"
#include "faithfulrag/gateway.hpp"
#include "faithfulrag/prompts.hpp"

namespace faithfulrag {

/// Which pipeline ablation governs a run. `full` is the complete method; the
/// others disable or substitute one stage each.
enum class PipelineVariant {
    full,
    no_self_context,     // facts distilled straight from the abstract claims
    no_self_knowledge,   // narrative generated from the question alone
    no_self_think,       // aligned context simply prepended to the original
    no_think_annotation, // selected chunks highlighted in-place instead of thought through
    no_reasoning_cot,    // structured reasoning replaced by naive CoT
    only_cot,            // naive CoT over the original context, no pipeline
    no_cot,              // full pipeline, final answer without step-by-step reasoning
};

const char* variant_name(PipelineVariant variant);
PipelineVariant parse_variant(const std::string& name);
const std::vector<std::string>& variant_names();

enum class ThinkMode { single_call, two_call };
const char* think_mode_name(ThinkMode mode);
ThinkMode parse_think_mode(const std::string& name);

struct ThinkOutcome {
    std::string initial_answer;
    bool sufficient = true;
    std::string fused_context;
    std::string reasoning;
    std::string final_answer;
    std::vector<std::string> raw_completions;
    bool fallback_used = false; // final answer taken without an "Answer:" marker
};

struct ExtractedAnswer {
    std::string text;
    bool fallback = false;
};

/// Substring after the last "Answer:" marker, trimmed; falls back to the
/// whole trimmed completion. A bare option letter resolves to the option text
/// when options are supplied. Total: never throws.
ExtractedAnswer extract_answer_ex(const std::string& completion,
                                  const std::vector<std::string>& options = {});
std::string extract_answer(const std::string& completion,
                           const std::vector<std::string>& options = {});

/// Reasoning portion of a completion: the text before the final "Answer:"
/// marker, with a leading "Reason:" label stripped.
std::string extract_reasoning(const std::string& completion);

/// Sufficiency parsed from a "[Context Check]" line; a missing line means
/// sufficient.
bool parse_sufficiency(const std::string& completion);

/// Original context rebuilt from its chunks with every selected chunk wrapped
/// as "[important chunk: ...]" and nothing else altered.
std::string annotate_chunks(const std::vector<ScoredChunk>& scored,
                            const AlignedContext& aligned);

/// Conflict-aware answer generation over the aligned and original contexts,
/// including the ablation variants.
class SelfThinker {
public:
    SelfThinker(Gateway& gateway, const TemplateStore& templates, std::string model);

    ThinkOutcome self_think_answer(const std::string& question,
                                   const std::vector<std::string>& options,
                                   const AlignedContext& aligned, const std::string& original,
                                   ThinkMode mode, std::vector<StageRecord>* records = nullptr);

    ThinkOutcome answer_variant(PipelineVariant variant, const std::string& question,
                                const std::vector<std::string>& options,
                                const std::vector<ScoredChunk>& scored,
                                const AlignedContext& aligned, const std::string& original,
                                ThinkMode mode, std::vector<StageRecord>* records = nullptr);

private:
    std::string complete_stage(const std::string& stage, const std::string& template_name,
                               const Bindings& bindings, std::vector<StageRecord>* records);
    ThinkOutcome single_completion_outcome(const std::string& stage,
                                           const std::string& template_name,
                                           const Bindings& bindings,
                                           const std::vector<std::string>& options,
                                           std::vector<StageRecord>* records);

    Gateway& gateway_;
    const TemplateStore& templates_;
    std::string model_;
};

} // namespace faithfulrag
