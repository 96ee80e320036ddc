#include "faithfulrag/self_think.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

const char* variant_name(PipelineVariant variant) {
    switch (variant) {
        case PipelineVariant::full: return "full";
        case PipelineVariant::no_self_context: return "no_self_context";
        case PipelineVariant::no_self_knowledge: return "no_self_knowledge";
        case PipelineVariant::no_self_think: return "no_self_think";
        case PipelineVariant::no_think_annotation: return "no_think_annotation";
        case PipelineVariant::no_reasoning_cot: return "no_reasoning_cot";
        case PipelineVariant::only_cot: return "only_cot";
        case PipelineVariant::no_cot: return "no_cot";
    }
    return "full";
}

const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names = {
        "full",         "no_self_context",     "no_self_knowledge", "no_self_think",
        "no_think_annotation", "no_reasoning_cot", "only_cot",        "no_cot"};
    return names;
}

PipelineVariant parse_variant(const std::string& name) {
    static const std::vector<PipelineVariant> order = {
        PipelineVariant::full,          PipelineVariant::no_self_context,
        PipelineVariant::no_self_knowledge, PipelineVariant::no_self_think,
        PipelineVariant::no_think_annotation, PipelineVariant::no_reasoning_cot,
        PipelineVariant::only_cot,      PipelineVariant::no_cot};
    const auto& names = variant_names();
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return order[i];
    throw ConfigError("unknown variant '" + name + "'; valid variants: " +
                      util::join(names, ", "));
}

const char* think_mode_name(ThinkMode mode) {
    return mode == ThinkMode::single_call ? "single_call" : "two_call";
}

ThinkMode parse_think_mode(const std::string& name) {
    if (name == "single_call") return ThinkMode::single_call;
    if (name == "two_call") return ThinkMode::two_call;
    throw ConfigError("unknown think mode '" + name + "'; valid: single_call, two_call");
}

namespace {

// Case-insensitive find of "answer:".
size_t find_last_answer_marker(const std::string& text) {
    const std::string lowered = util::to_lower(text);
    return lowered.rfind("answer:");
}

std::string strip_wrapping(std::string s) {
    s = util::trim(s);
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')')
        s = util::trim(s.substr(1, s.size() - 2));
    while (!s.empty() && (s.back() == '.' || s.back() == ')' || s.back() == ':')) s.pop_back();
    s = util::trim(s);
    return s;
}

} // namespace

ExtractedAnswer extract_answer_ex(const std::string& completion,
                                  const std::vector<std::string>& options) {
    ExtractedAnswer out;
    size_t pos = find_last_answer_marker(completion);
    if (pos != std::string::npos) {
        out.text = util::trim(completion.substr(pos + 7));
        if (out.text.empty()) {
            out.text = util::trim(completion);
            out.fallback = true;
        }
    } else {
        out.text = util::trim(completion);
        out.fallback = true;
    }

    if (!options.empty()) {
        std::string candidate = strip_wrapping(out.text);
        if (candidate.size() > 7 && util::to_lower(candidate).rfind("option ", 0) == 0)
            candidate = util::trim(candidate.substr(7));
        if (candidate.size() == 1 && std::isalpha(static_cast<unsigned char>(candidate[0]))) {
            size_t index =
                static_cast<size_t>(std::toupper(static_cast<unsigned char>(candidate[0])) - 'A');
            if (index < options.size()) out.text = options[index];
        }
    }
    return out;
}

std::string extract_answer(const std::string& completion,
                           const std::vector<std::string>& options) {
    return extract_answer_ex(completion, options).text;
}

std::string extract_reasoning(const std::string& completion) {
    size_t pos = find_last_answer_marker(completion);
    std::string reasoning =
        pos == std::string::npos ? util::trim(completion) : util::trim(completion.substr(0, pos));
    const std::string lowered = util::to_lower(reasoning);
    if (lowered.rfind("reason:", 0) == 0) reasoning = util::trim(reasoning.substr(7));
    return reasoning;
}

bool parse_sufficiency(const std::string& completion) {
    for (const auto& line : util::split_lines(completion)) {
        const std::string lowered = util::to_lower(line);
        if (!util::contains(lowered, "[context check]")) continue;
        if (util::contains(lowered, "no contextual supplementation") ||
            util::contains(lowered, "no supplementation"))
            return true;
        if (util::contains(lowered, "insufficient") ||
            util::contains(lowered, "not sufficient") ||
            util::contains(lowered, "supplementation needed") ||
            util::contains(lowered, "supplementation required") ||
            util::contains(lowered, "supplementation is needed"))
            return false;
        return true;
    }
    return true; // no [Context Check] line means the facts sufficed
}

std::string annotate_chunks(const std::vector<ScoredChunk>& scored,
                            const AlignedContext& aligned) {
    std::vector<bool> selected(scored.size(), false);
    for (const auto& sc : aligned.selected) {
        if (sc.chunk.index >= 0 && static_cast<size_t>(sc.chunk.index) < selected.size())
            selected[static_cast<size_t>(sc.chunk.index)] = true;
    }
    std::vector<std::string> parts;
    parts.reserve(scored.size());
    for (const auto& sc : scored) {
        if (selected[static_cast<size_t>(sc.chunk.index)])
            parts.push_back("[important chunk: " + sc.chunk.text + "]");
        else
            parts.push_back(sc.chunk.text);
    }
    return util::join(parts, " ");
}

SelfThinker::SelfThinker(Gateway& gateway, const TemplateStore& templates, std::string model)
    : gateway_(gateway), templates_(templates), model_(std::move(model)) {}

std::string SelfThinker::complete_stage(const std::string& stage,
                                        const std::string& template_name,
                                        const Bindings& bindings,
                                        std::vector<StageRecord>* records) {
    ChatRequest request;
    request.model = model_;
    request.messages = templates_.get(template_name).render(bindings);

    auto start = std::chrono::steady_clock::now();
    ChatResponse response = gateway_.complete(request);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();

    if (records) {
        StageRecord record;
        record.stage = stage;
        record.prompt = nlohmann::ordered_json::array();
        for (const auto& m : request.messages)
            record.prompt.push_back({{"role", role_name(m.role)}, {"content", m.content}});
        record.completion = response.content;
        record.ms = ms;
        records->push_back(std::move(record));
    }
    return response.content;
}

ThinkOutcome SelfThinker::single_completion_outcome(const std::string& stage,
                                                    const std::string& template_name,
                                                    const Bindings& bindings,
                                                    const std::vector<std::string>& options,
                                                    std::vector<StageRecord>* records) {
    std::string completion = complete_stage(stage, template_name, bindings, records);
    ExtractedAnswer extracted = extract_answer_ex(completion, options);
    if (extracted.text.empty())
        throw AnswerParseFailure("no extractable answer in completion for stage " + stage);

    ThinkOutcome outcome;
    outcome.raw_completions.push_back(completion);
    outcome.final_answer = extracted.text;
    outcome.fallback_used = extracted.fallback;
    outcome.initial_answer = extracted.text;
    outcome.reasoning = extract_reasoning(completion);
    return outcome;
}

ThinkOutcome SelfThinker::self_think_answer(const std::string& question,
                                            const std::vector<std::string>& options,
                                            const AlignedContext& aligned,
                                            const std::string& original, ThinkMode mode,
                                            std::vector<StageRecord>* records) {
    if (util::trim(aligned.assembled_text).empty())
        throw ValidationError("self-think requires a non-empty aligned context");
    if (util::trim(original).empty())
        throw ValidationError("self-think requires a non-empty original context");

    const std::string block = question_block(question, options);

    if (mode == ThinkMode::single_call) {
        ThinkOutcome outcome = single_completion_outcome("self_think", "self_think",
                                                         {{"aligned_context", aligned.assembled_text},
                                                          {"original_context", original},
                                                          {"question", block}},
                                                         options, records);
        outcome.sufficient = parse_sufficiency(outcome.raw_completions.front());
        outcome.fused_context = outcome.sufficient ? aligned.assembled_text
                                                   : aligned.assembled_text + "\n" + original;
        return outcome;
    }

    // two_call: think over the aligned context alone, fuse when insufficient,
    // then reason over the fused context in a second completion.
    std::string think_completion = complete_stage(
        "think", "think", {{"aligned_context", aligned.assembled_text}, {"question", block}},
        records);

    ThinkOutcome outcome;
    outcome.raw_completions.push_back(think_completion);
    outcome.sufficient = parse_sufficiency(think_completion);
    size_t initial_pos = util::to_lower(think_completion).rfind("initial answer:");
    outcome.initial_answer =
        initial_pos != std::string::npos
            ? util::trim(util::split_lines(think_completion.substr(initial_pos + 15)).front())
            : extract_answer(think_completion, options);
    outcome.fused_context = outcome.sufficient ? aligned.assembled_text
                                               : aligned.assembled_text + "\n" + original;

    std::string reason_completion = complete_stage(
        "reason", "reason", {{"context", outcome.fused_context}, {"question", block}}, records);
    outcome.raw_completions.push_back(reason_completion);
    ExtractedAnswer extracted = extract_answer_ex(reason_completion, options);
    if (extracted.text.empty())
        throw AnswerParseFailure("no extractable answer in reasoning completion");
    outcome.final_answer = extracted.text;
    outcome.fallback_used = extracted.fallback;
    outcome.reasoning = extract_reasoning(reason_completion);
    return outcome;
}

ThinkOutcome SelfThinker::answer_variant(PipelineVariant variant, const std::string& question,
                                         const std::vector<std::string>& options,
                                         const std::vector<ScoredChunk>& scored,
                                         const AlignedContext& aligned,
                                         const std::string& original, ThinkMode mode,
                                         std::vector<StageRecord>* records) {
    const std::string block = question_block(question, options);

    switch (variant) {
        case PipelineVariant::full:
        case PipelineVariant::no_self_context:
        case PipelineVariant::no_self_knowledge:
            return self_think_answer(question, options, aligned, original, mode, records);

        case PipelineVariant::no_cot: {
            ThinkOutcome outcome = single_completion_outcome(
                "self_think_no_cot", "self_think_no_cot",
                {{"aligned_context", aligned.assembled_text},
                 {"original_context", original},
                 {"question", block}},
                options, records);
            outcome.sufficient = parse_sufficiency(outcome.raw_completions.front());
            outcome.fused_context = outcome.sufficient
                                        ? aligned.assembled_text
                                        : aligned.assembled_text + "\n" + original;
            return outcome;
        }

        case PipelineVariant::no_self_think: {
            ThinkOutcome outcome = single_completion_outcome(
                "variant_no_self_think", "variant_no_self_think",
                {{"aligned_context", aligned.assembled_text},
                 {"original_context", original},
                 {"question", block}},
                options, records);
            outcome.sufficient = false; // the prompt always carries the original context
            outcome.fused_context = aligned.assembled_text + "\n" + original;
            return outcome;
        }

        case PipelineVariant::no_think_annotation: {
            std::string annotated = annotate_chunks(scored, aligned);
            ThinkOutcome outcome = single_completion_outcome(
                "variant_annotation", "variant_annotation",
                {{"context", annotated}, {"question", block}}, options, records);
            outcome.sufficient = false;
            outcome.fused_context = annotated;
            return outcome;
        }

        case PipelineVariant::no_reasoning_cot: {
            // Keep the think stage, then replace structured reasoning with
            // naive CoT over the fused context.
            std::string think_completion = complete_stage(
                "think", "think",
                {{"aligned_context", aligned.assembled_text}, {"question", block}}, records);
            bool sufficient = parse_sufficiency(think_completion);
            std::string fused =
                sufficient ? aligned.assembled_text : aligned.assembled_text + "\n" + original;
            ThinkOutcome outcome = single_completion_outcome(
                "naive_cot", "variant_naive_cot", {{"context", fused}, {"question", block}},
                options, records);
            outcome.raw_completions.insert(outcome.raw_completions.begin(), think_completion);
            outcome.sufficient = sufficient;
            outcome.fused_context = fused;
            size_t initial_pos = util::to_lower(think_completion).rfind("initial answer:");
            if (initial_pos != std::string::npos)
                outcome.initial_answer = util::trim(
                    util::split_lines(think_completion.substr(initial_pos + 15)).front());
            return outcome;
        }

        case PipelineVariant::only_cot: {
            ThinkOutcome outcome = single_completion_outcome(
                "naive_cot", "variant_naive_cot", {{"context", original}, {"question", block}},
                options, records);
            outcome.sufficient = false;
            outcome.fused_context = original;
            return outcome;
        }
    }
    throw ConfigError("unhandled variant");
}

} // namespace faithfulrag
