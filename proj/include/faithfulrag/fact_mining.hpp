#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "faithfulrag/gateway.hpp"
#include "faithfulrag/prompts.hpp"

namespace faithfulrag {

/// One abstract knowledge claim; title may be empty when the completion gave
/// bare list items.
struct Claim {
    std::string title;
    std::string body;
};

struct SelfKnowledge {
    std::vector<Claim> claims;

    /// "Title: body" lines, the exact text embedded into downstream prompts.
    std::string rendered() const;
};

struct SelfContext {
    std::string text;
};

struct SelfFactSet {
    std::vector<std::string> facts;
    std::string source; // the self-context the facts were distilled from
};

/// Execution record of one templated LLM call.
struct StageRecord {
    std::string stage;
    nlohmann::ordered_json prompt; // rendered messages
    std::string completion;
    double ms = 0.0;
};

struct ListItem {
    std::string title;
    std::string body;
};

/// Total list parser: numbered ("1.", "2)"), bulleted ("-", "*", "•"), or
/// "Title: body" lines, with sentence splitting as the last resort. Returns
/// at least one item or throws ParseFailure, never an empty success.
std::vector<ListItem> parse_list_items(const std::string& text);

/// Split prose into trimmed sentences on ".!?".
std::vector<std::string> split_sentences(const std::string& text);

/// The three-stage self-fact mining pipeline: externalize abstract knowledge,
/// ground it in a generated narrative, distill the narrative into discrete
/// facts. Stateless across questions given a gateway.
class FactMiner {
public:
    FactMiner(Gateway& gateway, const TemplateStore& templates, std::string model,
              int max_items = 12);

    SelfKnowledge extract_self_knowledge(const std::string& question,
                                         const std::vector<std::string>& options,
                                         std::vector<StageRecord>* records = nullptr);

    /// The generating prompt embeds every claim verbatim.
    SelfContext generate_self_context(const std::string& question,
                                      const std::vector<std::string>& options,
                                      const SelfKnowledge& knowledge,
                                      std::vector<StageRecord>* records = nullptr);

    /// Variant path without self-knowledge: the narrative is generated from
    /// the question alone.
    SelfContext generate_self_context_unconditioned(const std::string& question,
                                                    const std::vector<std::string>& options,
                                                    std::vector<StageRecord>* records = nullptr);

    SelfFactSet extract_self_facts(const SelfContext& self_context,
                                   std::vector<StageRecord>* records = nullptr);

    /// Full composition; stage errors are rethrown as ItemFailure tagged with
    /// the failing stage's name.
    SelfFactSet mine(const std::string& question, const std::vector<std::string>& options,
                     std::vector<StageRecord>* records = nullptr,
                     SelfKnowledge* knowledge_out = nullptr, SelfContext* context_out = nullptr);

private:
    std::string complete_stage(const std::string& stage, const PromptTemplate& tpl,
                               const Bindings& bindings, std::vector<StageRecord>* records);

    Gateway& gateway_;
    const TemplateStore& templates_;
    std::string model_;
    int max_items_;
};

} // namespace faithfulrag
