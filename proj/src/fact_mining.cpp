#include "faithfulrag/fact_mining.hpp"

#include <cctype>
#include <chrono>
#include <optional>
#include <unordered_set>

#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

namespace {

constexpr size_t kMaxFactLength = 400;

/// Returns the content after a leading list marker, or nullopt if the line
/// carries none. Accepts "1." / "12)" (with or without a following space)
/// and "-", "*", "•" followed by a space.
std::optional<std::string> strip_list_marker(const std::string& line) {
    std::string s = util::trim(line);
    if (s.empty()) return std::nullopt;

    size_t i = 0;
    while (i < s.size() && i < 4 && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
        size_t rest = i + 1;
        while (rest < s.size() && s[rest] == ' ') ++rest;
        if (rest < s.size()) return std::string(s.substr(rest));
        return std::nullopt;
    }
    if ((s[0] == '-' || s[0] == '*') && s.size() > 1 && s[1] == ' ')
        return util::trim(s.substr(2));
    // UTF-8 bullet "•" = e2 80 a2
    if (s.size() > 3 && static_cast<unsigned char>(s[0]) == 0xe2 &&
        static_cast<unsigned char>(s[1]) == 0x80 && static_cast<unsigned char>(s[2]) == 0xa2)
        return util::trim(s.substr(3));
    return std::nullopt;
}

ListItem split_title_body(const std::string& content) {
    // "Title: body" with a reasonably short title; otherwise no title.
    size_t colon = content.find(": ");
    if (colon != std::string::npos && colon > 0 && colon <= 80) {
        std::string title = util::trim(content.substr(0, colon));
        std::string body = util::trim(content.substr(colon + 2));
        if (!title.empty() && !body.empty()) return {title, body};
    }
    return {"", util::trim(content)};
}

} // namespace

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string current;
    for (char c : text) {
        current.push_back(c);
        if (c == '.' || c == '!' || c == '?') {
            std::string trimmed = util::trim(current);
            if (!trimmed.empty()) sentences.push_back(trimmed);
            current.clear();
        }
    }
    std::string tail = util::trim(current);
    if (!tail.empty()) sentences.push_back(tail);
    return sentences;
}

std::vector<ListItem> parse_list_items(const std::string& text) {
    std::vector<std::string> lines = util::split_lines(text);

    // Pass 1: marked list lines; unmarked lines continue the previous item.
    std::vector<std::string> marked;
    bool any_marked = false;
    for (const auto& line : lines) {
        if (util::trim(line).empty()) continue;
        if (auto content = strip_list_marker(line)) {
            marked.push_back(*content);
            any_marked = true;
        } else if (any_marked && !marked.empty()) {
            marked.back() += " " + util::trim(line);
        }
    }
    std::vector<ListItem> items;
    if (any_marked) {
        for (const auto& content : marked) items.push_back(split_title_body(content));
        if (!items.empty()) return items;
    }

    // Pass 2: "Title: body" lines.
    std::vector<ListItem> titled;
    bool any_titled = false;
    for (const auto& line : lines) {
        std::string trimmed = util::trim(line);
        if (trimmed.empty()) continue;
        ListItem item = split_title_body(trimmed);
        if (!item.title.empty()) any_titled = true;
        titled.push_back(std::move(item));
    }
    if (any_titled && !titled.empty()) return titled;

    // Pass 3: sentence split.
    for (const auto& sentence : split_sentences(text)) items.push_back({"", sentence});
    if (items.empty()) throw ParseFailure("no list items recoverable from completion");
    return items;
}

std::string SelfKnowledge::rendered() const {
    std::vector<std::string> lines;
    lines.reserve(claims.size());
    for (const auto& claim : claims)
        lines.push_back(claim.title.empty() ? claim.body : claim.title + ": " + claim.body);
    return util::join(lines, "\n");
}

FactMiner::FactMiner(Gateway& gateway, const TemplateStore& templates, std::string model,
                     int max_items)
    : gateway_(gateway), templates_(templates), model_(std::move(model)),
      max_items_(max_items) {}

std::string FactMiner::complete_stage(const std::string& stage, const PromptTemplate& tpl,
                                      const Bindings& bindings,
                                      std::vector<StageRecord>* records) {
    ChatRequest request;
    request.model = model_;
    request.messages = tpl.render(bindings);

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

SelfKnowledge FactMiner::extract_self_knowledge(const std::string& question,
                                                const std::vector<std::string>& options,
                                                std::vector<StageRecord>* records) {
    if (util::trim(question).empty()) throw ValidationError("question is empty");
    std::string completion =
        complete_stage("self_knowledge", templates_.get("self_knowledge"),
                       {{"question", question_block(question, options)}}, records);

    SelfKnowledge knowledge;
    for (auto& item : parse_list_items(completion)) {
        if (item.body.empty()) continue;
        knowledge.claims.push_back({item.title, item.body});
        if (static_cast<int>(knowledge.claims.size()) >= max_items_) break;
    }
    if (knowledge.claims.empty())
        throw ParseFailure("self-knowledge completion yielded no claims");
    return knowledge;
}

SelfContext FactMiner::generate_self_context(const std::string& question,
                                             const std::vector<std::string>& options,
                                             const SelfKnowledge& knowledge,
                                             std::vector<StageRecord>* records) {
    if (knowledge.claims.empty())
        throw ValidationError("self-context generation requires at least one claim");
    std::string completion = complete_stage("self_context", templates_.get("self_context"),
                                            {{"question", question_block(question, options)},
                                             {"knowledge", knowledge.rendered()}},
                                            records);
    if (util::trim(completion).empty())
        throw faithfulrag::EmptyCompletion("self-context completion is empty");
    return {completion};
}

SelfContext FactMiner::generate_self_context_unconditioned(
    const std::string& question, const std::vector<std::string>& options,
    std::vector<StageRecord>* records) {
    if (util::trim(question).empty()) throw ValidationError("question is empty");
    std::string completion =
        complete_stage("self_context", templates_.get("self_context_no_knowledge"),
                       {{"question", question_block(question, options)}}, records);
    if (util::trim(completion).empty())
        throw faithfulrag::EmptyCompletion("self-context completion is empty");
    return {completion};
}

SelfFactSet FactMiner::extract_self_facts(const SelfContext& self_context,
                                          std::vector<StageRecord>* records) {
    if (util::trim(self_context.text).empty())
        throw ValidationError("self-context is empty");
    std::string completion = complete_stage("self_fact", templates_.get("self_fact"),
                                            {{"context", self_context.text}}, records);

    SelfFactSet facts;
    facts.source = self_context.text;
    std::unordered_set<std::string> seen;
    for (auto& item : parse_list_items(completion)) {
        std::string fact = item.title.empty() ? item.body : item.title + ": " + item.body;
        if (fact.size() > kMaxFactLength) fact.resize(kMaxFactLength);
        if (fact.empty()) continue;
        if (!seen.insert(util::to_lower(fact)).second) continue; // case-insensitive dedup
        facts.facts.push_back(std::move(fact));
        if (static_cast<int>(facts.facts.size()) >= max_items_) break;
    }
    if (facts.facts.empty()) throw ParseFailure("self-fact completion yielded no facts");
    return facts;
}

SelfFactSet FactMiner::mine(const std::string& question, const std::vector<std::string>& options,
                            std::vector<StageRecord>* records, SelfKnowledge* knowledge_out,
                            SelfContext* context_out) {
    auto guarded = [](const std::string& stage, auto&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const ItemFailure&) {
            throw;
        } catch (const Error& e) {
            throw ItemFailure(stage, std::string(e.kind()) + ": " + e.what());
        }
    };

    SelfKnowledge knowledge = guarded(
        "self_knowledge", [&] { return extract_self_knowledge(question, options, records); });
    if (knowledge_out) *knowledge_out = knowledge;
    SelfContext context = guarded("self_context", [&] {
        return generate_self_context(question, options, knowledge, records);
    });
    if (context_out) *context_out = context;
    return guarded("self_fact", [&] { return extract_self_facts(context, records); });
}

} // namespace faithfulrag
