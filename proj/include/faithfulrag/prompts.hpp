#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "faithfulrag/chat.hpp"

namespace faithfulrag {

using Bindings = std::map<std::string, std::string>;

/// Substitute {name} placeholders from bindings. "{{" and "}}" are literal
/// braces; a referenced placeholder without a binding raises RenderError.
std::string render_placeholders(std::string_view text, const Bindings& bindings);

struct PromptTemplate {
    std::string name;
    std::string system; // empty = no system message
    std::string user;
    std::vector<std::pair<std::string, std::string>> few_shot; // (user, assistant)

    std::vector<ChatMessage> render(const Bindings& bindings) const;
};

/// Parse the on-disk template format: [system] / [user] sections plus
/// optional repeated [few_shot.user] / [few_shot.assistant] pairs.
PromptTemplate parse_template(const std::string& name, const std::string& text);

/// Named prompt templates. builtin() carries the compiled-in copies of
/// data/templates/; load_dir() overrides or adds from *.txt files.
class TemplateStore {
public:
    static TemplateStore builtin();

    void load_dir(const std::filesystem::path& dir);
    const PromptTemplate& get(const std::string& name) const;
    bool has(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

/// "A. first\nB. second\n..." block for multiple-choice prompts.
std::string format_options(const std::vector<std::string>& options);

/// The question binding as prompts see it: the question text, plus an
/// Options block when choices are supplied.
std::string question_block(const std::string& question, const std::vector<std::string>& options);

} // namespace faithfulrag
