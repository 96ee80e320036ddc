#include "faithfulrag/prompts.hpp"

#include <cctype>

#include "faithfulrag/builtin_data.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

std::string render_placeholders(std::string_view text, const Bindings& bindings) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '{' && i + 1 < text.size() && text[i + 1] == '{') {
            out.push_back('{');
            i += 2;
            continue;
        }
        if (c == '}' && i + 1 < text.size() && text[i + 1] == '}') {
            out.push_back('}');
            i += 2;
            continue;
        }
        if (c == '{') {
            size_t j = i + 1;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            if (j > i + 1 && j < text.size() && text[j] == '}') {
                std::string key(text.substr(i + 1, j - i - 1));
                auto it = bindings.find(key);
                if (it == bindings.end())
                    throw RenderError("no binding for placeholder {" + key + "}");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::vector<ChatMessage> PromptTemplate::render(const Bindings& bindings) const {
    std::vector<ChatMessage> messages;
    try {
        if (!system.empty())
            messages.push_back({Role::system, render_placeholders(system, bindings)});
        for (const auto& [shot_user, shot_assistant] : few_shot) {
            messages.push_back({Role::user, render_placeholders(shot_user, bindings)});
            messages.push_back({Role::assistant, render_placeholders(shot_assistant, bindings)});
        }
        messages.push_back({Role::user, render_placeholders(user, bindings)});
    } catch (const RenderError& e) {
        throw RenderError("template '" + name + "': " + e.what());
    }
    return messages;
}

namespace {

std::string strip_outer_blank_lines(const std::vector<std::string>& lines) {
    size_t begin = 0;
    size_t end = lines.size();
    while (begin < end && util::trim(lines[begin]).empty()) ++begin;
    while (end > begin && util::trim(lines[end - 1]).empty()) --end;
    std::string out;
    for (size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

} // namespace

PromptTemplate parse_template(const std::string& name, const std::string& text) {
    PromptTemplate tpl;
    tpl.name = name;

    std::string current_section;
    std::vector<std::string> buffer;
    std::vector<std::pair<std::string, std::string>> sections;
    auto flush = [&] {
        if (!current_section.empty())
            sections.emplace_back(current_section, strip_outer_blank_lines(buffer));
        buffer.clear();
    };
    for (const auto& line : util::split_lines(text)) {
        std::string trimmed = util::trim(line);
        if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') {
            flush();
            current_section = trimmed.substr(1, trimmed.size() - 2);
            continue;
        }
        if (current_section.empty() && !trimmed.empty())
            throw ConfigError("template '" + name + "': content before first [section] header");
        buffer.push_back(line);
    }
    flush();

    std::string pending_shot_user;
    bool have_shot_user = false;
    for (auto& [section, content] : sections) {
        if (section == "system") {
            tpl.system = content;
        } else if (section == "user") {
            tpl.user = content;
        } else if (section == "few_shot.user") {
            if (have_shot_user)
                throw ConfigError("template '" + name + "': few_shot.user without assistant");
            pending_shot_user = content;
            have_shot_user = true;
        } else if (section == "few_shot.assistant") {
            if (!have_shot_user)
                throw ConfigError("template '" + name + "': few_shot.assistant without user");
            tpl.few_shot.emplace_back(pending_shot_user, content);
            have_shot_user = false;
        } else {
            throw ConfigError("template '" + name + "': unknown section [" + section + "]");
        }
    }
    if (have_shot_user)
        throw ConfigError("template '" + name + "': dangling few_shot.user");
    if (tpl.user.empty())
        throw ConfigError("template '" + name + "': missing [user] section");
    return tpl;
}

TemplateStore TemplateStore::builtin() {
    TemplateStore store;
    for (const auto& [name, text] : embedded::templates)
        store.templates_[std::string(name)] = parse_template(std::string(name), std::string(text));
    return store;
}

void TemplateStore::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("template directory does not exist: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string name = entry.path().stem().string();
        templates_[name] = parse_template(name, util::read_file(entry.path()));
    }
}

const PromptTemplate& TemplateStore::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    return it->second;
}

bool TemplateStore::has(const std::string& name) const { return templates_.contains(name); }

std::vector<std::string> TemplateStore::names() const {
    std::vector<std::string> out;
    out.reserve(templates_.size());
    for (const auto& [name, tpl] : templates_) out.push_back(name);
    return out;
}

std::string format_options(const std::vector<std::string>& options) {
    std::string out;
    for (size_t i = 0; i < options.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out.push_back(static_cast<char>('A' + i));
        out += ". ";
        out += options[i];
    }
    return out;
}

std::string question_block(const std::string& question, const std::vector<std::string>& options) {
    if (options.empty()) return question;
    return question + "\n\nOptions:\n" + format_options(options);
}

} // namespace faithfulrag
