#include "faithfulrag/normalize.hpp"

#include <cctype>

#include "faithfulrag/builtin_data.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

const char* const kStopwordsVersion = "stopwords-v1";

const std::unordered_set<std::string>& default_stopwords() {
    static const std::unordered_set<std::string> words = [] {
        std::unordered_set<std::string> out;
        for (const auto& line : util::split_lines(embedded::stopwords)) {
            std::string word = util::trim(line);
            if (word.empty() || word.front() == '#') continue;
            out.insert(util::to_lower(word));
        }
        return out;
    }();
    return words;
}

std::string strip_punct_lower(std::string_view text) {
    std::string spaced;
    spaced.reserve(text.size());
    for (unsigned char c : text)
        spaced.push_back(std::ispunct(c) ? ' ' : static_cast<char>(std::tolower(c)));
    return util::join(util::split_whitespace(spaced), " ");
}

std::string normalize_answer(std::string_view text) {
    const auto& stopwords = default_stopwords();
    std::vector<std::string> kept;
    for (auto& token : util::split_whitespace(strip_punct_lower(text)))
        if (!stopwords.contains(token)) kept.push_back(std::move(token));
    return util::join(kept, " ");
}

} // namespace faithfulrag
