#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace faithfulrag {

/// Version marker of the shipped stop-word list; changing the list bumps it
/// together with EvalReport.schema_version.
extern const char* const kStopwordsVersion;

const std::unordered_set<std::string>& default_stopwords();

/// Lowercase, ASCII punctuation replaced by spaces, whitespace collapsed.
std::string strip_punct_lower(std::string_view text);

/// strip_punct_lower plus stop-word removal: the normal form predictions and
/// gold answers are compared in.
std::string normalize_answer(std::string_view text);

} // namespace faithfulrag
