#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace faithfulrag {

/// Base class for all library errors. `kind()` is the stable machine-readable
/// name; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define FAITHFULRAG_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                                     \
        explicit Name(const std::string& message) : Error(#Name, message) {}  \
    }

FAITHFULRAG_DEFINE_ERROR(ValidationError);
FAITHFULRAG_DEFINE_ERROR(ConfigError);
FAITHFULRAG_DEFINE_ERROR(NetworkError);
FAITHFULRAG_DEFINE_ERROR(ProtocolError);
FAITHFULRAG_DEFINE_ERROR(ScriptMiss);
FAITHFULRAG_DEFINE_ERROR(EmptyInput);
FAITHFULRAG_DEFINE_ERROR(ProviderError);
FAITHFULRAG_DEFINE_ERROR(DimensionMismatch);
FAITHFULRAG_DEFINE_ERROR(ParseFailure);
FAITHFULRAG_DEFINE_ERROR(EmptyCompletion);
FAITHFULRAG_DEFINE_ERROR(RenderError);
FAITHFULRAG_DEFINE_ERROR(EmptyContext);
FAITHFULRAG_DEFINE_ERROR(SchemaError);
FAITHFULRAG_DEFINE_ERROR(DuplicateId);
FAITHFULRAG_DEFINE_ERROR(IoError);
FAITHFULRAG_DEFINE_ERROR(MissingGoldenContext);
FAITHFULRAG_DEFINE_ERROR(MissingParametric);
FAITHFULRAG_DEFINE_ERROR(CoverageError);
FAITHFULRAG_DEFINE_ERROR(AnswerParseFailure);

#undef FAITHFULRAG_DEFINE_ERROR

/// Failure of a single pipeline item, tagged with the stage that raised it.
struct ItemFailure : Error {
    ItemFailure(std::string stage_name, const std::string& message)
        : Error("ItemFailure", "[" + stage_name + "] " + message),
          stage(std::move(stage_name)) {}

    std::string stage;
};

} // namespace faithfulrag
