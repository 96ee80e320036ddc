#include "faithfulrag/datasets.hpp"

#include <unordered_map>
#include <unordered_set>

#include "faithfulrag/digest.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/normalize.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

const char* schema_name(SchemaKind kind) {
    switch (kind) {
        case SchemaKind::generic: return "generic";
        case SchemaKind::kre_conflict: return "kre_conflict";
        case SchemaKind::multiple_choice: return "multiple_choice";
        case SchemaKind::realtime: return "realtime";
    }
    return "generic";
}

SchemaKind parse_schema(const std::string& name) {
    if (name == "generic") return SchemaKind::generic;
    if (name == "kre_conflict") return SchemaKind::kre_conflict;
    if (name == "multiple_choice") return SchemaKind::multiple_choice;
    if (name == "realtime") return SchemaKind::realtime;
    throw ConfigError("unknown dataset schema '" + name +
                      "'; valid: generic, kre_conflict, multiple_choice, realtime");
}

const char* scenario_name(Scenario scenario) {
    return scenario == Scenario::conflict ? "conflict" : "golden";
}

Scenario parse_scenario(const std::string& name) {
    if (name == "conflict") return Scenario::conflict;
    if (name == "golden") return Scenario::golden;
    throw ConfigError("unknown scenario '" + name + "'; valid: conflict, golden");
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const std::string& field) {
    std::vector<std::string> out;
    for (const auto& v : j.at(field)) {
        if (!v.is_string()) throw SchemaError("field '" + field + "' must contain strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

/// Per-line validation. Throws SchemaError with a field-specific message.
QAItem parse_item(const nlohmann::json& j, SchemaKind schema) {
    QAItem item;
    for (const char* field : {"id", "question", "context"}) {
        if (!j.contains(field) || !j[field].is_string() ||
            j[field].get<std::string>().empty())
            throw SchemaError(std::string("missing or empty required field '") + field + "'");
    }
    item.id = j["id"].get<std::string>();
    item.question = j["question"].get<std::string>();
    item.context = j["context"].get<std::string>();

    if (!j.contains("answers") || !j["answers"].is_array() || j["answers"].empty())
        throw SchemaError("missing or empty required field 'answers'");
    item.answers = string_list(j, "answers");

    if (j.contains("golden_context")) {
        if (!j["golden_context"].is_string())
            throw SchemaError("field 'golden_context' must be a string");
        item.golden_context = j["golden_context"].get<std::string>();
    }
    if (j.contains("substituted_answers")) {
        if (!j["substituted_answers"].is_array())
            throw SchemaError("field 'substituted_answers' must be an array");
        item.substituted_answers = string_list(j, "substituted_answers");
    }
    if (j.contains("options")) {
        if (!j["options"].is_array())
            throw SchemaError("field 'options' must be an array");
        item.options = string_list(j, "options");
    }
    if (j.contains("answerable")) {
        if (!j["answerable"].is_boolean())
            throw SchemaError("field 'answerable' must be a boolean");
        item.answerable = j["answerable"].get<bool>();
    }

    switch (schema) {
        case SchemaKind::generic: break;
        case SchemaKind::kre_conflict:
            if (!item.golden_context)
                throw SchemaError("kre_conflict schema requires field 'golden_context'");
            if (!item.substituted_answers || item.substituted_answers->empty())
                throw SchemaError("kre_conflict schema requires field 'substituted_answers'");
            break;
        case SchemaKind::multiple_choice:
            if (!item.options)
                throw SchemaError("multiple_choice schema requires field 'options'");
            break;
        case SchemaKind::realtime:
            if (!item.answerable)
                throw SchemaError("realtime schema requires field 'answerable'");
            break;
    }

    if (item.options) {
        if (item.options->size() < 2)
            throw SchemaError("field 'options' must list at least 2 choices");
        for (const auto& answer : item.answers) {
            int matches = 0;
            for (const auto& option : *item.options)
                if (util::to_lower(option) == util::to_lower(answer)) ++matches;
            if (matches > 1)
                throw SchemaError("answer '" + answer +
                                  "' matches more than one option case-insensitively");
        }
    }
    if (item.substituted_answers) {
        for (const auto& substituted : *item.substituted_answers)
            for (const auto& answer : item.answers)
                if (normalize_answer(substituted) == normalize_answer(answer))
                    throw SchemaError("substituted answer '" + substituted +
                                      "' is not disjoint from gold answer '" + answer +
                                      "' after normalization");
    }
    return item;
}

} // namespace

Dataset load_jsonl(const std::filesystem::path& path, SchemaKind schema) {
    if (!std::filesystem::exists(path))
        throw IoError("dataset file does not exist: " + path.string());
    const std::string content = util::read_file(path);

    Dataset dataset;
    dataset.name = path.stem().string();
    dataset.schema_version = "qaitem-v1";

    std::vector<std::string> schema_errors;
    std::vector<std::string> duplicate_errors;
    std::unordered_map<std::string, int> first_line_of_id;

    int line_number = 0;
    for (const auto& line : util::split_lines(content)) {
        ++line_number;
        if (util::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            schema_errors.push_back("line " + std::to_string(line_number) +
                                    ": not a JSON object");
            continue;
        }
        try {
            QAItem item = parse_item(j, schema);
            auto [it, inserted] = first_line_of_id.try_emplace(item.id, line_number);
            if (!inserted) {
                duplicate_errors.push_back("line " + std::to_string(line_number) +
                                           ": duplicate id '" + item.id + "' (first seen line " +
                                           std::to_string(it->second) + ")");
                continue;
            }
            dataset.items.push_back(std::move(item));
        } catch (const SchemaError& e) {
            schema_errors.push_back("line " + std::to_string(line_number) + ": " + e.what());
        }
    }

    if (!schema_errors.empty()) {
        for (const auto& d : duplicate_errors) schema_errors.push_back(d);
        throw SchemaError(path.string() + ": " + util::join(schema_errors, "; "));
    }
    if (!duplicate_errors.empty())
        throw DuplicateId(path.string() + ": " + util::join(duplicate_errors, "; "));
    if (dataset.items.empty()) throw SchemaError(path.string() + ": dataset has no items");
    return dataset;
}

nlohmann::ordered_json item_to_json(const QAItem& item) {
    nlohmann::ordered_json j;
    j["id"] = item.id;
    j["question"] = item.question;
    j["context"] = item.context;
    if (item.golden_context) j["golden_context"] = *item.golden_context;
    j["answers"] = item.answers;
    if (item.substituted_answers) j["substituted_answers"] = *item.substituted_answers;
    if (item.options) j["options"] = *item.options;
    if (item.answerable) j["answerable"] = *item.answerable;
    return j;
}

std::string serialize_dataset(const Dataset& dataset) {
    std::string out;
    for (const auto& item : dataset.items) {
        out += item_to_json(item).dump();
        out.push_back('\n');
    }
    return out;
}

std::string Dataset::content_sha256() const {
    return digest::sha256_hex(serialize_dataset(*this));
}

std::string select_context(const QAItem& item, Scenario scenario) {
    if (scenario == Scenario::conflict) return item.context;
    if (!item.golden_context)
        throw MissingGoldenContext("item '" + item.id + "' has no golden_context");
    return *item.golden_context;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         bool verify_digests) {
    nlohmann::json j = nlohmann::json::parse(util::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("datasets"))
        throw SchemaError("manifest is not a JSON object with a datasets array: " +
                          path.string());
    std::vector<ManifestEntry> entries;
    for (const auto& e : j["datasets"]) {
        ManifestEntry entry;
        entry.name = e.at("name").get<std::string>();
        entry.path = e.at("path").get<std::string>();
        entry.schema = e.at("schema").get<std::string>();
        entry.sha256 = e.at("sha256").get<std::string>();
        parse_schema(entry.schema); // validate early
        if (verify_digests) {
            auto file = path.parent_path() / entry.path;
            std::string actual = digest::sha256_file(file);
            if (actual != entry.sha256)
                throw SchemaError("manifest digest mismatch for " + entry.name + ": expected " +
                                  entry.sha256 + ", file has " + actual);
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace faithfulrag
