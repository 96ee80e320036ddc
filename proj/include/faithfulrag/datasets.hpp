#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace faithfulrag {

enum class SchemaKind { generic, kre_conflict, multiple_choice, realtime };
const char* schema_name(SchemaKind kind);
SchemaKind parse_schema(const std::string& name);

enum class Scenario { conflict, golden };
const char* scenario_name(Scenario scenario);
Scenario parse_scenario(const std::string& name);

/// One benchmark question. `context` is the context under test (the negative
/// context on conflict datasets); `golden_context` is the unmodified passage;
/// `substituted_answers` are the conflict-injected answers, disjoint from the
/// golds after normalization.
struct QAItem {
    std::string id;
    std::string question;
    std::string context;
    std::optional<std::string> golden_context;
    std::vector<std::string> answers;
    std::optional<std::vector<std::string>> substituted_answers;
    std::optional<std::vector<std::string>> options;
    std::optional<bool> answerable;
};

struct Dataset {
    std::string name;
    std::vector<QAItem> items;
    std::string schema_version;

    /// Content digest over the canonical item serializations.
    std::string content_sha256() const;
};

/// Load and validate a JSONL dataset. All per-line problems are collected and
/// reported together, with line numbers.
Dataset load_jsonl(const std::filesystem::path& path, SchemaKind schema);

/// Canonical JSON form of one item (fixed key order, absent optionals omitted).
nlohmann::ordered_json item_to_json(const QAItem& item);

/// Canonical JSONL serialization of a whole dataset.
std::string serialize_dataset(const Dataset& dataset);

std::string select_context(const QAItem& item, Scenario scenario);

struct ManifestEntry {
    std::string name;
    std::string path; // relative to the manifest file
    std::string schema;
    std::string sha256;
};

/// Benchmark-suite manifest: [{name, path, schema, sha256}], sha256 verified
/// against the file on disk.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         bool verify_digests = true);

} // namespace faithfulrag
