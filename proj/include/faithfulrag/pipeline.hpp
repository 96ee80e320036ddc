#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faithfulrag/datasets.hpp"
#include "faithfulrag/embedder.hpp"
#include "faithfulrag/evaluation.hpp"
#include "faithfulrag/gateway.hpp"
#include "faithfulrag/prompts.hpp"
#include "faithfulrag/self_think.hpp"

namespace faithfulrag {

struct PipelineConfig {
    std::string model = "default";
    int chunk_size = 20;
    int top_k = 5;
    PipelineVariant variant = PipelineVariant::full;
    ThinkMode think_mode = ThinkMode::single_call;
    BackendConfig backend;
    EmbedderConfig embedder;
    MatchMode correctness = MatchMode::contains;
    int concurrency = 4;
    std::string template_dir; // empty = builtin templates
    std::string cache_dir;    // empty = no persistent cache
    int max_list_items = 12;

    void validate() const;

    /// Deterministic snapshot echoed into run manifests and reports. Secrets
    /// never appear (only the env var name does).
    nlohmann::ordered_json to_json() const;
};

enum class BaselineKind { no_context, full_context };
const char* baseline_name(BaselineKind kind);

struct ItemOutcome {
    Prediction prediction;
    nlohmann::ordered_json trace;
    bool failed = false;
    std::string failure_stage;
    std::string failure_message;
};

struct SuiteTrace {
    std::string scenario;
    std::string variant;
    std::string item_id;
    nlohmann::ordered_json trace;
};

struct SuiteResult {
    EvalReport report;
    std::vector<SuiteTrace> traces;
    std::string run_id;
    std::string dataset_sha256;
    bool multi_combo = false; // trace layout adds a {scenario}_{variant} level
};

/// Executes the full workflow per question: self-fact mining, contextual
/// alignment, conflict-aware answering, with per-stage tracing and the
/// baselines the evaluator needs.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config, Transport* chat_transport = nullptr,
                      Transport* embed_transport = nullptr);

    /// One question through the configured variant. Throws ItemFailure tagged
    /// with the failing stage.
    ItemOutcome run_item(const QAItem& item, Scenario scenario);
    ItemOutcome run_item(const QAItem& item, Scenario scenario, PipelineVariant variant);

    /// No-context (parametric) or full-context baseline for an item.
    Prediction run_baseline(const QAItem& item, BaselineKind which, Scenario scenario,
                            nlohmann::ordered_json* trace = nullptr);

    /// Every (scenario, variant) combination over the dataset. The parametric
    /// baseline is computed once per item and shared across combinations; a
    /// failed item never aborts the batch.
    SuiteResult run_suite(const Dataset& dataset, const std::vector<Scenario>& scenarios,
                          const std::vector<PipelineVariant>& variants);

    Gateway& gateway() { return *gateway_; }
    Embedder& embedder() { return *embedder_; }
    const TemplateStore& templates() const { return templates_; }
    const PipelineConfig& config() const { return config_; }

private:
    PipelineConfig config_;
    TemplateStore templates_;
    std::unique_ptr<ResponseCache> cache_;
    std::unique_ptr<Gateway> gateway_;
    std::unique_ptr<Embedder> embedder_;
};

} // namespace faithfulrag
