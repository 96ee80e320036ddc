#include "faithfulrag/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>
#include <unordered_map>

#include "faithfulrag/digest.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/fact_mining.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

void PipelineConfig::validate() const {
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (max_list_items < 1) throw ConfigError("max_list_items must be >= 1");
}

nlohmann::ordered_json PipelineConfig::to_json() const {
    nlohmann::ordered_json backend_json;
    backend_json["kind"] = backend.kind == BackendConfig::Kind::http ? "http" : "scripted";
    if (backend.kind == BackendConfig::Kind::http) {
        backend_json["base_url"] = backend.base_url;
        backend_json["api_key_env"] = backend.api_key_env;
    } else {
        backend_json["script_id"] = backend.id();
    }
    backend_json["retry"] = {{"max_attempts", backend.retry.max_attempts},
                             {"backoff_ms", backend.retry.backoff_ms}};

    nlohmann::ordered_json embedder_json;
    if (embedder.kind == EmbedderConfig::Kind::http) {
        embedder_json["kind"] = "http";
        embedder_json["base_url"] = embedder.base_url;
        embedder_json["model"] = embedder.model;
        embedder_json["batch_size"] = embedder.batch_size;
    } else {
        embedder_json["kind"] = "bag_of_words_mock";
        embedder_json["dim"] = embedder.mock_dim;
    }

    nlohmann::ordered_json j;
    j["model"] = model;
    j["chunk_size"] = chunk_size;
    j["top_k"] = top_k;
    j["variant"] = variant_name(variant);
    j["think_mode"] = think_mode_name(think_mode);
    j["backend"] = std::move(backend_json);
    j["embedder"] = std::move(embedder_json);
    j["correctness"] = match_mode_name(correctness);
    j["concurrency"] = concurrency;
    j["template_dir"] = template_dir;
    j["cache_dir"] = cache_dir;
    j["max_list_items"] = max_list_items;
    return j;
}

const char* baseline_name(BaselineKind kind) {
    return kind == BaselineKind::no_context ? "no_context" : "full_context";
}

namespace {

/// Run fn(0..n-1) across up to `workers` threads. fn must not throw.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    const int thread_count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (thread_count == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) {
        threads.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& thread : threads) thread.join();
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ItemFailure&) {
        throw;
    } catch (const Error& e) {
        throw ItemFailure(stage, std::string(e.kind()) + ": " + e.what());
    }
}

nlohmann::ordered_json records_to_json(const std::vector<StageRecord>& records) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& record : records) {
        arr.push_back({{"stage", record.stage},
                       {"prompt", record.prompt},
                       {"completion", record.completion},
                       {"ms", record.ms}});
    }
    return arr;
}

nlohmann::ordered_json think_to_json(const ThinkOutcome& outcome) {
    return {{"initial_answer", outcome.initial_answer},
            {"sufficient", outcome.sufficient},
            {"fused_context", outcome.fused_context},
            {"reasoning", outcome.reasoning},
            {"final_answer", outcome.final_answer},
            {"fallback_used", outcome.fallback_used},
            {"raw_completions", outcome.raw_completions}};
}

} // namespace

Pipeline::Pipeline(PipelineConfig config, Transport* chat_transport, Transport* embed_transport)
    : config_(std::move(config)), templates_(TemplateStore::builtin()) {
    config_.validate();
    if (!config_.template_dir.empty()) templates_.load_dir(config_.template_dir);
    if (!config_.cache_dir.empty()) cache_ = std::make_unique<ResponseCache>(config_.cache_dir);
    gateway_ = std::make_unique<Gateway>(config_.backend, cache_.get(), chat_transport,
                                         std::max(2 * config_.concurrency, 4));
    embedder_ = std::make_unique<Embedder>(config_.embedder, cache_.get(), embed_transport);
}

ItemOutcome Pipeline::run_item(const QAItem& item, Scenario scenario) {
    return run_item(item, scenario, config_.variant);
}

ItemOutcome Pipeline::run_item(const QAItem& item, Scenario scenario, PipelineVariant variant) {
    auto total_start = std::chrono::steady_clock::now();
    const std::vector<std::string> options = item.options.value_or(std::vector<std::string>{});
    const std::string original = select_context(item, scenario);

    FactMiner miner(*gateway_, templates_, config_.model, config_.max_list_items);
    SelfThinker thinker(*gateway_, templates_, config_.model);
    std::vector<StageRecord> records;

    nlohmann::ordered_json trace;
    trace["item_id"] = item.id;
    trace["scenario"] = scenario_name(scenario);
    trace["variant"] = variant_name(variant);
    trace["config"] = config_.to_json();
    trace["item"] = item_to_json(item);
    trace["question_block"] = question_block(item.question, options);

    SelfKnowledge knowledge;
    bool has_knowledge = false;
    SelfContext self_context;
    bool has_context = false;
    SelfFactSet facts;
    std::vector<ScoredChunk> scored;
    AlignedContext aligned;
    bool alignment_fallback = false;

    if (variant == PipelineVariant::only_cot) {
        trace["self_knowledge"] = nullptr;
        trace["self_knowledge_skipped"] = "variant only_cot";
        trace["self_context"] = nullptr;
        trace["self_context_skipped"] = "variant only_cot";
        trace["self_facts"] = nullptr;
        trace["self_facts_skipped"] = "variant only_cot";
        trace["chunks"] = nullptr;
        trace["aligned_text"] = nullptr;
    } else {
        if (variant == PipelineVariant::no_self_knowledge) {
            trace["self_knowledge"] = nullptr;
            trace["self_knowledge_skipped"] = "variant no_self_knowledge";
            self_context = run_stage("self_context", [&] {
                return miner.generate_self_context_unconditioned(item.question, options,
                                                                 &records);
            });
            has_context = true;
        } else {
            knowledge = run_stage("self_knowledge", [&] {
                return miner.extract_self_knowledge(item.question, options, &records);
            });
            has_knowledge = true;
            auto claims = nlohmann::ordered_json::array();
            for (const auto& claim : knowledge.claims)
                claims.push_back({{"title", claim.title}, {"body", claim.body}});
            trace["self_knowledge"] = {{"claims", std::move(claims)}};

            if (variant == PipelineVariant::no_self_context) {
                // Facts are distilled straight from the abstract claims.
                self_context = SelfContext{knowledge.rendered()};
                trace["self_context_skipped"] = "variant no_self_context";
            } else {
                self_context = run_stage("self_context", [&] {
                    return miner.generate_self_context(item.question, options, knowledge,
                                                       &records);
                });
            }
            has_context = true;
        }
        trace["self_context"] = self_context.text;

        try {
            facts = miner.extract_self_facts(self_context, &records);
        } catch (const ParseFailure&) {
            // A completion with no recoverable facts degrades to vanilla RAG.
        } catch (const Error& e) {
            throw ItemFailure("self_fact", std::string(e.kind()) + ": " + e.what());
        }
        trace["self_facts"] = facts.facts;

        std::vector<Chunk> chunks =
            run_stage("alignment", [&] { return chunk_context(original, config_.chunk_size); });
        if (!facts.facts.empty()) {
            scored = run_stage("alignment",
                               [&] { return score_chunks(facts.facts, chunks, *embedder_); });
            aligned = run_stage("alignment", [&] { return select_top_k(scored, config_.top_k); });
        } else {
            aligned.assembled_text = original;
            aligned.k = config_.top_k;
            alignment_fallback = true;
        }
        trace["alignment_fallback"] = alignment_fallback;

        auto chunks_json = nlohmann::ordered_json::array();
        std::vector<bool> is_selected(chunks.size(), false);
        for (const auto& sc : aligned.selected)
            is_selected[static_cast<size_t>(sc.chunk.index)] = true;
        for (size_t i = 0; i < chunks.size(); ++i) {
            nlohmann::ordered_json cj;
            cj["index"] = chunks[i].index;
            cj["text"] = chunks[i].text;
            cj["token_range"] = {chunks[i].token_range.first, chunks[i].token_range.second};
            if (i < scored.size()) {
                cj["score"] = scored[i].score;
                cj["best_fact_index"] = scored[i].best_fact_index;
            } else {
                cj["score"] = nullptr;
                cj["best_fact_index"] = nullptr;
            }
            cj["selected"] = static_cast<bool>(is_selected[i]);
            chunks_json.push_back(std::move(cj));
        }
        trace["chunks"] = std::move(chunks_json);
        trace["aligned_text"] = aligned.assembled_text;
    }
    (void)has_knowledge;
    (void)has_context;

    ThinkOutcome think = run_stage("self_think", [&] {
        return thinker.answer_variant(variant, item.question, options, scored, aligned, original,
                                      config_.think_mode, &records);
    });
    trace["think"] = think_to_json(think);
    trace["final_answer"] = think.final_answer;
    trace["stages"] = records_to_json(records);
    trace["timings_ms"] = {
        {"total",
         std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - total_start)
             .count()}};

    ItemOutcome outcome;
    outcome.prediction.item_id = item.id;
    outcome.prediction.scenario = scenario_name(scenario);
    outcome.prediction.variant = variant_name(variant);
    outcome.prediction.contextual_answer = think.final_answer;
    outcome.prediction.final_answer = think.final_answer;
    outcome.trace = std::move(trace);
    return outcome;
}

Prediction Pipeline::run_baseline(const QAItem& item, BaselineKind which, Scenario scenario,
                                  nlohmann::ordered_json* trace) {
    const std::vector<std::string> options = item.options.value_or(std::vector<std::string>{});
    Bindings bindings{{"question", question_block(item.question, options)}};
    const char* template_name =
        which == BaselineKind::no_context ? "baseline_no_context" : "baseline_full_context";
    if (which == BaselineKind::full_context)
        bindings["context"] = select_context(item, scenario);

    ChatRequest request;
    request.model = config_.model;
    request.messages = templates_.get(template_name).render(bindings);
    ChatResponse response = run_stage(std::string("baseline_") + baseline_name(which),
                                      [&] { return gateway_->complete(request); });
    std::string answer = extract_answer(response.content, options);

    if (trace) {
        auto prompt = nlohmann::ordered_json::array();
        for (const auto& m : request.messages)
            prompt.push_back({{"role", role_name(m.role)}, {"content", m.content}});
        (*trace)[baseline_name(which)] = {{"prompt", std::move(prompt)},
                                          {"completion", response.content},
                                          {"answer", answer}};
    }

    Prediction prediction;
    prediction.item_id = item.id;
    prediction.scenario = scenario_name(scenario);
    prediction.variant = std::string("baseline_") + baseline_name(which);
    prediction.contextual_answer = answer;
    prediction.final_answer = answer;
    return prediction;
}

SuiteResult Pipeline::run_suite(const Dataset& dataset, const std::vector<Scenario>& scenarios,
                                const std::vector<PipelineVariant>& variants) {
    if (dataset.items.empty()) throw ValidationError("run_suite requires a non-empty dataset");
    if (scenarios.empty() || variants.empty())
        throw ValidationError("run_suite requires at least one scenario and one variant");

    SuiteResult result;
    result.dataset_sha256 = dataset.content_sha256();
    result.multi_combo = scenarios.size() * variants.size() > 1;
    {
        std::string material = result.dataset_sha256 + "\n" + config_.to_json().dump() + "\n";
        for (auto s : scenarios) material += scenario_name(s), material += ",";
        for (auto v : variants) material += variant_name(v), material += ",";
        result.run_id = "r" + digest::sha256_hex(material).substr(0, 12);
    }

    // Parametric baseline: once per item, shared across every combination.
    struct BaselineResult {
        std::optional<std::string> answer;
        nlohmann::ordered_json trace;
        std::string error;
    };
    std::vector<BaselineResult> baselines(dataset.items.size());
    parallel_for(dataset.items.size(), config_.concurrency, [&](size_t i) {
        try {
            nlohmann::ordered_json trace;
            Prediction p = run_baseline(dataset.items[i], BaselineKind::no_context,
                                        Scenario::conflict, &trace);
            baselines[i] = {p.final_answer, std::move(trace), ""};
        } catch (const std::exception& e) {
            baselines[i] = {std::nullopt, nlohmann::ordered_json{}, e.what()};
        }
    });

    EvalReport report;
    report.schema_version = std::string("report-v1+") + kStopwordsVersion;
    report.config = config_.to_json();

    for (Scenario scenario : scenarios) {
        for (PipelineVariant variant : variants) {
            const size_t n = dataset.items.size();
            std::vector<ItemOutcome> outcomes(n);
            std::vector<int> status(n, 0); // 0 = evaluated, 1 = skipped, 2 = failed
            std::vector<std::string> notes(n);

            parallel_for(n, config_.concurrency, [&](size_t i) {
                const QAItem& item = dataset.items[i];
                if (scenario == Scenario::golden && !item.golden_context) {
                    status[i] = 1;
                    notes[i] = "no golden_context";
                    return;
                }
                try {
                    outcomes[i] = run_item(item, scenario, variant);
                    outcomes[i].prediction.parametric_answer = baselines[i].answer;
                    if (!baselines[i].trace.is_null() && !baselines[i].trace.empty())
                        outcomes[i].trace["baselines"] = baselines[i].trace;
                    if (!baselines[i].error.empty())
                        outcomes[i].trace["baseline_error"] = baselines[i].error;
                } catch (const ItemFailure& e) {
                    status[i] = 2;
                    notes[i] = e.what();
                } catch (const std::exception& e) {
                    status[i] = 2;
                    notes[i] = e.what();
                }
            });

            std::vector<Prediction> predictions;
            std::vector<QAItem> evaluated_items;
            for (size_t i = 0; i < n; ++i) {
                if (status[i] != 0) continue;
                predictions.push_back(outcomes[i].prediction);
                evaluated_items.push_back(dataset.items[i]);
                result.traces.push_back({scenario_name(scenario), variant_name(variant),
                                         dataset.items[i].id, std::move(outcomes[i].trace)});
            }

            std::vector<ItemRow> evaluated_rows;
            VariantAggregate agg =
                aggregate(predictions, evaluated_items, config_.correctness,
                          scenario_name(scenario), variant_name(variant), &evaluated_rows);

            std::unordered_map<std::string, ItemRow*> row_by_id;
            for (auto& row : evaluated_rows) row_by_id[row.id] = &row;
            for (size_t i = 0; i < n; ++i) {
                const QAItem& item = dataset.items[i];
                if (status[i] == 0) {
                    report.rows.push_back(*row_by_id.at(item.id));
                } else {
                    ItemRow row;
                    row.id = item.id;
                    row.scenario = scenario_name(scenario);
                    row.variant = variant_name(variant);
                    if (status[i] == 1) {
                        row.skipped_reason = notes[i];
                        ++agg.skipped;
                    } else {
                        row.failure = notes[i];
                        ++agg.failed;
                        report.failed_item_ids.push_back(item.id);
                    }
                    report.rows.push_back(std::move(row));
                }
            }
            report.aggregates.push_back(std::move(agg));
        }
    }
    result.report = std::move(report);
    return result;
}

} // namespace faithfulrag
