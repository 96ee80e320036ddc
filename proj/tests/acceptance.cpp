// Acceptance suite: one pass/fail line per criterion, each with its runtime
// bound enforced. Exits non-zero if any required criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "faithfulrag/alignment.hpp"
#include "faithfulrag/chat.hpp"
#include "faithfulrag/cli.hpp"
#include "faithfulrag/embedder.hpp"
#include "faithfulrag/evaluation.hpp"
#include "faithfulrag/pipeline.hpp"
#include "faithfulrag/self_think.hpp"
#include "faithfulrag/util.hpp"
#include "support.hpp"

using namespace faithfulrag;

namespace {

struct Criterion {
    std::string name;
    double budget_ms;
    std::function<void()> body;
    bool optional = false;
};

struct Skip {
    std::string reason;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

std::string random_text(std::mt19937_64& rng, int tokens) {
    static const char* words[] = {"tide", "stone", "orbit", "vapor", "glass", "ember",
                                  "north", "cable", "prism", "delta"};
    std::string out;
    for (int i = 0; i < tokens; ++i) {
        if (i > 0) out.push_back(rng() % 9 == 0 ? '\t' : ' ');
        out += words[rng() % std::size(words)];
        if (rng() % 4 == 0) out += std::to_string(rng() % 1000);
    }
    return out;
}

// --------------------------------------------------------------- criteria

void chunker_partition_property() {
    std::mt19937_64 rng(101);
    for (int round = 0; round < 1000; ++round) {
        const int tokens = 1 + static_cast<int>(rng() % 500);
        const int size = 1 + static_cast<int>(rng() % 50);
        const std::string text = random_text(rng, tokens);
        const auto chunks = chunk_context(text, size);

        require(chunks.size() == static_cast<size_t>((tokens + size - 1) / size),
                "chunk count is not ceil(T/size)");
        int cursor = 0;
        std::vector<std::string> parts;
        for (size_t i = 0; i < chunks.size(); ++i) {
            require(chunks[i].token_range.first == cursor, "chunks overlap or leave a gap");
            const int width = chunks[i].token_range.second - chunks[i].token_range.first;
            if (i + 1 < chunks.size())
                require(width == size, "non-final chunk width differs from size");
            require(width >= 1, "empty chunk");
            cursor = chunks[i].token_range.second;
            parts.push_back(chunks[i].text);
        }
        require(cursor == tokens, "chunks do not cover the input");
        require(util::join(parts, " ") == util::join(util::split_whitespace(text), " "),
                "rejoined chunks differ from the whitespace-normalized input");
    }
}

void cosine_properties() {
    std::mt19937_64 rng(202);
    std::normal_distribution<double> dist(0.0, 1.0);
    const size_t dim = 48;
    auto unit = [&] {
        EmbeddingVector v;
        v.values.resize(dim);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (auto& x : v.values) {
                x = dist(rng);
                norm += x * x;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (auto& x : v.values) x /= norm;
        return v;
    };
    for (int round = 0; round < 10000; ++round) {
        EmbeddingVector a = unit();
        EmbeddingVector b = unit();
        const double ab = cosine(a, b);
        require(ab == cosine(b, a), "cosine is not symmetric");
        require(ab >= -1.0 - 1e-9 && ab <= 1.0 + 1e-9, "cosine out of bounds");
        require(std::abs(cosine(a, a) - 1.0) <= 1e-9, "self-similarity differs from 1");
    }
}

std::vector<ScoredChunk> synthetic_scores(const std::vector<double>& scores) {
    std::vector<ScoredChunk> out;
    for (size_t i = 0; i < scores.size(); ++i) {
        ScoredChunk sc;
        sc.chunk.index = static_cast<int>(i);
        sc.chunk.text = "c" + std::to_string(i);
        sc.score = scores[i];
        out.push_back(sc);
    }
    return out;
}

void topk_oracle_equivalence() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto oracle = [](const std::vector<ScoredChunk>& scored, int k) {
        std::vector<int> order(scored.size());
        for (size_t i = 0; i < scored.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
            return a < b;
        });
        order.resize(std::min<size_t>(order.size(), static_cast<size_t>(k)));
        std::sort(order.begin(), order.end());
        return order;
    };
    auto check_instance = [&](const std::vector<double>& scores) {
        auto scored = synthetic_scores(scores);
        for (int k : {1, 5, 20}) {
            auto aligned = select_top_k(scored, k);
            auto expected = oracle(scored, k);
            require(aligned.selected.size() == expected.size(), "top-k size mismatch");
            for (size_t i = 0; i < expected.size(); ++i)
                require(aligned.selected[i].chunk.index == expected[i],
                        "top-k selection differs from the full-sort oracle");
        }
    };
    for (int round = 0; round < 100; ++round) {
        const size_t n = 1 + rng() % 200;
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng() % 3 == 0 ? 0.5 : dist(rng);
        check_instance(scores);
    }
    check_instance(std::vector<double>(64, 0.25)); // crafted all-equal ties
}

void alignment_oracle() {
    std::mt19937_64 rng(404);
    Embedder embedder(EmbedderConfig::mock(256));
    for (int round = 0; round < 50; ++round) {
        const int fact_count = 1 + static_cast<int>(rng() % 6);
        std::vector<std::string> facts;
        for (int i = 0; i < fact_count; ++i)
            facts.push_back(random_text(rng, 3 + static_cast<int>(rng() % 10)));
        const auto chunks =
            chunk_context(random_text(rng, 10 + static_cast<int>(rng() % 120)), 6);
        const auto scored = score_chunks(facts, chunks, embedder);

        // Independent brute force: re-embed one at a time, exhaustive pairwise max.
        const auto fact_vectors = embedder.embed_batch(facts);
        require(scored.size() == chunks.size(), "scored size mismatch");
        for (size_t j = 0; j < chunks.size(); ++j) {
            const auto chunk_vector = embedder.embed_batch({chunks[j].text})[0];
            double best = -2.0;
            for (const auto& fv : fact_vectors) best = std::max(best, cosine(fv, chunk_vector));
            require(std::abs(scored[j].score - best) <= 1e-9,
                    "per-chunk max differs from the brute-force oracle");
        }
    }
}

void memorization_ratio_formula() {
    require(*memorization_ratio(2, 8) == 0.2, "M_R(2,8) != 0.2");
    require(*memorization_ratio(0, 5) == 0.0, "M_R(0,5) != 0");
    require(*memorization_ratio(5, 0) == 1.0, "M_R(5,0) != 1");
    require(!memorization_ratio(0, 0).has_value(), "M_R(0,0) must be undefined");
}

void error_classifier_truth_table() {
    struct Row {
        const char* parametric;
        const char* contextual;
        const char* gold;
        const char* context;
        ErrorCase expected;
    };
    const Row rows[12] = {
        {"Paris", "Paris", "Paris", "anything at all", ErrorCase::correct},
        {"london", "The answer is Paris.", "paris", "ctx", ErrorCase::correct},
        {"x", "Planetary gravity will become stronger.", "planetary gravity stronger", "ctx",
         ErrorCase::correct},
        {"PARIS!", "paris", "rome", "no mention", ErrorCase::case1_overconfidence},
        {"the Paris", "paris!!", "rome", "even mentions paris",
         ErrorCase::case1_overconfidence},
        {"Mount Hood", "mount hood", "mount rainier", "slopes of mount hood",
         ErrorCase::case1_overconfidence},
        {"rome", "Lyon", "paris", "the city of Lyon is cited",
         ErrorCase::case2_incorrect_match},
        {"rome", "LYON.", "paris", "lyon appears here", ErrorCase::case2_incorrect_match},
        {"eleven", "11 meters", "eleven meters", "the survey says 11 meters",
         ErrorCase::case2_incorrect_match},
        {"rome", "Madrid", "paris", "no such city in text", ErrorCase::case3_other},
        {"rome", "will become stronger", "weaker", "plain noise", ErrorCase::case3_other},
        {"alpha", "beta gamma", "kappa", "zeta eta theta", ErrorCase::case3_other},
    };
    int index = 0;
    for (const auto& row : rows) {
        const ErrorCase got =
            classify_error(row.parametric, row.contextual, {row.gold}, {}, row.context);
        require(got == row.expected,
                "truth-table row " + std::to_string(index) + " misclassified");
        ++index;
    }
}

void table6_end_to_end() {
    const auto fixtures = testsupport::data_dir() / "fixtures";
    const auto j = nlohmann::json::parse(util::read_file(fixtures / "table6_item.json"));
    QAItem item;
    item.id = j["id"];
    item.question = j["question"];
    item.context = j["context"];
    item.answers = j["answers"].get<std::vector<std::string>>();
    item.options = j["options"].get<std::vector<std::string>>();

    PipelineConfig config;
    config.backend = BackendConfig::scripted(load_script(fixtures / "table6_script.json"));
    config.embedder = EmbedderConfig::mock(256);
    Pipeline pipeline(config);
    const ItemOutcome outcome = pipeline.run_item(item, Scenario::conflict);

    require(outcome.prediction.final_answer == "Planetary gravity will become stronger.",
            "final answer differs from the worked example");
    const std::vector<std::string> expected_facts = {
        "A meteorite impact can transfer momentum to a planet, potentially increasing its "
        "rotation speed.",
        "The conservation of angular momentum is a fundamental principle in physics that "
        "states the total angular momentum of a closed system remains constant over time.",
        "The momentum of a meteorite is transferred to a planet upon impact, causing its "
        "rotation to accelerate.",
    };
    require(outcome.trace["self_facts"].get<std::vector<std::string>>() == expected_facts,
            "fact list differs from the worked example");
    require(util::contains(outcome.trace["think"]["reasoning"].get<std::string>(),
                           "[Fact Analysis]"),
            "reasoning lacks the [Fact Analysis] structure");
}

void ablation_prompt_conformance() {
    Gateway gateway(BackendConfig::scripted({{"Context:", "Answer: ok"}}));
    TemplateStore store = TemplateStore::builtin();
    SelfThinker thinker(gateway, store, "m");

    std::vector<ScoredChunk> scored;
    for (int i = 0; i < 3; ++i) {
        ScoredChunk sc;
        sc.chunk.index = i;
        sc.chunk.text = "chunk" + std::to_string(i);
        sc.score = 1.0 - 0.1 * i;
        scored.push_back(sc);
    }
    AlignedContext aligned = select_top_k(scored, 2); // chunk0, chunk1

    std::vector<StageRecord> records;
    thinker.answer_variant(PipelineVariant::no_self_think, "the question?", {}, scored, aligned,
                           "THEORIGINAL", ThinkMode::single_call, &records);
    const std::string v1 = records[0].prompt[0]["content"].get<std::string>();
    require(v1.rfind("Context: ", 0) == 0, "variant 1 prompt does not open with Context:");
    const size_t aligned_pos = v1.find(aligned.assembled_text);
    const size_t original_pos = v1.find("THEORIGINAL");
    require(aligned_pos != std::string::npos && original_pos != std::string::npos &&
                aligned_pos < original_pos,
            "variant 1 does not place aligned text strictly before the original");

    records.clear();
    thinker.answer_variant(PipelineVariant::no_think_annotation, "the question?", {}, scored,
                           aligned, "chunk0 chunk1 chunk2", ThinkMode::single_call, &records);
    const std::string v2 = records[0].prompt[0]["content"].get<std::string>();
    require(util::contains(v2, "[important chunk: chunk0]") &&
                util::contains(v2, "[important chunk: chunk1]"),
            "variant 2 does not wrap the selected chunks");
    require(!util::contains(v2, "[important chunk: chunk2]"),
            "variant 2 wraps an unselected chunk");
    require(util::contains(v2, "'[important chunk: xxx]'") &&
                util::contains(v2, "Reason: (reason) Answer:(answer)"),
            "variant 2 instructions missing");

    records.clear();
    thinker.answer_variant(PipelineVariant::only_cot, "the question?", {}, {}, AlignedContext{},
                           "RAWCONTEXT", ThinkMode::single_call, &records);
    const std::string v3 = records[0].prompt[0]["content"].get<std::string>();
    require(util::contains(v3, "Chain of Thought") &&
                util::contains(v3, "Reason: (reason) Answer:(answer)"),
            "variant 3 misses the naive CoT format instruction");
}

void wire_protocol_goldens() {
    ChatRequest request;
    request.model = "m";
    request.messages = {{Role::user, "hi"}};
    require(serialize_request(request) ==
                util::read_file(testsupport::fixture_dir() / "chat_request.golden.json"),
            "chat request bytes differ from the golden fixture");
    require(serialize_embedding_request("test-embedder", {"alpha", "beta"}) ==
                util::read_file(testsupport::fixture_dir() /
                                "embedding_request.golden.json"),
            "embedding request bytes differ from the golden fixture");

    // Full 20-item eval over the wire against the local stub.
    ::setenv("FAITHFULRAG_API_KEY", "acceptance-key", 1);
    testsupport::StubServer stub(
        load_script(testsupport::data_dir() / "fixtures" / "sample20_script.json"));
    testsupport::TempDir out_dir("acc_wire");
    const int code = run_cli(
        {"faithfulrag", "eval", "--dataset",
         (testsupport::data_dir() / "datasets" / "sample20.jsonl").string(), "--schema",
         "kre_conflict", "--variant", "full", "--out", (out_dir.path() / "out").string(),
         "--backend", "http", "--base-url", stub.base_url(), "--embedder", "http",
         "--embed-base-url", stub.base_url(), "--embed-model", "test-embedder"});
    require(code == 0, "eval against the stub server exited " + std::to_string(code));
    const EvalReport report =
        report_from_json(util::read_file(out_dir.path() / "out" / "report.json"));
    require(report.failed_item_ids.empty(), "items failed during the stub round-trip");
    size_t answered = 0;
    for (const auto& row : report.rows) answered += row.final_answer.empty() ? 0 : 1;
    require(answered == 20, "not every item produced an extractable answer");
    require(stub.chat_requests.load() > 0 && stub.embedding_requests.load() > 0,
            "stub endpoints were not exercised");
}

void replay_determinism() {
    ::setenv("FAITHFULRAG_API_KEY", "acceptance-key", 1);
    testsupport::StubServer stub(
        load_script(testsupport::data_dir() / "fixtures" / "sample20_script.json"));
    testsupport::TempDir dir("acc_replay");
    const auto out = dir.path() / "out";
    const auto cache = dir.path() / "cache";
    const std::vector<std::string> args = {
        "faithfulrag", "eval", "--dataset",
        (testsupport::data_dir() / "datasets" / "sample20.jsonl").string(), "--schema",
        "kre_conflict", "--variant", "full", "--out", out.string(), "--cache", cache.string(),
        "--backend", "http", "--base-url", stub.base_url(), "--embedder", "http",
        "--embed-base-url", stub.base_url(), "--embed-model", "test-embedder"};

    require(run_cli(args) == 0, "first eval run failed");
    const std::string first_report = util::read_file(out / "report.json");
    const int chat_after_first = stub.chat_requests.load();
    const int embed_after_first = stub.embedding_requests.load();
    require(chat_after_first > 0, "first run never reached the stub");

    require(run_cli(args) == 0, "second eval run failed");
    const std::string second_report = util::read_file(out / "report.json");
    require(first_report == second_report, "report.json bytes differ between runs");
    require(stub.chat_requests.load() == chat_after_first &&
                stub.embedding_requests.load() == embed_after_first,
            "second run performed network calls despite the warm cache");
}

void live_smoke() {
    const char* base_url = std::getenv("FAITHFULRAG_SMOKE_BASE_URL");
    const char* model = std::getenv("FAITHFULRAG_SMOKE_MODEL");
    if (base_url == nullptr || model == nullptr)
        throw Skip{"set FAITHFULRAG_SMOKE_BASE_URL and FAITHFULRAG_SMOKE_MODEL to enable"};

    PipelineConfig config;
    config.model = model;
    config.backend = BackendConfig::http(base_url);
    config.embedder = EmbedderConfig::mock(256);
    config.concurrency = 2;
    Pipeline pipeline(config);
    const Dataset dataset = load_jsonl(
        testsupport::data_dir() / "datasets" / "sample20.jsonl", SchemaKind::kre_conflict);
    const SuiteResult suite =
        pipeline.run_suite(dataset, {Scenario::conflict}, {PipelineVariant::full});
    size_t answered = 0;
    for (const auto& row : suite.report.rows)
        answered += (!row.final_answer.empty() && row.failure.empty()) ? 1 : 0;
    require(answered >= 19, "only " + std::to_string(answered) +
                                "/20 items produced extractable answers");
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"chunker-partition-property", 1000.0, chunker_partition_property},
        {"cosine-properties", 1000.0, cosine_properties},
        {"topk-oracle-equivalence", 1000.0, topk_oracle_equivalence},
        {"alignment-brute-force-oracle", 5000.0, alignment_oracle},
        {"memorization-ratio-formula", 1000.0, memorization_ratio_formula},
        {"error-classifier-truth-table", 1000.0, error_classifier_truth_table},
        {"worked-example-end-to-end", 1000.0, table6_end_to_end},
        {"ablation-prompt-conformance", 1000.0, ablation_prompt_conformance},
        {"wire-protocol-golden-fixtures", 10000.0, wire_protocol_goldens},
        {"replay-determinism", 10000.0, replay_determinism},
        {"live-smoke", 0.0, live_smoke, /*optional=*/true},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string failure;
        bool skipped = false;
        std::string skip_reason;
        try {
            criterion.body();
        } catch (const Skip& skip) {
            skipped = true;
            skip_reason = skip.reason;
        } catch (const std::exception& e) {
            failure = e.what();
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();

        if (skipped) {
            std::cout << "SKIP " << criterion.name << " (" << skip_reason << ")\n";
            continue;
        }
        if (failure.empty() && criterion.budget_ms > 0 && ms > criterion.budget_ms) {
            std::ostringstream ss;
            ss << "exceeded runtime budget: " << ms << " ms > " << criterion.budget_ms << " ms";
            failure = ss.str();
        }
        if (failure.empty()) {
            std::cout << "PASS " << criterion.name << " (" << static_cast<int>(ms) << " ms)\n";
        } else {
            std::cout << "FAIL " << criterion.name << ": " << failure << "\n";
            if (!criterion.optional) ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
