#include "faithfulrag/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

#include "faithfulrag/digest.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

namespace fs = std::filesystem;

std::map<std::string, std::string> parse_config_file(const fs::path& path) {
    std::map<std::string, std::string> entries;
    int line_number = 0;
    for (const auto& line : util::split_lines(util::read_file(path))) {
        ++line_number;
        std::string trimmed = util::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                              ": expected key = value");
        std::string key = util::trim(trimmed.substr(0, eq));
        std::string value = util::trim(trimmed.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(line_number) + ": empty key");
        entries[key] = value;
    }
    return entries;
}

namespace {

int to_int(const std::string& key, const std::string& value) {
    try {
        size_t consumed = 0;
        int parsed = std::stoi(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument("trailing characters");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs an integer, got '" + value + "'");
    }
}

} // namespace

void apply_config_entries(PipelineConfig& config,
                          const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "model") config.model = value;
        else if (key == "chunk_size") config.chunk_size = to_int(key, value);
        else if (key == "top_k") config.top_k = to_int(key, value);
        else if (key == "variant") config.variant = parse_variant(value);
        else if (key == "think_mode") config.think_mode = parse_think_mode(value);
        else if (key == "correctness") config.correctness = parse_match_mode(value);
        else if (key == "concurrency") config.concurrency = to_int(key, value);
        else if (key == "template_dir") config.template_dir = value;
        else if (key == "cache_dir") config.cache_dir = value;
        else if (key == "max_list_items") config.max_list_items = to_int(key, value);
        else if (key == "backend") {
            if (value == "http") config.backend.kind = BackendConfig::Kind::http;
            else if (value == "scripted") config.backend.kind = BackendConfig::Kind::scripted;
            else throw ConfigError("config key 'backend' must be http or scripted");
        } else if (key == "base_url") {
            config.backend.base_url = value;
            config.backend.kind = BackendConfig::Kind::http;
        } else if (key == "api_key_env") config.backend.api_key_env = value;
        else if (key == "script") config.backend.script = load_script(value);
        else if (key == "retry_attempts") config.backend.retry.max_attempts = to_int(key, value);
        else if (key == "retry_backoff_ms") config.backend.retry.backoff_ms = to_int(key, value);
        else if (key == "embedder") {
            if (value == "http") config.embedder.kind = EmbedderConfig::Kind::http;
            else if (value == "mock" || value == "bag_of_words_mock")
                config.embedder.kind = EmbedderConfig::Kind::bag_of_words_mock;
            else throw ConfigError("config key 'embedder' must be http or mock");
        } else if (key == "embed_base_url") {
            config.embedder.base_url = value;
            config.embedder.kind = EmbedderConfig::Kind::http;
        } else if (key == "embed_model") config.embedder.model = value;
        else if (key == "embed_dim") config.embedder.mock_dim = to_int(key, value);
        else if (key == "embed_batch") config.embedder.batch_size = to_int(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

namespace {

struct CommonOpts {
    std::string config_path;
    std::string model;
    std::string backend;
    std::string base_url;
    std::string script_path;
    std::string embedder;
    std::string embed_base_url;
    std::string embed_model;
    int embed_dim = -1;
    int k = -1;
    int chunk_size = -1;
    std::string variant;
    std::string think_mode;
    std::string mode;
    std::string template_dir;
    std::string cache_dir;
    int concurrency = -1;
};

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value lines)");
    cmd->add_option("--model", opts.model, "model identifier sent to the backend");
    cmd->add_option("--backend", opts.backend, "chat backend kind: http or scripted");
    cmd->add_option("--base-url", opts.base_url, "chat backend base URL (implies http)");
    cmd->add_option("--script", opts.script_path, "scripted backend pattern/completion file");
    cmd->add_option("--embedder", opts.embedder, "embedding provider: http or mock");
    cmd->add_option("--embed-base-url", opts.embed_base_url,
                    "embeddings base URL (implies http embedder)");
    cmd->add_option("--embed-model", opts.embed_model, "embeddings model identifier");
    cmd->add_option("--embed-dim", opts.embed_dim, "mock embedder hashing dimension");
    cmd->add_option("--k", opts.k, "top-k aligned chunks");
    cmd->add_option("--chunk-size", opts.chunk_size, "chunk size in whitespace tokens");
    cmd->add_option("--variant", opts.variant, "pipeline variant");
    cmd->add_option("--think-mode", opts.think_mode, "single_call or two_call");
    cmd->add_option("--mode", opts.mode, "correctness mode: contains or exact");
    cmd->add_option("--templates", opts.template_dir, "prompt template directory");
    cmd->add_option("--cache", opts.cache_dir, "response cache directory");
    cmd->add_option("--concurrency", opts.concurrency, "max concurrent items");
}

PipelineConfig build_config(const CommonOpts& opts) {
    PipelineConfig config;
    if (!opts.config_path.empty())
        apply_config_entries(config, parse_config_file(opts.config_path));

    // Flag overrides take precedence over config file values.
    std::map<std::string, std::string> overrides;
    if (!opts.model.empty()) overrides["model"] = opts.model;
    if (!opts.backend.empty()) overrides["backend"] = opts.backend;
    if (!opts.base_url.empty()) overrides["base_url"] = opts.base_url;
    if (!opts.script_path.empty()) overrides["script"] = opts.script_path;
    if (!opts.embedder.empty()) overrides["embedder"] = opts.embedder;
    if (!opts.embed_base_url.empty()) overrides["embed_base_url"] = opts.embed_base_url;
    if (!opts.embed_model.empty()) overrides["embed_model"] = opts.embed_model;
    if (opts.embed_dim > 0) overrides["embed_dim"] = std::to_string(opts.embed_dim);
    if (opts.k > 0) overrides["top_k"] = std::to_string(opts.k);
    if (opts.chunk_size > 0) overrides["chunk_size"] = std::to_string(opts.chunk_size);
    if (!opts.variant.empty()) overrides["variant"] = opts.variant;
    if (!opts.think_mode.empty()) overrides["think_mode"] = opts.think_mode;
    if (!opts.mode.empty()) overrides["correctness"] = opts.mode;
    if (!opts.template_dir.empty()) overrides["template_dir"] = opts.template_dir;
    if (!opts.cache_dir.empty()) overrides["cache_dir"] = opts.cache_dir;
    if (opts.concurrency > 0) overrides["concurrency"] = std::to_string(opts.concurrency);
    apply_config_entries(config, overrides);

    config.validate();
    return config;
}

void write_text(const fs::path& path, const std::string& content) {
    util::write_file(path, content);
}

struct RunPersistence {
    fs::path out_dir;
    std::string started;
    std::string finished;
    fs::path dataset_path;
    std::vector<std::string> scenario_names;
    std::vector<std::string> variant_names;
    bool delta_md = false;
};

void write_run(const SuiteResult& suite, const PipelineConfig& config,
               const RunPersistence& persist) {
    fs::create_directories(persist.out_dir);
    write_text(persist.out_dir / "report.json", report_to_json(suite.report));
    write_text(persist.out_dir / "report.csv", report_to_csv(suite.report));
    write_text(persist.out_dir / "report.md",
               report_to_markdown(suite.report, persist.delta_md));

    fs::path run_dir = persist.out_dir / suite.run_id;
    fs::create_directories(run_dir);

    nlohmann::ordered_json manifest;
    manifest["run_id"] = suite.run_id;
    manifest["config"] = config.to_json();
    manifest["dataset"] = {{"path", persist.dataset_path.string()},
                           {"file_sha256", digest::sha256_file(persist.dataset_path)},
                           {"content_sha256", suite.dataset_sha256}};
    manifest["scenarios"] = persist.scenario_names;
    manifest["variants"] = persist.variant_names;
    manifest["started"] = persist.started;
    manifest["finished"] = persist.finished;
    write_text(run_dir / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& trace : suite.traces) {
        fs::path dir = suite.multi_combo
                           ? run_dir / (trace.scenario + "_" + trace.variant)
                           : run_dir;
        fs::create_directories(dir);
        write_text(dir / (trace.item_id + ".json"), trace.trace.dump(2) + "\n");
    }
}

void print_suite_summary(const SuiteResult& suite) {
    for (const auto& agg : suite.report.aggregates) {
        std::string mr = !agg.m_r_applicable ? "-"
                         : agg.m_r           ? std::to_string(*agg.m_r)
                                             : "null";
        std::cout << agg.scenario << "/" << agg.variant << ": acc=" << agg.acc
                  << " m_r=" << mr << " items=" << agg.n_items << " skipped=" << agg.skipped
                  << " failed=" << agg.failed << "\n";
    }
    if (!suite.report.failed_item_ids.empty()) {
        std::cout << "failed items: " << util::join(suite.report.failed_item_ids, ", ")
                  << "\n";
    }
}

int cmd_ask(const CommonOpts& opts, const std::string& question, const std::string& context,
            const std::string& options_spec, const std::string& trace_path) {
    PipelineConfig config = build_config(opts);
    Pipeline pipeline(config);

    QAItem item;
    item.id = "ask";
    item.question = question;
    item.context = context;
    item.answers = {"(interactive)"};
    if (!options_spec.empty()) {
        std::vector<std::string> options;
        size_t start = 0;
        while (start <= options_spec.size()) {
            size_t bar = options_spec.find('|', start);
            std::string part = options_spec.substr(
                start, bar == std::string::npos ? std::string::npos : bar - start);
            if (!util::trim(part).empty()) options.push_back(util::trim(part));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        if (!options.empty()) item.options = options;
    }

    ItemOutcome outcome = pipeline.run_item(item, Scenario::conflict);
    std::cout << outcome.prediction.final_answer << "\n";
    if (!trace_path.empty()) {
        write_text(trace_path, outcome.trace.dump(2) + "\n");
        std::cerr << "trace written to " << trace_path << "\n";
    }
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& dataset_path,
             const std::string& schema, const std::string& scenario,
             const std::string& variant, const std::string& out_dir) {
    PipelineConfig config = build_config(opts);
    if (!variant.empty()) config.variant = parse_variant(variant);
    Scenario scen = parse_scenario(scenario.empty() ? "conflict" : scenario);
    Dataset dataset = load_jsonl(dataset_path, parse_schema(schema));

    Pipeline pipeline(config);
    RunPersistence persist;
    persist.out_dir = out_dir;
    persist.dataset_path = dataset_path;
    persist.scenario_names = {scenario_name(scen)};
    persist.variant_names = {variant_name(config.variant)};
    persist.started = util::iso8601_now();
    SuiteResult suite = pipeline.run_suite(dataset, {scen}, {config.variant});
    persist.finished = util::iso8601_now();
    write_run(suite, config, persist);
    print_suite_summary(suite);
    return suite.report.failed_item_ids.empty() ? 0 : 1;
}

int cmd_ablate(const CommonOpts& opts, const std::string& dataset_path,
               const std::string& schema, const std::string& scenario,
               const std::string& variants_csv, const std::string& out_dir) {
    PipelineConfig config = build_config(opts);
    Scenario scen = parse_scenario(scenario.empty() ? "conflict" : scenario);
    Dataset dataset = load_jsonl(dataset_path, parse_schema(schema));

    std::vector<PipelineVariant> variants;
    size_t start = 0;
    while (start <= variants_csv.size()) {
        size_t comma = variants_csv.find(',', start);
        std::string name = util::trim(variants_csv.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!name.empty()) variants.push_back(parse_variant(name));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (variants.empty()) throw ConfigError("--variants needs at least one variant name");
    // Deltas are defined against the full variant; run it when not requested.
    if (std::find(variants.begin(), variants.end(), PipelineVariant::full) == variants.end())
        variants.insert(variants.begin(), PipelineVariant::full);

    Pipeline pipeline(config);
    RunPersistence persist;
    persist.out_dir = out_dir;
    persist.dataset_path = dataset_path;
    persist.scenario_names = {scenario_name(scen)};
    for (auto v : variants) persist.variant_names.push_back(variant_name(v));
    persist.delta_md = true;
    persist.started = util::iso8601_now();
    SuiteResult suite = pipeline.run_suite(dataset, {scen}, variants);
    persist.finished = util::iso8601_now();
    write_run(suite, config, persist);
    print_suite_summary(suite);
    return suite.report.failed_item_ids.empty() ? 0 : 1;
}

EvalReport load_run_report(const std::string& run_dir) {
    fs::path path = fs::path(run_dir) / "report.json";
    if (!fs::exists(path)) throw IoError("no report.json under " + run_dir);
    return report_from_json(util::read_file(path));
}

int cmd_classify(const std::string& run_dir) {
    EvalReport report = load_run_report(run_dir);
    std::cout << "| Scenario | Variant | Correct | Case 1 | Case 2 | Case 3 | Unclassified |\n";
    std::cout << "|---|---|---|---|---|---|---|\n";
    for (const auto& agg : report.aggregates) {
        std::cout << "| " << agg.scenario << " | " << agg.variant << " | " << agg.cases.correct
                  << " | " << agg.cases.case1 << " | " << agg.cases.case2 << " | "
                  << agg.cases.case3 << " | " << agg.cases.unclassified << " |\n";
    }
    return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
    EvalReport report = load_run_report(run_dir);
    if (format == "json") {
        std::cout << report_to_json(report);
    } else if (format == "csv") {
        std::cout << report_to_csv(report);
    } else if (format == "md") {
        bool has_full = false;
        bool has_other = false;
        for (const auto& agg : report.aggregates) {
            if (agg.variant == "full") has_full = true;
            else has_other = true;
        }
        std::cout << report_to_markdown(report, has_full && has_other);
    } else {
        throw ConfigError("unknown report format '" + format + "'; valid: json, csv, md");
    }
    return 0;
}

int cmd_validate(const std::string& dataset_path, const std::string& schema) {
    Dataset dataset = load_jsonl(dataset_path, parse_schema(schema));
    std::cout << "OK: " << dataset.items.size() << " items (schema " << schema << ")\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"faithful retrieval-augmented generation pipeline and evaluation harness"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* ask = app.add_subcommand("ask", "answer one question over a provided context");
    std::string ask_question, ask_context, ask_options, ask_trace;
    ask->add_option("--question", ask_question, "the question")->required();
    ask->add_option("--context", ask_context, "the retrieved context")->required();
    ask->add_option("--options", ask_options, "multiple-choice options, separated by |");
    ask->add_option("--trace", ask_trace, "write the pipeline trace JSON here");
    add_common_options(ask, opts);

    auto* eval = app.add_subcommand("eval", "evaluate a dataset and write reports");
    std::string eval_dataset, eval_schema = "generic", eval_scenario = "conflict";
    std::string eval_out = "eval-out";
    eval->add_option("--dataset", eval_dataset, "JSONL dataset path")->required();
    eval->add_option("--schema", eval_schema, "generic|kre_conflict|multiple_choice|realtime");
    eval->add_option("--scenario", eval_scenario, "conflict|golden");
    eval->add_option("--out", eval_out, "output directory")->required();
    add_common_options(eval, opts);

    auto* ablate = app.add_subcommand("ablate", "run several variants and compare to full");
    std::string ablate_dataset, ablate_schema = "generic", ablate_scenario = "conflict";
    std::string ablate_variants, ablate_out = "ablate-out";
    ablate->add_option("--dataset", ablate_dataset, "JSONL dataset path")->required();
    ablate->add_option("--schema", ablate_schema,
                       "generic|kre_conflict|multiple_choice|realtime");
    ablate->add_option("--scenario", ablate_scenario, "conflict|golden");
    ablate->add_option("--variants", ablate_variants, "comma-separated variant names")
        ->required();
    ablate->add_option("--out", ablate_out, "output directory")->required();
    add_common_options(ablate, opts);

    auto* classify = app.add_subcommand("classify", "print the error-case distribution of a run");
    std::string classify_run;
    classify->add_option("--run", classify_run, "run output directory")->required();

    auto* report = app.add_subcommand("report", "re-render a run's report");
    std::string report_run, report_format = "md";
    report->add_option("--run", report_run, "run output directory")->required();
    report->add_option("--format", report_format, "json|csv|md");

    auto* validate = app.add_subcommand("validate-dataset", "validate a dataset file");
    std::string validate_dataset, validate_schema = "generic";
    validate->add_option("--dataset", validate_dataset, "JSONL dataset path")->required();
    validate->add_option("--schema", validate_schema,
                         "generic|kre_conflict|multiple_choice|realtime");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (ask->parsed()) return cmd_ask(opts, ask_question, ask_context, ask_options, ask_trace);
        if (eval->parsed())
            return cmd_eval(opts, eval_dataset, eval_schema, eval_scenario, opts.variant,
                            eval_out);
        if (ablate->parsed())
            return cmd_ablate(opts, ablate_dataset, ablate_schema, ablate_scenario,
                              ablate_variants, ablate_out);
        if (classify->parsed()) return cmd_classify(classify_run);
        if (report->parsed()) return cmd_report(report_run, report_format);
        if (validate->parsed()) return cmd_validate(validate_dataset, validate_schema);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ItemFailure& e) {
        std::cerr << "item failed: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace faithfulrag
