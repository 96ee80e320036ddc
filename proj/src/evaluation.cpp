#include "faithfulrag/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"

namespace faithfulrag {

const char* match_mode_name(MatchMode mode) {
    return mode == MatchMode::contains ? "contains" : "exact";
}

MatchMode parse_match_mode(const std::string& name) {
    if (name == "contains") return MatchMode::contains;
    if (name == "exact") return MatchMode::exact;
    throw ConfigError("unknown correctness mode '" + name + "'; valid: contains, exact");
}

bool is_correct(const std::string& prediction, const std::vector<std::string>& golds,
                MatchMode mode) {
    if (golds.empty()) throw ValidationError("is_correct requires at least one gold answer");
    const std::string normalized_prediction = normalize_answer(prediction);
    const std::string stripped_prediction = strip_punct_lower(prediction);
    for (const auto& gold : golds) {
        std::string g = normalize_answer(gold);
        const std::string& p = g.empty() ? stripped_prediction : normalized_prediction;
        if (g.empty()) g = strip_punct_lower(gold);
        if (g.empty()) continue; // a blank gold never matches
        bool match = mode == MatchMode::exact ? p == g : p.find(g) != std::string::npos;
        if (match) return true;
    }
    return false;
}

std::optional<double> memorization_ratio(std::size_t p_o, std::size_t p_s) {
    if (p_o + p_s == 0) return std::nullopt;
    return static_cast<double>(p_o) / static_cast<double>(p_o + p_s);
}

const char* error_case_name(ErrorCase value) {
    switch (value) {
        case ErrorCase::correct: return "correct";
        case ErrorCase::case1_overconfidence: return "case1_overconfidence";
        case ErrorCase::case2_incorrect_match: return "case2_incorrect_match";
        case ErrorCase::case3_other: return "case3_other";
    }
    return "case3_other";
}

ErrorCase classify_error(const std::string& parametric, const std::string& contextual,
                         const std::vector<std::string>& golds,
                         const std::vector<std::string>& substituted_golds,
                         const std::string& context, MatchMode mode) {
    (void)substituted_golds; // not part of the rule table; carried for reporting symmetry
    if (util::trim(contextual).empty())
        throw ValidationError("classify_error requires a non-empty contextual prediction");
    if (is_correct(contextual, golds, mode)) return ErrorCase::correct;
    if (util::trim(parametric).empty())
        throw MissingParametric("no parametric prediction for classification");
    if (normalize_answer(parametric) == normalize_answer(contextual))
        return ErrorCase::case1_overconfidence;
    const std::string normalized_contextual = normalize_answer(contextual);
    if (!normalized_contextual.empty() &&
        util::contains(normalize_answer(context), normalized_contextual))
        return ErrorCase::case2_incorrect_match;
    return ErrorCase::case3_other;
}

VariantAggregate aggregate(const std::vector<Prediction>& predictions,
                           const std::vector<QAItem>& items, MatchMode mode,
                           const std::string& scenario, const std::string& variant,
                           std::vector<ItemRow>* rows_out) {
    std::unordered_map<std::string, const QAItem*> by_id;
    for (const auto& item : items) by_id[item.id] = &item;
    if (predictions.size() != items.size())
        throw CoverageError("aggregate got " + std::to_string(predictions.size()) +
                            " predictions for " + std::to_string(items.size()) + " items");

    VariantAggregate agg;
    agg.scenario = scenario;
    agg.variant = variant;
    agg.n_items = items.size();

    std::unordered_map<std::string, int> seen;
    for (const auto& prediction : predictions) {
        auto it = by_id.find(prediction.item_id);
        if (it == by_id.end())
            throw CoverageError("prediction for unknown item id '" + prediction.item_id + "'");
        if (++seen[prediction.item_id] > 1)
            throw CoverageError("duplicate prediction for item id '" + prediction.item_id + "'");
        const QAItem& item = *it->second;

        ItemRow row;
        row.id = item.id;
        row.scenario = scenario;
        row.variant = variant;
        row.parametric_answer = prediction.parametric_answer;
        row.contextual_answer = prediction.contextual_answer;
        row.final_answer = prediction.final_answer;
        row.correct = is_correct(prediction.final_answer, item.answers, mode);
        if (row.correct) ++agg.correct_count;

        if (item.substituted_answers && !item.substituted_answers->empty()) {
            agg.m_r_applicable = true;
            if (is_correct(prediction.final_answer, item.answers, MatchMode::exact)) ++agg.p_o;
            if (is_correct(prediction.final_answer, *item.substituted_answers, MatchMode::exact))
                ++agg.p_s;
        }

        try {
            ErrorCase ec = classify_error(prediction.parametric_answer.value_or(""),
                                          prediction.contextual_answer, item.answers,
                                          item.substituted_answers.value_or(
                                              std::vector<std::string>{}),
                                          item.context, mode);
            row.error_case = error_case_name(ec);
            switch (ec) {
                case ErrorCase::correct: ++agg.cases.correct; break;
                case ErrorCase::case1_overconfidence: ++agg.cases.case1; break;
                case ErrorCase::case2_incorrect_match: ++agg.cases.case2; break;
                case ErrorCase::case3_other: ++agg.cases.case3; break;
            }
        } catch (const MissingParametric&) {
            ++agg.cases.unclassified;
        }
        if (rows_out) rows_out->push_back(std::move(row));
    }

    agg.acc = agg.n_items == 0 ? 0.0
                               : static_cast<double>(agg.correct_count) /
                                     static_cast<double>(agg.n_items);
    if (agg.m_r_applicable) agg.m_r = memorization_ratio(agg.p_o, agg.p_s);
    return agg;
}

namespace {

nlohmann::ordered_json aggregate_to_json(const VariantAggregate& agg) {
    nlohmann::ordered_json j;
    j["scenario"] = agg.scenario;
    j["variant"] = agg.variant;
    j["n_items"] = agg.n_items;
    j["correct"] = agg.correct_count;
    j["acc"] = agg.acc;
    if (agg.m_r_applicable) {
        if (agg.m_r)
            j["m_r"] = *agg.m_r;
        else
            j["m_r"] = nullptr;
        j["p_o"] = agg.p_o;
        j["p_s"] = agg.p_s;
    }
    j["cases"] = {{"correct", agg.cases.correct},
                  {"case1_overconfidence", agg.cases.case1},
                  {"case2_incorrect_match", agg.cases.case2},
                  {"case3_other", agg.cases.case3},
                  {"unclassified", agg.cases.unclassified}};
    j["skipped"] = agg.skipped;
    j["failed"] = agg.failed;
    return j;
}

VariantAggregate aggregate_from_json(const nlohmann::json& j) {
    VariantAggregate agg;
    agg.scenario = j.at("scenario").get<std::string>();
    agg.variant = j.at("variant").get<std::string>();
    agg.n_items = j.at("n_items").get<std::size_t>();
    agg.correct_count = j.at("correct").get<std::size_t>();
    agg.acc = j.at("acc").get<double>();
    if (j.contains("m_r")) {
        agg.m_r_applicable = true;
        if (!j["m_r"].is_null()) agg.m_r = j["m_r"].get<double>();
        agg.p_o = j.value("p_o", 0u);
        agg.p_s = j.value("p_s", 0u);
    }
    const auto& cases = j.at("cases");
    agg.cases.correct = cases.value("correct", 0u);
    agg.cases.case1 = cases.value("case1_overconfidence", 0u);
    agg.cases.case2 = cases.value("case2_incorrect_match", 0u);
    agg.cases.case3 = cases.value("case3_other", 0u);
    agg.cases.unclassified = cases.value("unclassified", 0u);
    agg.skipped = j.value("skipped", 0u);
    agg.failed = j.value("failed", 0u);
    return agg;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = report.schema_version;
    j["config"] = report.config;
    j["aggregates"] = nlohmann::ordered_json::array();
    for (const auto& agg : report.aggregates) j["aggregates"].push_back(aggregate_to_json(agg));
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json r;
        r["id"] = row.id;
        r["scenario"] = row.scenario;
        r["variant"] = row.variant;
        if (row.parametric_answer)
            r["parametric_answer"] = *row.parametric_answer;
        else
            r["parametric_answer"] = nullptr;
        r["contextual_answer"] = row.contextual_answer;
        r["final_answer"] = row.final_answer;
        r["correct"] = row.correct;
        r["error_case"] = row.error_case;
        if (!row.skipped_reason.empty()) r["skipped_reason"] = row.skipped_reason;
        if (!row.failure.empty()) r["failure"] = row.failure;
        j["rows"].push_back(std::move(r));
    }
    j["failed_item_ids"] = report.failed_item_ids;
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    EvalReport report;
    report.schema_version = j.at("schema_version").get<std::string>();
    report.config = j.at("config");
    for (const auto& a : j.at("aggregates")) report.aggregates.push_back(aggregate_from_json(a));
    for (const auto& r : j.at("rows")) {
        ItemRow row;
        row.id = r.at("id").get<std::string>();
        row.scenario = r.at("scenario").get<std::string>();
        row.variant = r.at("variant").get<std::string>();
        if (r.contains("parametric_answer") && !r["parametric_answer"].is_null())
            row.parametric_answer = r["parametric_answer"].get<std::string>();
        row.contextual_answer = r.value("contextual_answer", "");
        row.final_answer = r.value("final_answer", "");
        row.correct = r.value("correct", false);
        row.error_case = r.value("error_case", "");
        row.skipped_reason = r.value("skipped_reason", "");
        row.failure = r.value("failure", "");
        report.rows.push_back(std::move(row));
    }
    if (j.contains("failed_item_ids"))
        report.failed_item_ids = j["failed_item_ids"].get<std::vector<std::string>>();
    return report;
}

std::string report_to_csv(const EvalReport& report) {
    std::string out =
        "id,scenario,variant,correct,error_case,final_answer,contextual_answer,"
        "parametric_answer,skipped_reason,failure\n";
    for (const auto& row : report.rows) {
        std::vector<std::string> fields = {row.id,
                                           row.scenario,
                                           row.variant,
                                           row.correct ? "true" : "false",
                                           row.error_case,
                                           row.final_answer,
                                           row.contextual_answer,
                                           row.parametric_answer.value_or(""),
                                           row.skipped_reason,
                                           row.failure};
        std::vector<std::string> escaped;
        escaped.reserve(fields.size());
        for (auto& f : fields) escaped.push_back(csv_escape(f));
        out += util::join(escaped, ",");
        out.push_back('\n');
    }
    return out;
}

std::string report_to_markdown(const EvalReport& report, bool delta_vs_full) {
    std::map<std::string, double> full_acc_by_scenario;
    for (const auto& agg : report.aggregates)
        if (agg.variant == "full") full_acc_by_scenario[agg.scenario] = agg.acc;

    std::string out = "# Evaluation report\n\n## Accuracy\n\n";
    out += delta_vs_full ? "| Scenario | Variant | Items | ACC (Δ vs full) | M_R |\n"
                         : "| Scenario | Variant | Items | ACC | M_R |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& agg : report.aggregates) {
        std::string acc = format_fixed(agg.acc * 100.0, 1);
        if (delta_vs_full && agg.variant != "full") {
            auto it = full_acc_by_scenario.find(agg.scenario);
            if (it != full_acc_by_scenario.end()) {
                double delta = (agg.acc - it->second) * 100.0;
                char buf[64];
                std::snprintf(buf, sizeof(buf), " (%+.1f)", delta);
                acc += buf;
            }
        }
        std::string mr = !agg.m_r_applicable ? "-" : agg.m_r ? format_fixed(*agg.m_r, 3) : "null";
        out += "| " + agg.scenario + " | " + agg.variant + " | " + std::to_string(agg.n_items) +
               " | " + acc + " | " + mr + " |\n";
    }

    out += "\n## Error cases\n\n";
    out += "| Scenario | Variant | Correct | Case 1 | Case 2 | Case 3 | Unclassified | Skipped "
           "| Failed |\n";
    out += "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& agg : report.aggregates) {
        out += "| " + agg.scenario + " | " + agg.variant + " | " +
               std::to_string(agg.cases.correct) + " | " + std::to_string(agg.cases.case1) +
               " | " + std::to_string(agg.cases.case2) + " | " + std::to_string(agg.cases.case3) +
               " | " + std::to_string(agg.cases.unclassified) + " | " +
               std::to_string(agg.skipped) + " | " + std::to_string(agg.failed) + " |\n";
    }
    return out;
}

} // namespace faithfulrag
