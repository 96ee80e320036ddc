#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faithfulrag/datasets.hpp"
#include "faithfulrag/normalize.hpp"

namespace faithfulrag {

enum class MatchMode { contains, exact };
const char* match_mode_name(MatchMode mode);
MatchMode parse_match_mode(const std::string& name);

/// contains: any normalized gold is a substring of the normalized prediction;
/// exact: equality after normalization. Golds that normalize to nothing fall
/// back to punctuation-stripped comparison so they can never match trivially.
bool is_correct(const std::string& prediction, const std::vector<std::string>& golds,
                MatchMode mode);

/// M_R = p_o / (p_o + p_s); undefined (nullopt, reported as null) when both
/// counts are zero.
std::optional<double> memorization_ratio(std::size_t p_o, std::size_t p_s);

enum class ErrorCase { correct, case1_overconfidence, case2_incorrect_match, case3_other };
const char* error_case_name(ErrorCase value);

/// The four-way taxonomy: Correct, else Case 1 when the contextual answer
/// equals the parametric one, else Case 2 when it appears verbatim in the
/// context, else Case 3. Throws MissingParametric when no parametric
/// prediction is available.
ErrorCase classify_error(const std::string& parametric, const std::string& contextual,
                         const std::vector<std::string>& golds,
                         const std::vector<std::string>& substituted_golds,
                         const std::string& context, MatchMode mode = MatchMode::contains);

struct Prediction {
    std::string item_id;
    std::string scenario;
    std::string variant;
    std::optional<std::string> parametric_answer;
    std::string contextual_answer;
    std::string final_answer;
    std::string trace_ref;
};

struct CaseCounts {
    std::size_t correct = 0;
    std::size_t case1 = 0;
    std::size_t case2 = 0;
    std::size_t case3 = 0;
    std::size_t unclassified = 0; // parametric prediction missing

    std::size_t total() const { return correct + case1 + case2 + case3 + unclassified; }
};

struct ItemRow {
    std::string id;
    std::string scenario;
    std::string variant;
    std::optional<std::string> parametric_answer;
    std::string contextual_answer;
    std::string final_answer;
    bool correct = false;
    std::string error_case; // empty = unclassified
    std::string skipped_reason;
    std::string failure;
};

struct VariantAggregate {
    std::string scenario;
    std::string variant;
    std::size_t n_items = 0;
    std::size_t correct_count = 0;
    double acc = 0.0;
    bool m_r_applicable = false; // any item carries substituted answers
    std::optional<double> m_r;   // nullopt = undefined (null), when applicable
    std::size_t p_o = 0;
    std::size_t p_s = 0;
    CaseCounts cases;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

struct EvalReport {
    std::string schema_version;
    nlohmann::ordered_json config;
    std::vector<VariantAggregate> aggregates;
    std::vector<ItemRow> rows;
    std::vector<std::string> failed_item_ids;
};

/// Fold one (scenario, variant)'s predictions over the items they cover.
/// Predictions must cover the given items exactly once each.
VariantAggregate aggregate(const std::vector<Prediction>& predictions,
                           const std::vector<QAItem>& items, MatchMode mode,
                           const std::string& scenario, const std::string& variant,
                           std::vector<ItemRow>* rows_out = nullptr);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
std::string report_to_csv(const EvalReport& report);

/// Aggregate tables in markdown. When `delta_vs_full` is set, each non-full
/// row carries a parenthesized signed accuracy delta against the full
/// variant of the same scenario.
std::string report_to_markdown(const EvalReport& report, bool delta_vs_full = false);

} // namespace faithfulrag
