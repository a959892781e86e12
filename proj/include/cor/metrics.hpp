#pragma once

#include "cor/output_parser.hpp"
#include "cor/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cor::metrics {

// Lowercase, drop ASCII punctuation, drop whole-word "a"/"an"/"the",
// collapse whitespace. Non-ASCII bytes are kept and count as word characters.
[[nodiscard]] std::string normalize_answer(std::string_view text);

// 1 iff the normalized prediction equals some normalized gold.
[[nodiscard]] int exact_match(std::string_view prediction, const std::vector<std::string>& golds);

// Multiset token-overlap F1, maximized over golds. Zero when either side has
// no tokens or nothing overlaps.
[[nodiscard]] double f1_score(std::string_view prediction, const std::vector<std::string>& golds);

struct RankingScore {
    int exact = 0;          // selected set == gold set
    int contains_gold = 0;  // every gold id selected
};

[[nodiscard]] RankingScore ranking_score(const std::vector<DocId>& selected_doc_ids,
                                         const std::vector<DocId>& gold_ids);

// Whitespace tokens of the reasoning region: the ID line for CoR, the
// reasoning text for CoT/CoN, both for CoR+CoT, nothing for DSF.
[[nodiscard]] int reasoning_tokens(const parsing::ParsedOutput& parsed, ReasoningMode mode);

// Model-token estimate of the same region: the completion's token count
// scaled by the region's share of the completion bytes.
[[nodiscard]] std::optional<int> reasoning_model_tokens(const parsing::ParsedOutput& parsed, ReasoningMode mode,
                                                        std::string_view completion,
                                                        std::optional<int> completion_tokens);

struct ExampleScore {
    std::string example_id;
    TaskKind task_kind = TaskKind::qa;
    std::optional<int> em;   // qa only
    std::optional<double> f1;  // qa only
    std::optional<int> ast_match;  // api only
    bool ast_lenient_callee = false;
    int ranking_exact = 0;
    int ranking_contains_gold = 0;
    int reasoning_tokens = 0;
    std::optional<int> reasoning_model_tokens;
    std::optional<parsing::JudgeVerdict> judge_verdict;
    parsing::ParseFlags parse_flags;
    // Set when the example never produced a completion; all scores are zero.
    std::optional<std::string> error;
};

struct Aggregates {
    std::size_t count = 0;
    std::size_t failed = 0;
    std::optional<double> em_pct;
    std::optional<double> f1_pct;
    std::optional<double> ast_pct;
    double ranking_exact_pct = 0.0;
    double ranking_contains_gold_pct = 0.0;
    double mean_reasoning_tokens = 0.0;
    std::optional<double> mean_reasoning_model_tokens;
    std::optional<double> judge_yes_pct;
};

struct RunReport {
    std::vector<ExampleScore> rows;  // sorted by example_id
    Aggregates aggregates;
    std::map<std::string, std::string> metadata;
};

// Means over all rows, x100 for percentage columns. Throws InvalidArgument
// on an empty score list.
[[nodiscard]] RunReport aggregate(std::vector<ExampleScore> scores, std::map<std::string, std::string> metadata);
[[nodiscard]] Aggregates compute_aggregates(const std::vector<ExampleScore>& rows);

}  // namespace cor::metrics
