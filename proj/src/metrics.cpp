#include "cor/metrics.hpp"

#include "cor/error.hpp"
#include "cor/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace cor::metrics {

namespace {

constexpr bool is_ascii_punct(char c) noexcept {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// Word characters for article boundaries: ASCII alnum, '_' and any non-ASCII
// byte (UTF-8 letters).
constexpr bool is_word_char(char c) noexcept {
    return text::is_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

bool is_article(std::string_view w) noexcept {
    return w == "a" || w == "an" || w == "the";
}

std::vector<std::string_view> tokens_of(const std::string& normalized) {
    return text::split_whitespace(normalized);
}

double f1_single(const std::vector<std::string_view>& pred, const std::vector<std::string_view>& gold) {
    if (pred.empty() || gold.empty()) return 0.0;
    std::unordered_map<std::string_view, int> counts;
    for (const auto t : gold) ++counts[t];
    int overlap = 0;
    for (const auto t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::string normalize_answer(std::string_view input) {
    std::string s;
    s.reserve(input.size());
    for (const char c : input) {
        if (!is_ascii_punct(c)) s.push_back(text::to_lower(c));
    }
    // Whole-word article removal; the article is replaced by a space.
    std::string no_articles;
    no_articles.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_word_char(s[i])) {
            no_articles.push_back(s[i++]);
            continue;
        }
        const std::size_t start = i;
        while (i < s.size() && is_word_char(s[i])) ++i;
        const std::string_view word(s.data() + start, i - start);
        if (is_article(word)) {
            no_articles.push_back(' ');
        } else {
            no_articles.append(word);
        }
    }
    std::string out;
    for (const auto word : text::split_whitespace(no_articles)) {
        if (!out.empty()) out.push_back(' ');
        out.append(word);
    }
    return out;
}

int exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
    const std::string p = normalize_answer(prediction);
    return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) { return normalize_answer(g) == p; })
               ? 1
               : 0;
}

double f1_score(std::string_view prediction, const std::vector<std::string>& golds) {
    const std::string p = normalize_answer(prediction);
    const auto pred_tokens = tokens_of(p);
    double best = 0.0;
    for (const auto& g : golds) {
        const std::string ng = normalize_answer(g);
        best = std::max(best, f1_single(pred_tokens, tokens_of(ng)));
    }
    return best;
}

RankingScore ranking_score(const std::vector<DocId>& selected_doc_ids, const std::vector<DocId>& gold_ids) {
    const std::set<DocId> selected(selected_doc_ids.begin(), selected_doc_ids.end());
    const std::set<DocId> gold(gold_ids.begin(), gold_ids.end());
    RankingScore score;
    score.exact = selected == gold ? 1 : 0;
    score.contains_gold = std::includes(selected.begin(), selected.end(), gold.begin(), gold.end()) ? 1 : 0;
    return score;
}

namespace {

std::string reasoning_region(const parsing::ParsedOutput& parsed, ReasoningMode mode) {
    std::string region;
    if (has_id_line(mode)) region = parsed.id_line_text;
    if (has_reasoning_block(mode) && parsed.reasoning_text) {
        if (!region.empty()) region.push_back('\n');
        region += *parsed.reasoning_text;
    }
    return region;
}

}  // namespace

int reasoning_tokens(const parsing::ParsedOutput& parsed, ReasoningMode mode) {
    return static_cast<int>(text::split_whitespace(reasoning_region(parsed, mode)).size());
}

std::optional<int> reasoning_model_tokens(const parsing::ParsedOutput& parsed, ReasoningMode mode,
                                          std::string_view completion, std::optional<int> completion_tokens) {
    if (!completion_tokens) return std::nullopt;
    const std::string region = reasoning_region(parsed, mode);
    if (region.empty() || completion.empty()) return 0;
    const double share = std::min(1.0, static_cast<double>(region.size()) / static_cast<double>(completion.size()));
    return static_cast<int>(std::lround(share * *completion_tokens));
}

Aggregates compute_aggregates(const std::vector<ExampleScore>& rows) {
    Aggregates agg;
    agg.count = rows.size();
    if (rows.empty()) return agg;
    double em = 0, f1 = 0, ast = 0, rex = 0, rcg = 0, rtok = 0, rmtok = 0, yes = 0;
    std::size_t qa = 0, api = 0, model_tok_rows = 0, judged = 0;
    for (const auto& r : rows) {
        if (r.error) ++agg.failed;
        if (r.task_kind == TaskKind::qa) {
            ++qa;
            em += r.em.value_or(0);
            f1 += r.f1.value_or(0.0);
        } else {
            ++api;
            ast += r.ast_match.value_or(0);
        }
        rex += r.ranking_exact;
        rcg += r.ranking_contains_gold;
        rtok += r.reasoning_tokens;
        if (r.reasoning_model_tokens) {
            ++model_tok_rows;
            rmtok += *r.reasoning_model_tokens;
        }
        if (r.judge_verdict) {
            ++judged;
            if (*r.judge_verdict == parsing::JudgeVerdict::yes) ++yes;
        }
    }
    const double n = static_cast<double>(rows.size());
    if (qa > 0) {
        agg.em_pct = 100.0 * em / static_cast<double>(qa);
        agg.f1_pct = 100.0 * f1 / static_cast<double>(qa);
    }
    if (api > 0) agg.ast_pct = 100.0 * ast / static_cast<double>(api);
    agg.ranking_exact_pct = 100.0 * rex / n;
    agg.ranking_contains_gold_pct = 100.0 * rcg / n;
    agg.mean_reasoning_tokens = rtok / n;
    if (model_tok_rows > 0) agg.mean_reasoning_model_tokens = rmtok / static_cast<double>(model_tok_rows);
    if (judged > 0) agg.judge_yes_pct = 100.0 * yes / static_cast<double>(judged);
    return agg;
}

RunReport aggregate(std::vector<ExampleScore> scores, std::map<std::string, std::string> metadata) {
    if (scores.empty()) throw InvalidArgument("cannot aggregate an empty score list");
    std::stable_sort(scores.begin(), scores.end(),
                     [](const ExampleScore& a, const ExampleScore& b) { return a.example_id < b.example_id; });
    RunReport report;
    report.aggregates = compute_aggregates(scores);
    report.rows = std::move(scores);
    report.metadata = std::move(metadata);
    return report;
}

}  // namespace cor::metrics
