#pragma once

#include "cor/corpus.hpp"
#include "cor/llm_backend.hpp"
#include "cor/output_parser.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cor::judge {

// What one evaluated example contributes to judging.
struct JudgeSource {
    std::string example_id;
    std::string question;
    std::vector<corpus::ContextDoc> contexts;  // as presented, is_gold filled in
    std::vector<double> scores;                // retrieval scores, parallel to contexts
    // Doc ids named on the ID line (ID-line modes only).
    std::optional<std::vector<DocId>> selected_doc_ids;
    // Free-text reasoning block, when the mode has one.
    std::optional<std::string> reasoning_text;
};

struct JudgeTask {
    std::string example_id;
    std::string question;
    std::vector<corpus::ContextDoc> contexts;  // exactly 5
    std::string reasoning_text;
    std::optional<parsing::JudgeVerdict> verdict;
};

// "The reasoning selected Context2 and Context5." with positions counted in
// `contexts`; ids not among them read as "a context not listed above".
[[nodiscard]] std::string restate_selection(const std::vector<DocId>& selected_doc_ids,
                                            const std::vector<corpus::ContextDoc>& contexts);

struct TaskBuild {
    std::vector<JudgeTask> tasks;
    std::vector<std::string> skipped;  // example ids without gold or with fewer than 5 contexts
};

// Keeps the gold contexts plus the best-scoring others until five remain, then
// shuffles them with a per-example seed derived from `seed`.
[[nodiscard]] TaskBuild build_judge_tasks(const std::vector<JudgeSource>& sources, std::uint64_t seed);

struct JudgeReport {
    std::vector<JudgeTask> tasks;  // verdicts filled in
    std::size_t yes = 0;
    std::size_t no = 0;
    std::size_t unparseable = 0;
    std::size_t backend_errors = 0;  // counted inside unparseable
    double yes_rate = 0.0;           // yes / tasks; 0 for no tasks
};

struct JudgeOptions {
    std::size_t max_in_flight = 4;
    int max_new_tokens = 64;
    std::optional<std::uint64_t> seed;
};

[[nodiscard]] JudgeReport judge_run(std::vector<JudgeTask> tasks, backend::Backend& backend,
                                    const JudgeOptions& options = {});

}  // namespace cor::judge
