#pragma once

#include "cor/corpus.hpp"
#include "cor/judge.hpp"
#include "cor/llm_backend.hpp"
#include "cor/metrics.hpp"
#include "cor/run_config.hpp"
#include "cor/sft_emitter.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cor::commands {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitAllFailed = 3;

struct IngestSummary {
    std::size_t examples = 0;
    std::size_t skipped = 0;
    std::filesystem::path output;
};

IngestSummary cmd_ingest_hotpot(const std::filesystem::path& input, corpus::HotpotSplit split,
                                const std::filesystem::path& output);
IngestSummary cmd_ingest_gorilla(const std::filesystem::path& api_db, const std::filesystem::path& queries,
                                 const std::string& framework, const std::filesystem::path& output);

// Loads and concatenates the configured canonical stores; every example must
// have the configured task kind.
[[nodiscard]] std::vector<corpus::Example> load_datasets(const config::RunConfig& config);

// Backend for `settings`; oracle and adversarial mocks learn `examples`.
[[nodiscard]] std::unique_ptr<backend::Backend> make_backend(const config::BackendSettings& settings,
                                                             const std::vector<corpus::Example>& examples,
                                                             ReasoningMode mode);

// Forced ID-line prefix for one presented context order, or nullopt when no
// forced ranking is configured. Throws InvalidArgument when the policy cannot
// be applied (no non-gold context for "wrong", position out of range).
[[nodiscard]] std::optional<std::string> forced_prefix(const std::string& policy, const corpus::Example& example,
                                                       const std::vector<DocId>& context_order);

struct EvalOutcome {
    metrics::RunReport report;
    std::filesystem::path run_dir;
    std::size_t prefix_fallbacks = 0;
    int exit_code = kExitOk;
};

// Full pipeline over every example; writes run.json, examples.jsonl,
// summary.json and table.txt into config.output_dir. `backend` overrides the
// configured one when given.
EvalOutcome cmd_eval(const config::RunConfig& config, backend::Backend* backend = nullptr);

struct EmitOutcome {
    sft::EmitResult emitted;
    sft::ValidationReport validation;
    std::filesystem::path sft_path;
    int exit_code = kExitOk;
};

// Writes sft.jsonl and validation.json into config.output_dir.
EmitOutcome cmd_emit(const config::RunConfig& config, backend::Backend* reasoning_backend = nullptr);

struct ValidateOutcome {
    sft::ValidationReport validation;
    int exit_code = kExitOk;
};

ValidateOutcome cmd_validate(const std::filesystem::path& sft_file);

struct JudgeOutcome {
    judge::JudgeReport report;
    std::vector<std::string> skipped;
    int exit_code = kExitOk;
};

// Judges a finished eval run with the config's judge backend; writes
// judge.jsonl and adds the verdict counts to summary.json and table.txt.
JudgeOutcome cmd_judge(const config::RunConfig& config, const std::filesystem::path& run_dir,
                       backend::Backend* judge_backend = nullptr);

struct ReportOutcome {
    std::string table;
    std::string json;
};

// Side-by-side comparison of finished runs, one section per task kind.
[[nodiscard]] ReportOutcome cmd_report(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace cor::commands
