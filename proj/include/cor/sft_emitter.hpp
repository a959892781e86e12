#pragma once

#include "cor/corpus.hpp"
#include "cor/llm_backend.hpp"
#include "cor/prompting.hpp"
#include "cor/retriever.hpp"
#include "cor/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cor::sft {

enum class DistractorSource { retrieved, random };

[[nodiscard]] std::string_view to_string(DistractorSource s) noexcept;
[[nodiscard]] std::optional<DistractorSource> parse_distractor_source(std::string_view text) noexcept;

struct MixingPolicy {
    double p_golden = 1.0;  // share of records whose contexts include gold
    DistractorSource distractor_source = DistractorSource::retrieved;
    std::uint64_t seed = 0;

    // Throws InvalidArgument unless 0 <= p_golden <= 1.
    void validate() const;
};

struct SftRecord {
    std::string prompt;
    std::string target;
    std::string example_id;
    ReasoningMode mode = ReasoningMode::cor;
    bool gold_present = true;
    std::vector<DocId> context_order;
    std::vector<DocId> gold_ids;
    std::string answer;
    std::size_t k = 0;

    friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

struct EmitResult {
    std::vector<SftRecord> records;
    // Gold withheld but fewer than k non-gold documents.
    std::vector<std::string> skipped_small_pool;
    // Reasoning modes only: no reasoning text for the example.
    std::vector<std::string> skipped_no_reasoning;
};

struct EmitOptions {
    ReasoningMode mode = ReasoningMode::cor;
    MixingPolicy policy;
    std::size_t k = 10;
    retrieval::Bm25Params bm25;
    // Required for modes with a reasoning block.
    const std::map<std::string, std::string>* reasoning = nullptr;
    const prompting::PromptTemplate* prompt_template = nullptr;
};

// One record per example, drawn in input order from a single seeded stream.
// Throws InvalidArgument for k == 0 or an invalid policy.
[[nodiscard]] EmitResult emit(const std::vector<corpus::Example>& examples, const EmitOptions& options);

struct ValidationFailure {
    std::size_t index = 0;
    std::string example_id;
    std::string reason;
};

struct ValidationReport {
    std::size_t checked = 0;
    std::vector<ValidationFailure> failures;
    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

// Re-parses each target and checks it against the record's own metadata.
[[nodiscard]] ValidationReport validate(const std::vector<SftRecord>& records);

// {"prompt", "completion", "meta"} per line.
[[nodiscard]] std::string to_jsonl(const std::vector<SftRecord>& records);
[[nodiscard]] std::vector<SftRecord> from_jsonl(const std::string& text);
void write_sft(const std::vector<SftRecord>& records, const std::filesystem::path& path);
[[nodiscard]] std::vector<SftRecord> read_sft(const std::filesystem::path& path);

struct ReasoningOptions {
    std::size_t max_in_flight = 4;
    int max_new_tokens = 512;
    std::optional<std::uint64_t> seed;
    // Line-delimited JSON cache; empty path disables caching.
    std::filesystem::path cache_path;
};

// Fills a generation prompt ({question}, {answer}, {context_N} lines over the
// gold contexts) per example and collects the backend's reasoning. Cached by
// (example_id, sha256 of the prompt file). Failed or unusable generations are
// left out and logged.
[[nodiscard]] std::map<std::string, std::string> attach_reasoning(const std::vector<corpus::Example>& examples,
                                                                  const std::string& prompt_file_text,
                                                                  backend::Backend& backend,
                                                                  const ReasoningOptions& options = {});

}  // namespace cor::sft
