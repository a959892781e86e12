#pragma once

#include "cor/retriever.hpp"
#include "cor/sft_emitter.hpp"
#include "cor/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cor::config {

// One answer-producing engine. kind: http | oracle | adversarial | scripted.
struct BackendSettings {
    std::string kind = "oracle";
    std::string url;
    std::string model;
    std::size_t max_in_flight = 4;
    int max_new_tokens = 256;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
    int max_attempts = 4;
    int base_delay_ms = 500;
    int timeout_s = 120;
    bool prefill = false;
    std::string script;  // scripted mocks
};

struct EmitSettings {
    double p_golden = 1.0;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    sft::DistractorSource distractor_source = sft::DistractorSource::retrieved;
    std::string reasoning_prompt;  // file; needed for reasoning modes
    std::string reasoning_cache;
};

struct RunConfig {
    std::vector<std::string> datasets;  // canonical store files
    TaskKind task_kind = TaskKind::qa;
    ReasoningMode mode = ReasoningMode::cor;
    std::size_t k = 10;
    retrieval::Bm25Params retriever;
    std::string prompt_template;  // optional file
    bool shuffle_contexts = false;
    // "" (off), "correct", "wrong", or a comma-separated position list.
    std::string forced_ranking;
    BackendSettings backend;
    BackendSettings judge = [] {
        BackendSettings s;
        s.kind = "scripted";
        return s;
    }();
    std::uint64_t judge_seed = 0;
    EmitSettings emit;
    std::uint64_t seed = 0;
    // Where results go; not part of the canonical form or the hash.
    std::string output_dir = "runs/latest";
};

// Strict JSON reader: unknown keys and wrong types are ConfigErrors.
[[nodiscard]] RunConfig parse_config(std::string_view json_text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

// Sorted-key JSON of every setting except output_dir.
[[nodiscard]] std::string canonical_json(const RunConfig& config);
[[nodiscard]] std::string config_hash(const RunConfig& config);

// k >= 1, parameters in range, forced ranking well-formed and usable in the
// mode, referenced files present. Throws ConfigError.
void validate(const RunConfig& config);

// Bearer token for http backends.
[[nodiscard]] std::string backend_token_from_env();

}  // namespace cor::config
