#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cor {

// Identifier of a context document inside one example's pool (1-based).
using DocId = int;

enum class TaskKind { qa, api };

enum class ReasoningMode { dsf, cot, con, cor, cor_plus_cot };

[[nodiscard]] std::string_view to_string(TaskKind kind) noexcept;
[[nodiscard]] std::string_view to_string(ReasoningMode mode) noexcept;

[[nodiscard]] std::optional<TaskKind> parse_task_kind(std::string_view text) noexcept;
[[nodiscard]] std::optional<ReasoningMode> parse_reasoning_mode(std::string_view text) noexcept;

// Modes whose output starts with the "## Relevant Context ID:" line.
[[nodiscard]] constexpr bool has_id_line(ReasoningMode mode) noexcept {
    return mode == ReasoningMode::cor || mode == ReasoningMode::cor_plus_cot;
}

// Modes whose output carries a free-text reasoning block.
[[nodiscard]] constexpr bool has_reasoning_block(ReasoningMode mode) noexcept {
    return mode == ReasoningMode::cot || mode == ReasoningMode::con ||
           mode == ReasoningMode::cor_plus_cot;
}

}  // namespace cor
