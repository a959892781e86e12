#pragma once

#include "cor/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cor::parsing {

enum class ParseFlag : unsigned {
    missing_id_line = 1u << 0,
    out_of_range_id = 1u << 1,
    duplicate_id = 1u << 2,
    missing_answer_line = 1u << 3,
    // Unparseable tokens on the ID line, or another "## " section after the answer.
    trailing_garbage = 1u << 4,
};

class ParseFlags {
public:
    constexpr ParseFlags() = default;

    constexpr void set(ParseFlag f) noexcept { bits_ |= static_cast<unsigned>(f); }
    [[nodiscard]] constexpr bool has(ParseFlag f) const noexcept { return (bits_ & static_cast<unsigned>(f)) != 0; }
    [[nodiscard]] constexpr bool empty() const noexcept { return bits_ == 0; }
    [[nodiscard]] constexpr unsigned bits() const noexcept { return bits_; }

    // Flag names in declaration order.
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] static ParseFlags from_names(const std::vector<std::string>& names);

    friend constexpr bool operator==(ParseFlags, ParseFlags) = default;

private:
    unsigned bits_ = 0;
};

[[nodiscard]] std::string_view flag_name(ParseFlag f) noexcept;

struct ParsedOutput {
    std::vector<int> selected_positions;  // in-range, deduplicated, first-seen order
    std::vector<DocId> selected_doc_ids;  // selected_positions mapped through context_order
    std::optional<std::string> reasoning_text;
    std::string answer;
    ParseFlags flags;
    bool id_line_present = false;
    // The ID line as emitted (without trailing whitespace), empty if absent.
    std::string id_line_text;
};

// Chain-of-rank grammar: first "## Relevant Context ID:" line, then the first
// later "## Answer:" line. Total: never throws.
[[nodiscard]] ParsedOutput parse_cor(std::string_view raw, const std::vector<DocId>& context_order);

// Mode-aware entry point. DSF/CoT/CoN outputs are not expected to carry an ID
// line and are never flagged for its absence.
[[nodiscard]] ParsedOutput parse_output(std::string_view raw, ReasoningMode mode,
                                        const std::vector<DocId>& context_order);

enum class JudgeVerdict { yes, no, unparseable };

[[nodiscard]] std::string_view to_string(JudgeVerdict v) noexcept;
[[nodiscard]] std::optional<JudgeVerdict> parse_verdict_name(std::string_view name) noexcept;

// Last standalone case-insensitive "yes"/"no" token wins.
[[nodiscard]] JudgeVerdict parse_judge(std::string_view raw);

}  // namespace cor::parsing
