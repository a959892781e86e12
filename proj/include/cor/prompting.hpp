#pragma once

#include "cor/corpus.hpp"
#include "cor/types.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cor::prompting {

struct RenderedPrompt {
    std::string text;                 // ends with "Output:"
    std::vector<DocId> context_order;  // label i refers to context_order[i-1]
    ReasoningMode mode = ReasoningMode::cor;
    // The question or a context contains a line that looks like a template
    // line ("Context3:", "## Answer:", ...). Rendered verbatim regardless.
    bool template_collision = false;
};

// A prompt layout with placeholders:
//   {question}      the question text
//   {context_N}     on a line of its own kind: that line is repeated once per
//                   context, with {N} replaced by the 1-based position
//   {context_3}     a specific context (empty if absent)
// The prompt ends at the first line that equals "Output:"; anything after it
// (e.g. "## Answer: {answer}") describes the target layout and is dropped.
class PromptTemplate {
public:
    explicit PromptTemplate(std::string source);

    [[nodiscard]] static PromptTemplate from_file(const std::filesystem::path& path);
    // Built-in layout for `mode`. The CoR layout is the reference chain-of-rank template.
    [[nodiscard]] static PromptTemplate builtin(ReasoningMode mode);

    [[nodiscard]] std::string render(std::string_view question,
                                     const std::vector<std::string>& context_texts) const;

    [[nodiscard]] const std::string& source() const noexcept { return source_; }

private:
    std::string source_;
};

// How one context appears in a prompt: "title: body", or just the body when
// the title is empty.
[[nodiscard]] std::string context_text(const corpus::ContextDoc& doc);

// Chain-of-rank prompt with the built-in layout. Throws InvalidArgument for an
// empty question or no contexts.
[[nodiscard]] RenderedPrompt render_cor(std::string_view question, const std::vector<corpus::ContextDoc>& contexts);

// Any mode, optionally with a user template.
[[nodiscard]] RenderedPrompt render_prompt(ReasoningMode mode, std::string_view question,
                                           const std::vector<corpus::ContextDoc>& contexts,
                                           const PromptTemplate* custom = nullptr);

inline constexpr std::string_view kIdHeader = "## Relevant Context ID:";
inline constexpr std::string_view kReasoningHeader = "## Reasoning:";
inline constexpr std::string_view kAnswerHeader = "## Answer:";

// "## Relevant Context ID: 3, 7"
[[nodiscard]] std::string id_line(const std::vector<int>& positions);

// Supervision / expected-output text:
//   cor           "## Relevant Context ID: 3, 7\n## Answer: Paris"
//   dsf           "## Answer: 42"
//   cot, con      "## Reasoning: ...\n## Answer: ..."
//   cor_plus_cot  ID line, reasoning line(s), answer line
// Throws InvalidArgument when an ID-line mode gets no positions, a position
// falls outside 1..context_count, or a reasoning mode gets no reasoning.
[[nodiscard]] std::string render_target(ReasoningMode mode, const std::vector<int>& selected_positions,
                                        const std::optional<std::string>& reasoning_text,
                                        std::string_view answer, std::size_t context_count);

// Target for a training record whose contexts hold no gold document: the ID
// line names no position and the answer is still the gold answer.
[[nodiscard]] std::string render_closed_book_target(ReasoningMode mode,
                                                    const std::optional<std::string>& reasoning_text,
                                                    std::string_view answer);

// Reasoning-evaluation prompt; exactly five contexts.
[[nodiscard]] std::string render_judge_prompt(std::string_view question,
                                              const std::vector<corpus::ContextDoc>& contexts,
                                              std::string_view reasoning_text);

// Number of lines of `prompt` of the form "Context<digits>:".
[[nodiscard]] std::size_t count_context_lines(std::string_view prompt);

}  // namespace cor::prompting
