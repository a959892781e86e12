#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small ASCII string helpers shared by the modules.
namespace cor::text {

[[nodiscard]] constexpr bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

[[nodiscard]] constexpr bool is_alnum(char c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

[[nodiscard]] constexpr char to_lower(char c) noexcept {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;
[[nodiscard]] std::string lower(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line. An input ending in
// '\n' yields a final empty line.
[[nodiscard]] std::vector<std::string_view> split_lines(std::string_view s);

// Splits on runs of ASCII whitespace; no empty tokens.
[[nodiscard]] std::vector<std::string_view> split_whitespace(std::string_view s);

[[nodiscard]] bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

// Replaces every occurrence of `from` (non-empty) with `to`.
[[nodiscard]] std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

// Newlines, carriage returns and tabs become single spaces.
[[nodiscard]] std::string flatten_line_breaks(std::string_view s);

[[nodiscard]] std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace cor::text
