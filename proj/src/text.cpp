#include "cor/text.hpp"
#include "cor/types.hpp"

#include <array>
#include <utility>

namespace cor {

namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 2> kTaskKinds{{
    {TaskKind::qa, "qa"},
    {TaskKind::api, "api"},
}};

constexpr std::array<std::pair<ReasoningMode, std::string_view>, 5> kModes{{
    {ReasoningMode::dsf, "dsf"},
    {ReasoningMode::cot, "cot"},
    {ReasoningMode::con, "con"},
    {ReasoningMode::cor, "cor"},
    {ReasoningMode::cor_plus_cot, "cor_plus_cot"},
}};

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
    for (const auto& [k, name] : kTaskKinds) {
        if (k == kind) return name;
    }
    return "?";
}

std::string_view to_string(ReasoningMode mode) noexcept {
    for (const auto& [m, name] : kModes) {
        if (m == mode) return name;
    }
    return "?";
}

std::optional<TaskKind> parse_task_kind(std::string_view text) noexcept {
    for (const auto& [k, name] : kTaskKinds) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::optional<ReasoningMode> parse_reasoning_mode(std::string_view text) noexcept {
    for (const auto& [m, name] : kModes) {
        if (name == text) return m;
    }
    return std::nullopt;
}

}  // namespace cor

namespace cor::text {

std::string_view trim(std::string_view s) noexcept {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    return s.substr(begin, end - begin);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = to_lower(c);
    return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (true) {
        const std::size_t nl = s.find('\n', start);
        std::string_view line =
            s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) tokens.push_back(s.substr(start, i - start));
    }
    return tokens;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (to_lower(s[i]) != to_lower(prefix[i])) return false;
    }
    return true;
}

std::string replace_all(std::string_view s, std::string_view from, std::string_view to) {
    std::string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (true) {
        const std::size_t hit = s.find(from, pos);
        if (hit == std::string_view::npos) {
            out.append(s.substr(pos));
            break;
        }
        out.append(s.substr(pos, hit - pos));
        out.append(to);
        pos = hit + from.size();
    }
    return out;
}

std::string flatten_line_breaks(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace cor::text
