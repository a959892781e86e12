#include "cor/output_parser.hpp"

#include "cor/prompting.hpp"
#include "cor/text.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <utility>

namespace cor::parsing {

namespace {

constexpr std::array<std::pair<ParseFlag, std::string_view>, 5> kFlagNames{{
    {ParseFlag::missing_id_line, "missing_id_line"},
    {ParseFlag::out_of_range_id, "out_of_range_id"},
    {ParseFlag::duplicate_id, "duplicate_id"},
    {ParseFlag::missing_answer_line, "missing_answer_line"},
    {ParseFlag::trailing_garbage, "trailing_garbage"},
}};

std::string_view ltrim(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && text::is_space(s[i])) ++i;
    return s.substr(i);
}

bool is_header(std::string_view line, std::string_view header) {
    return ltrim(line).rfind(header, 0) == 0;
}

bool is_section(std::string_view line) {
    return ltrim(line).rfind("## ", 0) == 0;
}

std::string_view after_header(std::string_view line, std::string_view header) {
    return ltrim(line).substr(header.size());
}

std::optional<std::size_t> find_header(const std::vector<std::string_view>& lines, std::string_view header,
                                       std::size_t from) {
    for (std::size_t i = from; i < lines.size(); ++i) {
        if (is_header(lines[i], header)) return i;
    }
    return std::nullopt;
}

// Header remainder plus following lines up to the next "## " section.
// Returns the index one past the region.
std::size_t collect_section(const std::vector<std::string_view>& lines, std::size_t header_index,
                            std::string_view header, std::string& out) {
    std::string region(after_header(lines[header_index], header));
    std::size_t i = header_index + 1;
    for (; i < lines.size() && !is_section(lines[i]); ++i) {
        region.push_back('\n');
        region.append(lines[i]);
    }
    out = std::string(text::trim(region));
    return i;
}

void parse_ids(std::string_view rest, std::size_t context_count, ParsedOutput& out) {
    std::size_t i = 0;
    while (i < rest.size()) {
        while (i < rest.size() && (rest[i] == ',' || text::is_space(rest[i]))) ++i;
        const std::size_t start = i;
        while (i < rest.size() && rest[i] != ',' && !text::is_space(rest[i])) ++i;
        if (i == start) break;
        const std::string_view token = rest.substr(start, i - start);
        long long value = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ptr != token.data() + token.size() || (ec != std::errc{} && ec != std::errc::result_out_of_range)) {
            out.flags.set(ParseFlag::trailing_garbage);
            continue;
        }
        if (ec == std::errc::result_out_of_range || value < 1 || static_cast<unsigned long long>(value) > context_count) {
            out.flags.set(ParseFlag::out_of_range_id);
            continue;
        }
        const int position = static_cast<int>(value);
        if (std::find(out.selected_positions.begin(), out.selected_positions.end(), position) !=
            out.selected_positions.end()) {
            out.flags.set(ParseFlag::duplicate_id);
            continue;
        }
        out.selected_positions.push_back(position);
    }
}

std::string strip_answer_headers(std::string_view raw) {
    std::vector<std::string> kept;
    for (const auto line : text::split_lines(raw)) {
        if (is_header(line, prompting::kAnswerHeader)) {
            kept.emplace_back(after_header(line, prompting::kAnswerHeader));
        } else {
            kept.emplace_back(line);
        }
    }
    return std::string(text::trim(text::join(kept, "\n")));
}

}  // namespace

std::string_view flag_name(ParseFlag f) noexcept {
    for (const auto& [flag, name] : kFlagNames) {
        if (flag == f) return name;
    }
    return "?";
}

std::vector<std::string> ParseFlags::names() const {
    std::vector<std::string> out;
    for (const auto& [flag, name] : kFlagNames) {
        if (has(flag)) out.emplace_back(name);
    }
    return out;
}

ParseFlags ParseFlags::from_names(const std::vector<std::string>& names) {
    ParseFlags flags;
    for (const auto& n : names) {
        for (const auto& [flag, name] : kFlagNames) {
            if (name == n) flags.set(flag);
        }
    }
    return flags;
}

ParsedOutput parse_output(std::string_view raw, ReasoningMode mode, const std::vector<DocId>& context_order) {
    ParsedOutput out;
    const auto lines = text::split_lines(raw);

    std::size_t search_from = 0;
    if (has_id_line(mode)) {
        const auto id_index = find_header(lines, prompting::kIdHeader, 0);
        if (id_index) {
            out.id_line_present = true;
            out.id_line_text = std::string(text::trim(lines[*id_index]));
            parse_ids(after_header(lines[*id_index], prompting::kIdHeader), context_order.size(), out);
            search_from = *id_index + 1;
        } else {
            out.flags.set(ParseFlag::missing_id_line);
        }
    }

    const auto answer_index = find_header(lines, prompting::kAnswerHeader, search_from);

    if (has_reasoning_block(mode)) {
        const std::size_t limit = answer_index.value_or(lines.size());
        const auto reasoning_index = find_header(lines, prompting::kReasoningHeader, search_from);
        std::string reasoning;
        if (reasoning_index && *reasoning_index < limit) {
            collect_section(lines, *reasoning_index, prompting::kReasoningHeader, reasoning);
        } else if (answer_index) {
            std::vector<std::string> between(lines.begin() + static_cast<std::ptrdiff_t>(search_from),
                                             lines.begin() + static_cast<std::ptrdiff_t>(limit));
            reasoning = std::string(text::trim(text::join(between, "\n")));
        }
        if (!reasoning.empty()) out.reasoning_text = std::move(reasoning);
    }

    if (answer_index) {
        const std::size_t end = collect_section(lines, *answer_index, prompting::kAnswerHeader, out.answer);
        if (end < lines.size()) out.flags.set(ParseFlag::trailing_garbage);
    } else {
        out.flags.set(ParseFlag::missing_answer_line);
        out.answer = strip_answer_headers(raw);
    }

    for (const int p : out.selected_positions) {
        out.selected_doc_ids.push_back(context_order[static_cast<std::size_t>(p - 1)]);
    }
    return out;
}

ParsedOutput parse_cor(std::string_view raw, const std::vector<DocId>& context_order) {
    return parse_output(raw, ReasoningMode::cor, context_order);
}

std::string_view to_string(JudgeVerdict v) noexcept {
    switch (v) {
        case JudgeVerdict::yes: return "yes";
        case JudgeVerdict::no: return "no";
        case JudgeVerdict::unparseable: return "unparseable";
    }
    return "?";
}

std::optional<JudgeVerdict> parse_verdict_name(std::string_view name) noexcept {
    if (name == "yes") return JudgeVerdict::yes;
    if (name == "no") return JudgeVerdict::no;
    if (name == "unparseable") return JudgeVerdict::unparseable;
    return std::nullopt;
}

JudgeVerdict parse_judge(std::string_view raw) {
    JudgeVerdict verdict = JudgeVerdict::unparseable;
    std::size_t i = 0;
    while (i < raw.size()) {
        while (i < raw.size() && !text::is_alnum(raw[i])) ++i;
        const std::size_t start = i;
        while (i < raw.size() && text::is_alnum(raw[i])) ++i;
        const std::string token = text::lower(raw.substr(start, i - start));
        if (token == "yes") verdict = JudgeVerdict::yes;
        if (token == "no") verdict = JudgeVerdict::no;
    }
    return verdict;
}

}  // namespace cor::parsing
