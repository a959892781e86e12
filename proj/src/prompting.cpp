#include "cor/prompting.hpp"

#include "cor/digest.hpp"
#include "cor/error.hpp"
#include "cor/text.hpp"

#include <charconv>

namespace cor::prompting {

namespace {

constexpr std::string_view kCorTemplate =
    "Contexts and Question are given.\n"
    "\n"
    "Let's think step by step to make correct output.\n"
    "\n"
    "First, reranking goal: select the relevant contexts, important to answer the question correctly.\n"
    "\n"
    "Then, answering goal: Focusing on the selected context, answer the question.\n"
    "\n"
    "\n"
    "Question: {question}\n"
    "Context{N}: {context_N}\n"
    "\n"
    "Output:\n"
    "## Relevant Context ID: {IDs}\n"
    "## Answer: {answer}\n";

constexpr std::string_view kDsfTemplate =
    "Contexts and Question are given.\n"
    "\n"
    "Answering goal: using the contexts, answer the question.\n"
    "\n"
    "\n"
    "Question: {question}\n"
    "Context{N}: {context_N}\n"
    "\n"
    "Output:\n"
    "## Answer: {answer}\n";

constexpr std::string_view kCotTemplate =
    "Contexts and Question are given.\n"
    "\n"
    "Let's think step by step to make correct output.\n"
    "\n"
    "First, reasoning goal: explain step by step how the contexts lead to the answer.\n"
    "\n"
    "Then, answering goal: based on the reasoning, answer the question.\n"
    "\n"
    "\n"
    "Question: {question}\n"
    "Context{N}: {context_N}\n"
    "\n"
    "Output:\n"
    "## Reasoning: {reasoning}\n"
    "## Answer: {answer}\n";

constexpr std::string_view kConTemplate =
    "Contexts and Question are given.\n"
    "\n"
    "Let's think step by step to make correct output.\n"
    "\n"
    "First, note-taking goal: write a short reading note for each context stating whether it helps to "
    "answer the question.\n"
    "\n"
    "Then, answering goal: based on the notes, answer the question.\n"
    "\n"
    "\n"
    "Question: {question}\n"
    "Context{N}: {context_N}\n"
    "\n"
    "Output:\n"
    "## Reasoning: {reasoning}\n"
    "## Answer: {answer}\n";

constexpr std::string_view kCorCotTemplate =
    "Contexts and Question are given.\n"
    "\n"
    "Let's think step by step to make correct output.\n"
    "\n"
    "First, reranking goal: select the relevant contexts, important to answer the question correctly.\n"
    "\n"
    "Next, reasoning goal: explain step by step how the selected contexts lead to the answer.\n"
    "\n"
    "Then, answering goal: Focusing on the selected context, answer the question.\n"
    "\n"
    "\n"
    "Question: {question}\n"
    "Context{N}: {context_N}\n"
    "\n"
    "Output:\n"
    "## Relevant Context ID: {IDs}\n"
    "## Reasoning: {reasoning}\n"
    "## Answer: {answer}\n";

constexpr std::string_view kOutputLine = "Output:";

bool has_context_label(std::string_view s) {
    std::size_t pos = 0;
    while ((pos = s.find("Context", pos)) != std::string_view::npos) {
        std::size_t i = pos + 7;
        const std::size_t digits_start = i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
        if (i > digits_start && i < s.size() && s[i] == ':') return true;
        pos += 7;
    }
    return false;
}

bool collides_with_template(std::string_view s) {
    if (has_context_label(s)) return true;
    for (const auto line : text::split_lines(s)) {
        const auto t = text::trim(line);
        if (t.rfind("## ", 0) == 0 || t == kOutputLine) return true;
    }
    return false;
}

// Single pass over `line`: placeholders are replaced, substituted text is
// never rescanned.
std::string substitute(std::string_view line, std::string_view question,
                       const std::vector<std::string>& contexts, std::size_t repeat_position) {
    std::string out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] != '{') {
            out.push_back(line[i++]);
            continue;
        }
        const std::size_t close = line.find('}', i);
        if (close == std::string_view::npos) {
            out.append(line.substr(i));
            break;
        }
        const std::string_view name = line.substr(i + 1, close - i - 1);
        if (name == "question") {
            out.append(question);
        } else if (name == "N" && repeat_position > 0) {
            out.append(std::to_string(repeat_position));
        } else if (name == "context_N" && repeat_position > 0) {
            out.append(contexts[repeat_position - 1]);
        } else if (name.rfind("context_", 0) == 0) {
            std::size_t index = 0;
            const auto digits = name.substr(8);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
            if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
                out.append(line.substr(i, close - i + 1));
            } else if (index >= 1 && index <= contexts.size()) {
                out.append(contexts[index - 1]);
            }
        } else {
            out.append(line.substr(i, close - i + 1));
        }
        i = close + 1;
    }
    return out;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string source) : source_(std::move(source)) {
    bool has_output = false;
    for (const auto line : text::split_lines(source_)) {
        if (text::trim(line) == kOutputLine) {
            has_output = true;
            break;
        }
    }
    if (!has_output) throw ConfigError("prompt template has no \"Output:\" line");
    if (source_.find("{question}") == std::string::npos) {
        throw ConfigError("prompt template has no {question} placeholder");
    }
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
    try {
        return PromptTemplate(digest::read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

PromptTemplate PromptTemplate::builtin(ReasoningMode mode) {
    switch (mode) {
        case ReasoningMode::dsf: return PromptTemplate(std::string(kDsfTemplate));
        case ReasoningMode::cot: return PromptTemplate(std::string(kCotTemplate));
        case ReasoningMode::con: return PromptTemplate(std::string(kConTemplate));
        case ReasoningMode::cor: return PromptTemplate(std::string(kCorTemplate));
        case ReasoningMode::cor_plus_cot: return PromptTemplate(std::string(kCorCotTemplate));
    }
    throw InvalidArgument("unknown reasoning mode");
}

std::string PromptTemplate::render(std::string_view question, const std::vector<std::string>& context_texts) const {
    std::vector<std::string> lines;
    for (const auto line : text::split_lines(source_)) {
        if (text::trim(line) == kOutputLine) {
            lines.emplace_back(kOutputLine);
            break;
        }
        if (line.find("{context_N}") != std::string_view::npos) {
            for (std::size_t pos = 1; pos <= context_texts.size(); ++pos) {
                lines.push_back(substitute(line, question, context_texts, pos));
            }
        } else {
            lines.push_back(substitute(line, question, context_texts, 0));
        }
    }
    return text::join(lines, "\n");
}

std::string context_text(const corpus::ContextDoc& doc) {
    return doc.title.empty() ? doc.body : doc.title + ": " + doc.body;
}

RenderedPrompt render_prompt(ReasoningMode mode, std::string_view question,
                             const std::vector<corpus::ContextDoc>& contexts, const PromptTemplate* custom) {
    if (text::trim(question).empty()) throw InvalidArgument("cannot render a prompt for an empty question");
    if (contexts.empty()) throw InvalidArgument("cannot render a prompt without contexts");

    RenderedPrompt prompt;
    prompt.mode = mode;
    std::vector<std::string> texts;
    texts.reserve(contexts.size());
    prompt.template_collision = collides_with_template(question);
    for (const auto& c : contexts) {
        texts.push_back(context_text(c));
        prompt.context_order.push_back(c.doc_id);
        if (collides_with_template(texts.back())) prompt.template_collision = true;
    }
    if (custom != nullptr) {
        prompt.text = custom->render(question, texts);
    } else {
        prompt.text = PromptTemplate::builtin(mode).render(question, texts);
    }
    return prompt;
}

RenderedPrompt render_cor(std::string_view question, const std::vector<corpus::ContextDoc>& contexts) {
    return render_prompt(ReasoningMode::cor, question, contexts);
}

std::string id_line(const std::vector<int>& positions) {
    std::string line(kIdHeader);
    line.push_back(' ');
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i > 0) line += ", ";
        line += std::to_string(positions[i]);
    }
    return line;
}

namespace {

std::string reasoning_line(const std::optional<std::string>& reasoning_text) {
    if (!reasoning_text || text::trim(*reasoning_text).empty()) {
        throw InvalidArgument("reasoning modes need reasoning text");
    }
    return std::string(kReasoningHeader) + " " + *reasoning_text;
}

std::string answer_line(std::string_view answer) {
    return std::string(kAnswerHeader) + " " + std::string(answer);
}

}  // namespace

std::string render_target(ReasoningMode mode, const std::vector<int>& selected_positions,
                          const std::optional<std::string>& reasoning_text, std::string_view answer,
                          std::size_t context_count) {
    if (has_id_line(mode)) {
        if (selected_positions.empty()) throw InvalidArgument("chain-of-rank targets need at least one position");
        for (const int p : selected_positions) {
            if (p < 1 || static_cast<std::size_t>(p) > context_count) {
                throw InvalidArgument("position " + std::to_string(p) + " outside 1.." +
                                      std::to_string(context_count));
            }
        }
    }
    switch (mode) {
        case ReasoningMode::dsf: return answer_line(answer);
        case ReasoningMode::cot:
        case ReasoningMode::con: return reasoning_line(reasoning_text) + "\n" + answer_line(answer);
        case ReasoningMode::cor: return id_line(selected_positions) + "\n" + answer_line(answer);
        case ReasoningMode::cor_plus_cot:
            return id_line(selected_positions) + "\n" + reasoning_line(reasoning_text) + "\n" + answer_line(answer);
    }
    throw InvalidArgument("unknown reasoning mode");
}

std::string render_closed_book_target(ReasoningMode mode, const std::optional<std::string>& reasoning_text,
                                      std::string_view answer) {
    switch (mode) {
        case ReasoningMode::cor: return id_line({}) + "\n" + answer_line(answer);
        case ReasoningMode::cor_plus_cot:
            return id_line({}) + "\n" + reasoning_line(reasoning_text) + "\n" + answer_line(answer);
        default: return render_target(mode, {}, reasoning_text, answer, 0);
    }
}

std::string render_judge_prompt(std::string_view question, const std::vector<corpus::ContextDoc>& contexts,
                                std::string_view reasoning_text) {
    if (contexts.size() != 5) {
        throw InvalidArgument("judge prompt needs exactly 5 contexts, got " + std::to_string(contexts.size()));
    }
    std::string out =
        "You are an expert at evaluating reasoning based on provided information. Given a question, five "
        "retrieved contexts, and reasoning, your task is to determine whether the reasoning is based on the "
        "correct context. The correct context is the one that contains the most relevant and accurate "
        "information to answer the question.\n"
        "\n"
        "Follow these steps:\n"
        "1. Identify which retrieved context contains the most accurate information to answer the question "
        "(the \"golden context\").\n"
        "2. Evaluate if the reasoning is based primarily on this golden context.\n"
        "3. Provide a clear answer (Yes or No).\n"
        "\n"
        "### Question:\n";
    out.append(question);
    out += "\n\n### Retrieved Contexts:\n";
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        out += std::to_string(i + 1) + ". " + context_text(contexts[i]) + "\n";
    }
    out += "\n### Reasoning:\n";
    out.append(reasoning_text);
    out +=
        "\n\n### Evaluation:\n"
        "Is the reasoning based on the correct context? Answer with \"Yes\" or \"No\".";
    return out;
}

std::size_t count_context_lines(std::string_view prompt) {
    std::size_t n = 0;
    for (const auto line : text::split_lines(prompt)) {
        if (line.rfind("Context", 0) != 0) continue;
        std::size_t i = 7;
        while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
        if (i > 7 && i < line.size() && line[i] == ':') ++n;
    }
    return n;
}

}  // namespace cor::prompting
