#include "cor/judge.hpp"

#include "cor/digest.hpp"
#include "cor/prompting.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace cor::judge {

namespace {

constexpr std::size_t kJudgeContexts = 5;

std::string context_phrase(DocId id, const std::vector<corpus::ContextDoc>& contexts) {
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (contexts[i].doc_id == id) return "Context" + std::to_string(i + 1);
    }
    return "a context not listed above";
}

}  // namespace

std::string restate_selection(const std::vector<DocId>& selected_doc_ids,
                              const std::vector<corpus::ContextDoc>& contexts) {
    if (selected_doc_ids.empty()) return "The reasoning selected no context.";
    std::string out = "The reasoning selected ";
    for (std::size_t i = 0; i < selected_doc_ids.size(); ++i) {
        if (i > 0) out += (i + 1 == selected_doc_ids.size()) ? " and " : ", ";
        out += context_phrase(selected_doc_ids[i], contexts);
    }
    out += ".";
    return out;
}

TaskBuild build_judge_tasks(const std::vector<JudgeSource>& sources, std::uint64_t seed) {
    TaskBuild build;
    for (const auto& src : sources) {
        const bool has_gold = std::any_of(src.contexts.begin(), src.contexts.end(),
                                          [](const corpus::ContextDoc& d) { return d.is_gold; });
        if (!has_gold || src.contexts.size() < kJudgeContexts) {
            spdlog::warn("judge: skipping {} ({})", src.example_id,
                         has_gold ? "fewer than five contexts" : "no gold context");
            build.skipped.push_back(src.example_id);
            continue;
        }

        std::vector<std::size_t> order(src.contexts.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto score_of = [&](std::size_t i) { return i < src.scores.size() ? src.scores[i] : 0.0; };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (src.contexts[a].is_gold != src.contexts[b].is_gold) return src.contexts[a].is_gold;
            return score_of(a) > score_of(b);
        });
        order.resize(kJudgeContexts);

        std::mt19937_64 rng(seed ^ digest::fnv1a64(src.example_id));
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng() % (i + 1)]);
        }

        JudgeTask task;
        task.example_id = src.example_id;
        task.question = src.question;
        for (const std::size_t i : order) task.contexts.push_back(src.contexts[i]);
        std::vector<std::string> parts;
        if (src.selected_doc_ids) parts.push_back(restate_selection(*src.selected_doc_ids, task.contexts));
        if (src.reasoning_text && !src.reasoning_text->empty()) parts.push_back(*src.reasoning_text);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i > 0) task.reasoning_text += "\n";
            task.reasoning_text += parts[i];
        }
        build.tasks.push_back(std::move(task));
    }
    return build;
}

JudgeReport judge_run(std::vector<JudgeTask> tasks, backend::Backend& backend, const JudgeOptions& options) {
    std::vector<backend::GenRequest> requests;
    requests.reserve(tasks.size());
    for (const auto& t : tasks) {
        backend::GenRequest r;
        r.prompt = prompting::render_judge_prompt(t.question, t.contexts, t.reasoning_text);
        r.max_new_tokens = options.max_new_tokens;
        r.seed = options.seed;
        r.tag = t.example_id;
        requests.push_back(std::move(r));
    }
    const auto results = backend::generate_batch(backend, requests, options.max_in_flight, false);

    JudgeReport report;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        parsing::JudgeVerdict v = parsing::JudgeVerdict::unparseable;
        if (results[i].ok()) {
            v = parsing::parse_judge(results[i].response->text);
        } else {
            spdlog::warn("judge: {} failed: {}", tasks[i].example_id, results[i].error);
            ++report.backend_errors;
        }
        tasks[i].verdict = v;
        switch (v) {
            case parsing::JudgeVerdict::yes: ++report.yes; break;
            case parsing::JudgeVerdict::no: ++report.no; break;
            case parsing::JudgeVerdict::unparseable: ++report.unparseable; break;
        }
    }
    if (!tasks.empty()) report.yes_rate = static_cast<double>(report.yes) / static_cast<double>(tasks.size());
    report.tasks = std::move(tasks);
    return report;
}

}  // namespace cor::judge
