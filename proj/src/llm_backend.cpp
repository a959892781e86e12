#include "cor/llm_backend.hpp"

#include "cor/prompting.hpp"
#include "cor/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <thread>

namespace cor::backend {

using json = nlohmann::json;

void GenRequest::validate() const {
    if (max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be at least 1");
    if (temperature < 0.0) throw InvalidArgument("temperature must be non-negative");
}

GenResponse Backend::generate(const GenRequest& request) {
    request.validate();
    ++calls_;
    GenResponse response = do_generate(request);
    if (request.forced_prefix && response.text.rfind(*request.forced_prefix, 0) != 0) {
        response.text = *request.forced_prefix + response.text;
    }
    return response;
}

GenResponse generate_with_fallback(Backend& backend, const GenRequest& request) {
    try {
        return backend.generate(request);
    } catch (const CapabilityError&) {
        if (!request.forced_prefix) throw;
        GenRequest embedded = request;
        embedded.prompt += "\n" + *request.forced_prefix;
        embedded.forced_prefix.reset();
        GenResponse response = backend.generate(embedded);
        response.text = *request.forced_prefix + response.text;
        response.prefix_in_prompt = true;
        return response;
    }
}

std::vector<BatchItem> generate_batch(Backend& backend, const std::vector<GenRequest>& requests,
                                      std::size_t max_in_flight, bool prefix_fallback) {
    if (max_in_flight == 0) throw InvalidArgument("max_in_flight must be at least 1");
    std::vector<BatchItem> results(requests.size());
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            BatchItem& item = results[i];
            try {
                item.response = prefix_fallback ? generate_with_fallback(backend, requests[i])
                                                : backend.generate(requests[i]);
                item.attempts = 1;
            } catch (const BackendError& e) {
                item.error = e.what();
                item.attempts = e.attempts();
            } catch (const std::exception& e) {
                item.error = e.what();
                item.attempts = 1;
            }
        }
    };

    const std::size_t workers = std::min(max_in_flight, requests.size());
    if (workers <= 1) {
        worker();
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();  // joins
    return results;
}

// ---------------------------------------------------------------------------
// Oracle

std::unordered_map<std::string, OracleKnowledge> oracle_knowledge(const std::vector<corpus::Example>& examples) {
    std::unordered_map<std::string, OracleKnowledge> out;
    for (const auto& ex : examples) {
        OracleKnowledge k;
        for (const DocId id : ex.gold_ids) k.gold_context_texts.push_back(prompting::context_text(ex.doc(id)));
        k.answer = ex.reference_answer();
        out.emplace(ex.example_id, std::move(k));
    }
    return out;
}

namespace {

struct PromptContext {
    int position = 0;
    std::string_view text;
};

std::vector<PromptContext> prompt_contexts(std::string_view prompt) {
    std::vector<PromptContext> out;
    for (const auto line : text::split_lines(prompt)) {
        if (line.rfind("Context", 0) != 0) continue;
        std::size_t i = 7;
        int position = 0;
        while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
            position = position * 10 + (line[i] - '0');
            ++i;
        }
        if (i == 7 || i + 1 >= line.size() || line[i] != ':' || line[i + 1] != ' ') continue;
        out.push_back(PromptContext{position, line.substr(i + 2)});
    }
    return out;
}

std::string section_header(std::string_view line) {
    const auto colon = line.find(':');
    return colon == std::string_view::npos ? std::string(line) : std::string(line.substr(0, colon + 1));
}

}  // namespace

OracleBackend::OracleBackend(std::unordered_map<std::string, OracleKnowledge> knowledge, ReasoningMode mode,
                             Policy policy)
    : knowledge_(std::move(knowledge)), mode_(mode), policy_(policy) {}

std::string OracleBackend::id() const {
    return std::string(policy_ == Policy::gold_ids ? "oracle-mock/" : "adversarial-mock/") +
           std::string(to_string(mode_));
}

GenResponse OracleBackend::do_generate(const GenRequest& request) {
    const auto it = knowledge_.find(request.tag);
    if (it == knowledge_.end()) throw BackendError("oracle mock: unknown example '" + request.tag + "'", 1);
    const OracleKnowledge& k = it->second;

    std::vector<int> gold_positions;
    std::vector<int> other_positions;
    for (const auto& c : prompt_contexts(request.prompt)) {
        const bool gold = std::find(k.gold_context_texts.begin(), k.gold_context_texts.end(), c.text) !=
                          k.gold_context_texts.end();
        (gold ? gold_positions : other_positions).push_back(c.position);
    }
    std::vector<int> named = gold_positions;
    if (policy_ == Policy::wrong_ids) {
        const std::size_t n = std::min(std::max<std::size_t>(gold_positions.size(), 1), other_positions.size());
        named.assign(other_positions.begin(), other_positions.begin() + static_cast<std::ptrdiff_t>(n));
    }

    std::vector<std::string> lines;
    if (has_id_line(mode_)) lines.push_back(prompting::id_line(named));
    if (has_reasoning_block(mode_)) {
        std::string reasoning = "The answer is supported by";
        if (named.empty()) {
            reasoning += " none of the contexts.";
        } else {
            for (std::size_t i = 0; i < named.size(); ++i) {
                reasoning += (i == 0 ? " Context" : " and Context") + std::to_string(named[i]);
            }
            reasoning += ".";
        }
        lines.push_back(std::string(prompting::kReasoningHeader) + " " + reasoning);
    }
    lines.push_back(std::string(prompting::kAnswerHeader) + " " + k.answer);

    GenResponse response;
    response.backend_id = id();
    if (!request.forced_prefix) {
        response.text = text::join(lines, "\n");
        return response;
    }
    const std::string& prefix = *request.forced_prefix;
    std::vector<std::string> continuation;
    for (auto& line : lines) {
        if (prefix.find(section_header(line)) == std::string::npos) continuation.push_back(line);
    }
    response.text = prefix;
    if (!continuation.empty()) {
        if (!prefix.empty() && prefix.back() != '\n') response.text.push_back('\n');
        response.text += text::join(continuation, "\n");
    }
    return response;
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedBackend::ScriptedBackend(std::unordered_map<std::string, Entry> script, std::string name)
    : script_(std::move(script)), name_(std::move(name)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock script " + path.string());
    std::unordered_map<std::string, Entry> script;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const json row = json::parse(line);
            Entry e;
            e.response = row.at("response").get<std::string>();
            if (row.contains("completion_tokens")) {
                e.usage = TokenUsage{row.value("prompt_tokens", 0), row.at("completion_tokens").get<int>()};
            }
            script.insert_or_assign(row.at("match").get<std::string>(), std::move(e));
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    return std::make_unique<ScriptedBackend>(std::move(script), "scripted:" + path.filename().string());
}

GenResponse ScriptedBackend::do_generate(const GenRequest& request) {
    auto it = script_.find(request.tag);
    if (it == script_.end()) it = script_.find("*");
    if (it == script_.end()) throw BackendError("scripted mock: no response for '" + request.tag + "'", 1);
    GenResponse response;
    response.text = it->second.response;
    response.usage = it->second.usage;
    response.backend_id = id();
    return response;
}

}  // namespace cor::backend
