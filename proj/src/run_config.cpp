#include "cor/run_config.hpp"

#include "cor/digest.hpp"
#include "cor/error.hpp"
#include "cor/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <initializer_list>

namespace cor::config {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key " + std::string(where) + "." + key);
        }
    }
}

void read_count(const json& obj, const char* key, std::size_t& out, std::string_view where) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError("config key " + std::string(where) + "." + key + " must be an integer");
    const auto n = v.get<long long>();
    if (n < 1) throw ConfigError(std::string(where) + "." + key + " must be at least 1");
    out = static_cast<std::size_t>(n);
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key " + std::string(where) + "." + key + " has the wrong type");
    }
}

BackendSettings read_backend(const json& j, std::string_view where, BackendSettings s) {
    check_keys(j, where,
               {"kind", "url", "model", "max_in_flight", "max_new_tokens", "temperature", "seed", "max_attempts",
                "base_delay_ms", "timeout_s", "prefill", "script"});
    read(j, "kind", s.kind, where);
    read(j, "url", s.url, where);
    read(j, "model", s.model, where);
    read_count(j, "max_in_flight", s.max_in_flight, where);
    read(j, "max_new_tokens", s.max_new_tokens, where);
    read(j, "temperature", s.temperature, where);
    if (j.contains("seed") && !j["seed"].is_null()) {
        std::uint64_t seed = 0;
        read(j, "seed", seed, where);
        s.seed = seed;
    }
    read(j, "max_attempts", s.max_attempts, where);
    read(j, "base_delay_ms", s.base_delay_ms, where);
    read(j, "timeout_s", s.timeout_s, where);
    read(j, "prefill", s.prefill, where);
    read(j, "script", s.script, where);
    return s;
}

json backend_json(const BackendSettings& s) {
    return json{{"kind", s.kind},
                {"url", s.url},
                {"model", s.model},
                {"max_in_flight", s.max_in_flight},
                {"max_new_tokens", s.max_new_tokens},
                {"temperature", s.temperature},
                {"seed", s.seed ? json(*s.seed) : json(nullptr)},
                {"max_attempts", s.max_attempts},
                {"base_delay_ms", s.base_delay_ms},
                {"timeout_s", s.timeout_s},
                {"prefill", s.prefill},
                {"script", s.script}};
}

void validate_backend(const BackendSettings& s, std::string_view where) {
    const std::string w(where);
    if (s.kind == "http") {
        if (s.url.empty()) throw ConfigError(w + ".url is required for http backends");
        if (s.model.empty()) throw ConfigError(w + ".model is required for http backends");
    } else if (s.kind == "scripted") {
        if (s.script.empty()) throw ConfigError(w + ".script is required for scripted backends");
        if (!std::filesystem::exists(s.script)) throw ConfigError(w + ".script not found: " + s.script);
    } else if (s.kind != "oracle" && s.kind != "adversarial") {
        throw ConfigError(w + ".kind must be http, oracle, adversarial or scripted, got '" + s.kind + "'");
    }
    if (s.max_in_flight < 1) throw ConfigError(w + ".max_in_flight must be at least 1");
    if (s.max_new_tokens < 1) throw ConfigError(w + ".max_new_tokens must be at least 1");
    if (s.temperature < 0.0) throw ConfigError(w + ".temperature must be non-negative");
    if (s.max_attempts < 1) throw ConfigError(w + ".max_attempts must be at least 1");
    if (s.base_delay_ms < 0 || s.timeout_s < 1) throw ConfigError(w + " delays must be positive");
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"datasets", "task_kind", "mode", "k", "retriever", "prompting", "backend", "judge", "emit", "seed",
                "output_dir"});
    RunConfig c;
    if (root.contains("datasets")) {
        const auto& d = root["datasets"];
        if (d.is_string()) {
            c.datasets = {d.get<std::string>()};
        } else {
            read(root, "datasets", c.datasets, "config");
        }
    }
    if (root.contains("task_kind")) {
        std::string s;
        read(root, "task_kind", s, "config");
        const auto kind = parse_task_kind(s);
        if (!kind) throw ConfigError("task_kind must be qa or api, got '" + s + "'");
        c.task_kind = *kind;
    }
    if (root.contains("mode")) {
        std::string s;
        read(root, "mode", s, "config");
        const auto mode = parse_reasoning_mode(s);
        if (!mode) throw ConfigError("unknown mode '" + s + "'");
        c.mode = *mode;
    }
    read_count(root, "k", c.k, "config");
    read(root, "seed", c.seed, "config");
    read(root, "output_dir", c.output_dir, "config");
    if (root.contains("retriever")) {
        const auto& r = root["retriever"];
        check_keys(r, "retriever", {"k1", "b"});
        read(r, "k1", c.retriever.k1, "retriever");
        read(r, "b", c.retriever.b, "retriever");
    }
    if (root.contains("prompting")) {
        const auto& p = root["prompting"];
        check_keys(p, "prompting", {"template", "shuffle", "forced_ranking"});
        read(p, "template", c.prompt_template, "prompting");
        read(p, "shuffle", c.shuffle_contexts, "prompting");
        read(p, "forced_ranking", c.forced_ranking, "prompting");
    }
    if (root.contains("backend")) c.backend = read_backend(root["backend"], "backend", c.backend);
    if (root.contains("judge")) {
        json j = root["judge"];
        if (j.is_object() && j.contains("judge_seed")) {
            read(j, "judge_seed", c.judge_seed, "judge");
            j.erase("judge_seed");
        }
        c.judge = read_backend(j, "judge", c.judge);
    }
    if (root.contains("emit")) {
        const auto& e = root["emit"];
        check_keys(e, "emit", {"p_golden", "k", "seed", "distractor_source", "reasoning_prompt", "reasoning_cache"});
        read(e, "p_golden", c.emit.p_golden, "emit");
        read_count(e, "k", c.emit.k, "emit");
        read(e, "seed", c.emit.seed, "emit");
        if (e.contains("distractor_source")) {
            std::string s;
            read(e, "distractor_source", s, "emit");
            const auto src = sft::parse_distractor_source(s);
            if (!src) throw ConfigError("emit.distractor_source must be retrieved or random");
            c.emit.distractor_source = *src;
        }
        read(e, "reasoning_prompt", c.emit.reasoning_prompt, "emit");
        read(e, "reasoning_cache", c.emit.reasoning_cache, "emit");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = digest::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

std::string canonical_json(const RunConfig& c) {
    json judge = backend_json(c.judge);
    judge["judge_seed"] = c.judge_seed;
    const json root{
        {"datasets", c.datasets},
        {"task_kind", to_string(c.task_kind)},
        {"mode", to_string(c.mode)},
        {"k", c.k},
        {"retriever", {{"k1", c.retriever.k1}, {"b", c.retriever.b}}},
        {"prompting",
         {{"template", c.prompt_template}, {"shuffle", c.shuffle_contexts}, {"forced_ranking", c.forced_ranking}}},
        {"backend", backend_json(c.backend)},
        {"judge", judge},
        {"emit",
         {{"p_golden", c.emit.p_golden},
          {"k", c.emit.k},
          {"seed", c.emit.seed},
          {"distractor_source", sft::to_string(c.emit.distractor_source)},
          {"reasoning_prompt", c.emit.reasoning_prompt},
          {"reasoning_cache", c.emit.reasoning_cache}}},
        {"seed", c.seed}};
    return root.dump();
}

std::string config_hash(const RunConfig& config) {
    return digest::sha256_hex(canonical_json(config));
}

void validate(const RunConfig& c) {
    if (c.datasets.empty()) throw ConfigError("no datasets configured");
    for (const auto& d : c.datasets) {
        if (!std::filesystem::exists(d)) throw ConfigError("dataset not found: " + d);
    }
    if (c.k < 1) throw ConfigError("k must be at least 1");
    if (c.retriever.k1 < 0.0 || c.retriever.b < 0.0 || c.retriever.b > 1.0) {
        throw ConfigError("retriever parameters out of range (k1 >= 0, 0 <= b <= 1)");
    }
    if (!c.prompt_template.empty() && !std::filesystem::exists(c.prompt_template)) {
        throw ConfigError("prompt template not found: " + c.prompt_template);
    }
    if (!c.forced_ranking.empty()) {
        if (!has_id_line(c.mode)) {
            throw ConfigError("forced ranking needs a mode with an ID line, not " + std::string(to_string(c.mode)));
        }
        if (c.forced_ranking != "correct" && c.forced_ranking != "wrong") {
            for (const auto token : text::split_whitespace(text::replace_all(c.forced_ranking, ",", " "))) {
                if (!std::all_of(token.begin(), token.end(), [](char ch) { return ch >= '0' && ch <= '9'; }) ||
                    token.size() > 9 || std::stoi(std::string(token)) < 1) {
                    throw ConfigError("forced ranking must be correct, wrong or a list of positions, got '" +
                                      c.forced_ranking + "'");
                }
            }
        }
    }
    validate_backend(c.backend, "backend");
    if (c.emit.k < 1) throw ConfigError("emit.k must be at least 1");
    if (!(c.emit.p_golden >= 0.0 && c.emit.p_golden <= 1.0)) throw ConfigError("emit.p_golden must lie in [0, 1]");
}

std::string backend_token_from_env() {
    const char* token = std::getenv("COR_BACKEND_TOKEN");
    return token == nullptr ? std::string() : std::string(token);
}

}  // namespace cor::config
