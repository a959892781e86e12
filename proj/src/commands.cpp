#include "cor/commands.hpp"

#include "cor/api_ast.hpp"
#include "cor/digest.hpp"
#include "cor/error.hpp"
#include "cor/output_parser.hpp"
#include "cor/prompting.hpp"
#include "cor/retriever.hpp"
#include "cor/text.hpp"

#include <json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <unordered_map>

namespace cor::commands {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
    try {
        return json::parse(digest::read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what(), 1);
    }
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json aggregates_json(const metrics::Aggregates& a) {
    return json{{"count", a.count},
                {"failed", a.failed},
                {"em_pct", opt(a.em_pct)},
                {"f1_pct", opt(a.f1_pct)},
                {"ast_pct", opt(a.ast_pct)},
                {"ranking_exact_pct", a.ranking_exact_pct},
                {"ranking_contains_gold_pct", a.ranking_contains_gold_pct},
                {"mean_reasoning_tokens", a.mean_reasoning_tokens},
                {"mean_reasoning_model_tokens", opt(a.mean_reasoning_model_tokens)},
                {"judge_yes_pct", opt(a.judge_yes_pct)}};
}

// ---------------------------------------------------------------------------
// Tables

struct TableRow {
    std::string label;
    std::string task_kind;
    std::string mode;
    std::string k;
    json aggregates;
};

std::string cell(const json& v) {
    if (v.is_null()) return "-";
    return fmt::format("{:.2f}", v.get<double>());
}

std::string render_tables(const std::vector<TableRow>& rows) {
    std::string out;
    for (const std::string kind : {"qa", "api"}) {
        std::vector<const TableRow*> section;
        for (const auto& r : rows) {
            if (r.task_kind == kind) section.push_back(&r);
        }
        if (section.empty()) continue;
        std::vector<std::string> header{"run", "mode", "k", "n", "failed"};
        if (kind == "qa") {
            header.insert(header.end(), {"EM", "F1"});
        } else {
            header.emplace_back("AST");
        }
        header.insert(header.end(), {"rank_exact", "rank_gold", "judge_yes", "reason_tok"});

        std::vector<std::vector<std::string>> cells{header};
        for (const TableRow* r : section) {
            const json& a = r->aggregates;
            const bool ranked = parse_reasoning_mode(r->mode).has_value() && has_id_line(*parse_reasoning_mode(r->mode));
            std::vector<std::string> line{r->label, r->mode, r->k, std::to_string(a.at("count").get<std::size_t>()),
                                          std::to_string(a.at("failed").get<std::size_t>())};
            if (kind == "qa") {
                line.push_back(cell(a.at("em_pct")));
                line.push_back(cell(a.at("f1_pct")));
            } else {
                line.push_back(cell(a.at("ast_pct")));
            }
            line.push_back(ranked ? cell(a.at("ranking_exact_pct")) : "-");
            line.push_back(ranked ? cell(a.at("ranking_contains_gold_pct")) : "-");
            line.push_back(cell(a.at("judge_yes_pct")));
            line.push_back(cell(a.at("mean_reasoning_tokens")));
            cells.push_back(std::move(line));
        }

        std::vector<std::size_t> width(header.size(), 0);
        for (const auto& line : cells) {
            for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
        }
        if (!out.empty()) out += "\n";
        out += "[" + kind + "]\n";
        for (const auto& line : cells) {
            std::string text_line;
            for (std::size_t c = 0; c < line.size(); ++c) {
                if (c > 0) text_line += "  ";
                text_line += c < 4 ? fmt::format("{:<{}}", line[c], width[c]) : fmt::format("{:>{}}", line[c], width[c]);
            }
            while (!text_line.empty() && text_line.back() == ' ') text_line.pop_back();
            out += text_line + "\n";
        }
    }
    return out;
}

TableRow row_from_summary(const json& summary, std::string label) {
    const json& meta = summary.at("metadata");
    return TableRow{std::move(label), meta.at("task_kind").get<std::string>(), meta.at("mode").get<std::string>(),
                    meta.at("k").get<std::string>(), summary.at("aggregates")};
}

// ---------------------------------------------------------------------------
// Eval helpers

class IndexCache {
public:
    explicit IndexCache(retrieval::Bm25Params params) : params_(params) {}

    const retrieval::Bm25Index& get(const corpus::Example& ex) {
        auto it = cache_.find(ex.pool.get());
        if (it == cache_.end()) it = cache_.emplace(ex.pool.get(), retrieval::Bm25Index(*ex.pool, params_)).first;
        return it->second;
    }

private:
    retrieval::Bm25Params params_;
    std::unordered_map<const corpus::ContextPool*, retrieval::Bm25Index> cache_;
};

struct Prepared {
    const corpus::Example* example = nullptr;
    retrieval::ContextSelection selection;
    std::vector<DocId> context_order;
    std::optional<std::string> forced;
    bool template_collision = false;
    std::optional<std::size_t> request_index;
    std::string error;
};

json detail_json(const metrics::ExampleScore& s, const Prepared& p, const backend::BatchItem* item,
                 const parsing::ParsedOutput* parsed) {
    json row{{"example_id", s.example_id},
             {"task_kind", to_string(s.task_kind)},
             {"em", opt(s.em)},
             {"f1", opt(s.f1)},
             {"ast_match", opt(s.ast_match)},
             {"ast_lenient_callee", s.ast_lenient_callee},
             {"ranking_exact", s.ranking_exact},
             {"ranking_contains_gold", s.ranking_contains_gold},
             {"reasoning_tokens", s.reasoning_tokens},
             {"reasoning_model_tokens", opt(s.reasoning_model_tokens)},
             {"parse_flags", s.parse_flags.names()},
             {"error", opt(s.error)},
             {"context_order", p.context_order},
             {"context_scores", p.selection.scores},
             {"gold_ids", p.example->gold_ids},
             {"gold_injected", p.selection.gold_injected},
             {"template_collision", p.template_collision},
             {"forced_prefix", opt(p.forced)}};
    row["completion"] = item != nullptr && item->ok() ? json(item->response->text) : json(nullptr);
    row["prefix_in_prompt"] = item != nullptr && item->ok() && item->response->prefix_in_prompt;
    if (parsed != nullptr) {
        row["answer"] = parsed->answer;
        row["selected_positions"] = parsed->selected_positions;
        row["selected_doc_ids"] = parsed->selected_doc_ids;
        row["id_line"] = parsed->id_line_present ? json(parsed->id_line_text) : json(nullptr);
        row["reasoning_text"] = opt(parsed->reasoning_text);
    } else {
        row["answer"] = nullptr;
        row["selected_positions"] = json::array();
        row["selected_doc_ids"] = json::array();
        row["id_line"] = nullptr;
        row["reasoning_text"] = nullptr;
    }
    return row;
}

metrics::ExampleScore failed_score(const corpus::Example& ex, std::string error) {
    metrics::ExampleScore s;
    s.example_id = ex.example_id;
    s.task_kind = ex.task_kind;
    if (ex.task_kind == TaskKind::qa) {
        s.em = 0;
        s.f1 = 0.0;
    } else {
        s.ast_match = 0;
    }
    s.error = std::move(error);
    return s;
}

std::map<std::string, std::string> input_digests(const config::RunConfig& config) {
    std::map<std::string, std::string> out;
    for (const auto& d : config.datasets) out[d] = digest::git_blob_id_of_file(d);
    if (!config.prompt_template.empty()) out[config.prompt_template] = digest::git_blob_id_of_file(config.prompt_template);
    if (config.backend.kind == "scripted") out[config.backend.script] = digest::git_blob_id_of_file(config.backend.script);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

IngestSummary cmd_ingest_hotpot(const fs::path& input, corpus::HotpotSplit split, const fs::path& output) {
    auto ingested = corpus::ingest_hotpot(input, split);
    if (ingested.skipped_no_gold + ingested.skipped_context_count > 0) {
        spdlog::warn("ingest: skipped {} entries without a matching gold context and {} with a malformed context list",
                     ingested.skipped_no_gold, ingested.skipped_context_count);
    }
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    corpus::save_canonical(ingested.examples, output);
    return IngestSummary{ingested.examples.size(), ingested.skipped_no_gold + ingested.skipped_context_count, output};
}

IngestSummary cmd_ingest_gorilla(const fs::path& api_db, const fs::path& queries, const std::string& framework,
                                 const fs::path& output) {
    auto ingested = corpus::ingest_gorilla(api_db, queries, framework);
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    corpus::save_canonical(ingested.examples, output);
    return IngestSummary{ingested.examples.size(), 0, output};
}

std::vector<corpus::Example> load_datasets(const config::RunConfig& config) {
    std::vector<corpus::Example> all;
    for (const auto& path : config.datasets) {
        auto part = corpus::load_canonical(path);
        for (auto& ex : part) {
            if (ex.task_kind != config.task_kind) {
                throw ConfigError("dataset " + path + " holds " + std::string(to_string(ex.task_kind)) +
                                  " examples but task_kind is " + std::string(to_string(config.task_kind)));
            }
            all.push_back(std::move(ex));
        }
    }
    return all;
}

std::unique_ptr<backend::Backend> make_backend(const config::BackendSettings& s,
                                               const std::vector<corpus::Example>& examples, ReasoningMode mode) {
    if (s.kind == "oracle") return std::make_unique<backend::OracleBackend>(backend::oracle_knowledge(examples), mode);
    if (s.kind == "adversarial") {
        return std::make_unique<backend::AdversarialBackend>(backend::oracle_knowledge(examples), mode);
    }
    if (s.kind == "scripted") return backend::ScriptedBackend::from_file(s.script);
    if (s.kind == "http") {
        backend::HttpBackendConfig hc;
        hc.url = s.url;
        hc.model = s.model;
        hc.bearer_token = config::backend_token_from_env();
        hc.max_attempts = s.max_attempts;
        hc.base_delay = std::chrono::milliseconds(s.base_delay_ms);
        hc.timeout = std::chrono::seconds(s.timeout_s);
        hc.prefill = s.prefill;
        return std::make_unique<backend::HttpBackend>(std::move(hc));
    }
    throw ConfigError("unknown backend kind '" + s.kind + "'");
}

std::optional<std::string> forced_prefix(const std::string& policy, const corpus::Example& ex,
                                         const std::vector<DocId>& order) {
    if (policy.empty()) return std::nullopt;
    std::vector<int> gold;
    std::vector<int> other;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (ex.is_gold(order[i]) ? gold : other).push_back(static_cast<int>(i) + 1);
    }
    std::vector<int> named;
    if (policy == "correct") {
        if (gold.empty()) throw InvalidArgument("forced ranking 'correct': no gold context presented");
        named = gold;
    } else if (policy == "wrong") {
        if (other.empty()) throw InvalidArgument("forced ranking 'wrong': every presented context is gold");
        const std::size_t n = std::min(std::max<std::size_t>(gold.size(), 1), other.size());
        named.assign(other.begin(), other.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
        for (const auto token : text::split_whitespace(text::replace_all(policy, ",", " "))) {
            const int p = std::stoi(std::string(token));
            if (p < 1 || static_cast<std::size_t>(p) > order.size()) {
                throw InvalidArgument("forced ranking position " + std::to_string(p) + " outside 1.." +
                                      std::to_string(order.size()));
            }
            named.push_back(p);
        }
    }
    return prompting::id_line(named) + "\n";
}

EvalOutcome cmd_eval(const config::RunConfig& config, backend::Backend* backend_override) {
    config::validate(config);
    const auto examples = load_datasets(config);
    if (examples.empty()) throw ConfigError("the configured datasets hold no examples");
    std::optional<prompting::PromptTemplate> custom;
    if (!config.prompt_template.empty()) custom = prompting::PromptTemplate::from_file(config.prompt_template);

    std::unique_ptr<backend::Backend> owned;
    backend::Backend* engine = backend_override;
    if (engine == nullptr) {
        owned = make_backend(config.backend, examples, config.mode);
        engine = owned.get();
    }

    IndexCache indexes(config.retriever);
    std::vector<Prepared> prepared(examples.size());
    std::vector<backend::GenRequest> requests;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        Prepared& p = prepared[i];
        p.example = &ex;
        try {
            const auto result = retrieval::retrieve(indexes.get(ex), ex.question, config.k);
            p.selection = retrieval::ensure_gold(result, ex, config.k);
            if (config.shuffle_contexts) {
                std::mt19937_64 rng(config.seed ^ digest::fnv1a64(ex.example_id));
                for (std::size_t j = p.selection.docs.size(); j > 1; --j) {
                    const std::size_t r = static_cast<std::size_t>(rng() % j);
                    std::swap(p.selection.docs[j - 1], p.selection.docs[r]);
                    std::swap(p.selection.scores[j - 1], p.selection.scores[r]);
                }
            }
            const auto prompt = prompting::render_prompt(config.mode, ex.question, p.selection.docs,
                                                         custom ? &*custom : nullptr);
            p.context_order = prompt.context_order;
            p.template_collision = prompt.template_collision;
            p.forced = forced_prefix(config.forced_ranking, ex, p.context_order);

            backend::GenRequest req;
            req.prompt = prompt.text;
            req.forced_prefix = p.forced;
            req.max_new_tokens = config.backend.max_new_tokens;
            req.temperature = config.backend.temperature;
            req.seed = config.backend.seed;
            req.tag = ex.example_id;
            p.request_index = requests.size();
            requests.push_back(std::move(req));
        } catch (const Error& e) {
            p.error = e.what();
            for (const auto& d : p.selection.docs) p.context_order.push_back(d.doc_id);
        }
    }

    const auto results = backend::generate_batch(*engine, requests, config.backend.max_in_flight);

    std::vector<metrics::ExampleScore> scores;
    std::vector<std::pair<std::string, json>> details;
    std::size_t fallbacks = 0;
    for (const auto& p : prepared) {
        const auto& ex = *p.example;
        const backend::BatchItem* item = p.request_index ? &results[*p.request_index] : nullptr;
        if (item != nullptr && !item->ok()) {
            spdlog::warn("eval: {}: {}", ex.example_id, item->error);
        }
        if (item == nullptr || !item->ok()) {
            auto s = failed_score(ex, item == nullptr ? p.error : item->error);
            details.emplace_back(ex.example_id, detail_json(s, p, item, nullptr));
            scores.push_back(std::move(s));
            continue;
        }
        const auto& response = *item->response;
        if (response.prefix_in_prompt) ++fallbacks;
        const auto parsed = parsing::parse_output(response.text, config.mode, p.context_order);

        metrics::ExampleScore s;
        s.example_id = ex.example_id;
        s.task_kind = ex.task_kind;
        if (ex.task_kind == TaskKind::qa) {
            s.em = metrics::exact_match(parsed.answer, ex.gold_answers);
            s.f1 = metrics::f1_score(parsed.answer, ex.gold_answers);
        } else if (ex.gold_api) {
            const auto verdict = ast::score_api_answer(parsed.answer, *ex.gold_api);
            s.ast_match = verdict.matched ? 1 : 0;
            s.ast_lenient_callee = verdict.lenient_callee;
        } else {
            s.ast_match = 0;
        }
        if (has_id_line(config.mode)) {
            const auto rank = metrics::ranking_score(parsed.selected_doc_ids, ex.gold_ids);
            s.ranking_exact = rank.exact;
            s.ranking_contains_gold = rank.contains_gold;
        }
        s.reasoning_tokens = metrics::reasoning_tokens(parsed, config.mode);
        std::optional<int> completion_tokens;
        if (response.usage) completion_tokens = response.usage->completion_tokens;
        s.reasoning_model_tokens =
            metrics::reasoning_model_tokens(parsed, config.mode, response.text, completion_tokens);
        s.parse_flags = parsed.flags;
        details.emplace_back(ex.example_id, detail_json(s, p, item, &parsed));
        scores.push_back(std::move(s));
    }

    const auto digests = input_digests(config);
    const std::string hash = config::config_hash(config);
    std::map<std::string, std::string> metadata{{"mode", std::string(to_string(config.mode))},
                                                {"task_kind", std::string(to_string(config.task_kind))},
                                                {"k", std::to_string(config.k)},
                                                {"backend_id", engine->id()},
                                                {"config_hash", hash},
                                                {"forced_ranking", config.forced_ranking},
                                                {"retrieval_pool", config.task_kind == TaskKind::api
                                                                       ? "per-framework"
                                                                       : "per-example"},
                                                {"prefix_fallbacks", std::to_string(fallbacks)}};

    EvalOutcome outcome;
    outcome.report = metrics::aggregate(std::move(scores), metadata);
    outcome.prefix_fallbacks = fallbacks;
    outcome.run_dir = config.output_dir;
    if (outcome.report.aggregates.failed == outcome.report.aggregates.count) outcome.exit_code = kExitAllFailed;

    fs::create_directories(outcome.run_dir);
    json run{{"config", json::parse(config::canonical_json(config))},
             {"config_hash", hash},
             {"input_digests", digests},
             {"backend_id", engine->id()}};
    write_text(outcome.run_dir / "run.json", run.dump(2) + "\n");

    std::stable_sort(details.begin(), details.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string lines;
    for (const auto& [id, row] : details) lines += row.dump() + "\n";
    write_text(outcome.run_dir / "examples.jsonl", lines);

    json summary{{"aggregates", aggregates_json(outcome.report.aggregates)},
                 {"metadata", metadata},
                 {"input_digests", digests}};
    write_text(outcome.run_dir / "summary.json", summary.dump(2) + "\n");
    write_text(outcome.run_dir / "table.txt", render_tables({row_from_summary(summary, "run")}));
    spdlog::info("eval: {} examples, {} failed, written to {}", outcome.report.aggregates.count,
                 outcome.report.aggregates.failed, outcome.run_dir.string());
    return outcome;
}

EmitOutcome cmd_emit(const config::RunConfig& config, backend::Backend* reasoning_backend) {
    if (config.emit.k < 1) throw ConfigError("emit.k must be at least 1");
    config::validate(config);
    const auto examples = load_datasets(config);
    std::optional<prompting::PromptTemplate> custom;
    if (!config.prompt_template.empty()) custom = prompting::PromptTemplate::from_file(config.prompt_template);

    std::map<std::string, std::string> reasoning;
    if (has_reasoning_block(config.mode)) {
        if (config.emit.reasoning_prompt.empty()) {
            throw ConfigError("mode " + std::string(to_string(config.mode)) + " needs emit.reasoning_prompt");
        }
        std::unique_ptr<backend::Backend> owned;
        if (reasoning_backend == nullptr) {
            owned = make_backend(config.backend, examples, config.mode);
            reasoning_backend = owned.get();
        }
        sft::ReasoningOptions ro;
        ro.max_in_flight = config.backend.max_in_flight;
        ro.seed = config.backend.seed;
        ro.cache_path = config.emit.reasoning_cache;
        std::string prompt_text;
        try {
            prompt_text = digest::read_file(config.emit.reasoning_prompt);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        reasoning = sft::attach_reasoning(examples, prompt_text, *reasoning_backend, ro);
    }

    sft::EmitOptions options;
    options.mode = config.mode;
    options.policy = sft::MixingPolicy{config.emit.p_golden, config.emit.distractor_source, config.emit.seed};
    options.k = config.emit.k;
    options.bm25 = config.retriever;
    options.reasoning = has_reasoning_block(config.mode) ? &reasoning : nullptr;
    options.prompt_template = custom ? &*custom : nullptr;

    EmitOutcome outcome;
    outcome.emitted = sft::emit(examples, options);
    outcome.validation = sft::validate(outcome.emitted.records);
    fs::create_directories(config.output_dir);
    outcome.sft_path = fs::path(config.output_dir) / "sft.jsonl";
    sft::write_sft(outcome.emitted.records, outcome.sft_path);

    std::size_t gold = 0;
    for (const auto& r : outcome.emitted.records) gold += r.gold_present ? 1 : 0;
    json failures = json::array();
    for (const auto& f : outcome.validation.failures) {
        failures.push_back(json{{"index", f.index}, {"example_id", f.example_id}, {"reason", f.reason}});
    }
    json report{{"records", outcome.emitted.records.size()},
                {"gold_present", gold},
                {"skipped_small_pool", outcome.emitted.skipped_small_pool},
                {"skipped_no_reasoning", outcome.emitted.skipped_no_reasoning},
                {"failures", failures},
                {"config_hash", config::config_hash(config)}};
    write_text(fs::path(config.output_dir) / "validation.json", report.dump(2) + "\n");
    if (!outcome.validation.ok()) outcome.exit_code = kExitValidation;
    return outcome;
}

ValidateOutcome cmd_validate(const fs::path& sft_file) {
    ValidateOutcome outcome;
    outcome.validation = sft::validate(sft::read_sft(sft_file));
    if (!outcome.validation.ok()) outcome.exit_code = kExitValidation;
    return outcome;
}

JudgeOutcome cmd_judge(const config::RunConfig& config, const fs::path& run_dir, backend::Backend* judge_backend) {
    const json run = read_json(run_dir / "run.json");
    const auto run_config = config::parse_config(run.at("config").dump());
    if (!has_id_line(run_config.mode) && !has_reasoning_block(run_config.mode)) {
        throw ConfigError("run in " + run_dir.string() + " used mode " + std::string(to_string(run_config.mode)) +
                          ", which has no reasoning region to judge");
    }
    const auto examples = load_datasets(run_config);
    const auto digests = run.at("input_digests").get<std::map<std::string, std::string>>();
    for (const auto& d : run_config.datasets) {
        const auto it = digests.find(d);
        if (it != digests.end() && it->second != digest::git_blob_id_of_file(d)) {
            spdlog::warn("judge: {} changed since the run was made", d);
        }
    }
    std::unordered_map<std::string, const corpus::Example*> by_id;
    for (const auto& ex : examples) by_id.emplace(ex.example_id, &ex);

    std::vector<judge::JudgeSource> sources;
    std::vector<std::string> skipped;
    const std::string rows_text = digest::read_file(run_dir / "examples.jsonl");
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(rows_text)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError("examples.jsonl line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        const auto id = row.at("example_id").get<std::string>();
        const auto it = by_id.find(id);
        if (!row.at("error").is_null() || it == by_id.end()) {
            skipped.push_back(id);
            continue;
        }
        const corpus::Example& ex = *it->second;
        judge::JudgeSource src;
        src.example_id = id;
        src.question = ex.question;
        for (const DocId d : row.at("context_order").get<std::vector<DocId>>()) src.contexts.push_back(ex.context(d));
        src.scores = row.at("context_scores").get<std::vector<double>>();
        if (has_id_line(run_config.mode)) src.selected_doc_ids = row.at("selected_doc_ids").get<std::vector<DocId>>();
        if (has_reasoning_block(run_config.mode) && !row.at("reasoning_text").is_null()) {
            src.reasoning_text = row.at("reasoning_text").get<std::string>();
        }
        sources.push_back(std::move(src));
    }

    auto built = judge::build_judge_tasks(sources, config.judge_seed);
    skipped.insert(skipped.end(), built.skipped.begin(), built.skipped.end());

    std::unique_ptr<backend::Backend> owned;
    if (judge_backend == nullptr) {
        if (config.judge.kind != "http" && config.judge.kind != "scripted") {
            throw ConfigError("judge.kind must be http or scripted");
        }
        owned = make_backend(config.judge, examples, run_config.mode);
        judge_backend = owned.get();
    }
    judge::JudgeOptions jo;
    jo.max_in_flight = config.judge.max_in_flight;
    jo.max_new_tokens = config.judge.max_new_tokens;
    jo.seed = config.judge.seed;

    JudgeOutcome outcome;
    outcome.report = judge::judge_run(std::move(built.tasks), *judge_backend, jo);
    outcome.skipped = std::move(skipped);

    std::string lines;
    for (const auto& t : outcome.report.tasks) {
        std::vector<DocId> ids;
        for (const auto& c : t.contexts) ids.push_back(c.doc_id);
        lines += json{{"example_id", t.example_id},
                      {"contexts", ids},
                      {"reasoning_text", t.reasoning_text},
                      {"verdict", parsing::to_string(*t.verdict)}}
                     .dump() +
                 "\n";
    }
    write_text(run_dir / "judge.jsonl", lines);

    json summary = read_json(run_dir / "summary.json");
    const double pct = 100.0 * outcome.report.yes_rate;
    summary["aggregates"]["judge_yes_pct"] = outcome.report.tasks.empty() ? json(nullptr) : json(pct);
    summary["judge"] = json{{"backend_id", judge_backend->id()},
                            {"tasks", outcome.report.tasks.size()},
                            {"yes", outcome.report.yes},
                            {"no", outcome.report.no},
                            {"unparseable", outcome.report.unparseable},
                            {"backend_errors", outcome.report.backend_errors},
                            {"skipped", outcome.skipped.size()},
                            {"seed", config.judge_seed}};
    write_text(run_dir / "summary.json", summary.dump(2) + "\n");
    write_text(run_dir / "table.txt", render_tables({row_from_summary(summary, "run")}));
    return outcome;
}

ReportOutcome cmd_report(const std::vector<fs::path>& run_dirs) {
    if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
    std::vector<TableRow> rows;
    json runs = json::array();
    for (const auto& dir : run_dirs) {
        const json summary = read_json(dir / "summary.json");
        const std::string label = fs::path(dir).lexically_normal().filename().empty()
                                      ? fs::path(dir).lexically_normal().parent_path().filename().string()
                                      : fs::path(dir).lexically_normal().filename().string();
        rows.push_back(row_from_summary(summary, label));
        json entry = summary;
        entry["run"] = label;
        runs.push_back(std::move(entry));
    }
    ReportOutcome out;
    out.table = render_tables(rows);
    out.json = json{{"runs", runs}}.dump(2) + "\n";
    return out;
}

}  // namespace cor::commands
