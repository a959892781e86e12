#include "cor/sft_emitter.hpp"

#include "cor/digest.hpp"
#include "cor/error.hpp"
#include "cor/output_parser.hpp"
#include "cor/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <unordered_map>

namespace cor::sft {

using json = nlohmann::json;

std::string_view to_string(DistractorSource s) noexcept {
    return s == DistractorSource::retrieved ? "retrieved" : "random";
}

std::optional<DistractorSource> parse_distractor_source(std::string_view text) noexcept {
    if (text == "retrieved") return DistractorSource::retrieved;
    if (text == "random") return DistractorSource::random;
    return std::nullopt;
}

void MixingPolicy::validate() const {
    if (!(p_golden >= 0.0 && p_golden <= 1.0)) throw InvalidArgument("p_golden must lie in [0, 1]");
}

namespace {

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// First `n` elements of `items` after a partial Fisher-Yates pass.
template <typename T>
std::vector<T> sample(std::vector<T> items, std::size_t n, std::mt19937_64& rng) {
    n = std::min(n, items.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (items.size() - i));
        std::swap(items[i], items[j]);
    }
    items.resize(n);
    return items;
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[static_cast<std::size_t>(rng() % i)]);
    }
}

class IndexCache {
public:
    explicit IndexCache(retrieval::Bm25Params params) : params_(params) {}

    const retrieval::Bm25Index& get(const corpus::Example& ex) {
        const auto* key = ex.pool.get();
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, retrieval::Bm25Index(*ex.pool, params_)).first;
        return it->second;
    }

private:
    retrieval::Bm25Params params_;
    std::unordered_map<const corpus::ContextPool*, retrieval::Bm25Index> cache_;
};

std::vector<int> gold_positions(const std::vector<DocId>& order, const std::vector<DocId>& gold_ids) {
    std::vector<int> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (std::binary_search(gold_ids.begin(), gold_ids.end(), order[i])) out.push_back(static_cast<int>(i) + 1);
    }
    return out;
}

std::vector<DocId> sorted_ids(std::vector<DocId> ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

EmitResult emit(const std::vector<corpus::Example>& examples, const EmitOptions& options) {
    options.policy.validate();
    if (options.k == 0) throw InvalidArgument("k must be at least 1");
    if (has_reasoning_block(options.mode) && options.reasoning == nullptr) {
        throw InvalidArgument(std::string("mode ") + std::string(to_string(options.mode)) +
                              " needs reasoning text");
    }

    EmitResult result;
    std::mt19937_64 rng(options.policy.seed);
    IndexCache indexes(options.bm25);
    const bool retrieved = options.policy.distractor_source == DistractorSource::retrieved;

    for (const auto& ex : examples) {
        const bool gold = unit_draw(rng) < options.policy.p_golden;

        std::vector<DocId> order;
        if (gold) {
            if (retrieved) {
                const auto r = retrieval::retrieve(indexes.get(ex), ex.question, options.k);
                for (const auto& d : retrieval::ensure_gold(r, ex, options.k).docs) order.push_back(d.doc_id);
            } else {
                const std::size_t n = std::min(options.k, ex.pool_size());
                std::vector<DocId> others;
                for (DocId id = 1; id <= static_cast<DocId>(ex.pool_size()); ++id) {
                    if (!ex.is_gold(id)) others.push_back(id);
                }
                order.assign(ex.gold_ids.begin(),
                             ex.gold_ids.begin() + static_cast<std::ptrdiff_t>(std::min(n, ex.gold_ids.size())));
                for (const DocId id : sample(std::move(others), n - order.size(), rng)) order.push_back(id);
                shuffle(order, rng);
            }
        } else {
            std::vector<DocId> others;
            if (retrieved) {
                const auto r = retrieval::retrieve(indexes.get(ex), ex.question, ex.pool_size());
                for (const auto& d : r.ranked) {
                    if (!ex.is_gold(d.doc_id)) others.push_back(d.doc_id);
                }
            } else {
                for (DocId id = 1; id <= static_cast<DocId>(ex.pool_size()); ++id) {
                    if (!ex.is_gold(id)) others.push_back(id);
                }
            }
            if (others.size() < options.k) {
                spdlog::warn("emit: skipping {}: {} non-gold documents for k={}", ex.example_id, others.size(),
                             options.k);
                result.skipped_small_pool.push_back(ex.example_id);
                continue;
            }
            if (retrieved) {
                others.resize(options.k);
                order = std::move(others);
            } else {
                order = sample(std::move(others), options.k, rng);
            }
        }

        std::optional<std::string> reasoning;
        if (has_reasoning_block(options.mode)) {
            const auto it = options.reasoning->find(ex.example_id);
            if (it == options.reasoning->end()) {
                result.skipped_no_reasoning.push_back(ex.example_id);
                continue;
            }
            reasoning = it->second;
        }

        std::vector<corpus::ContextDoc> docs;
        docs.reserve(order.size());
        for (const DocId id : order) docs.push_back(ex.context(id));

        SftRecord rec;
        rec.prompt = prompting::render_prompt(options.mode, ex.question, docs, options.prompt_template).text + "\n";
        rec.example_id = ex.example_id;
        rec.mode = options.mode;
        rec.gold_present = gold;
        rec.context_order = std::move(order);
        rec.gold_ids = ex.gold_ids;
        rec.answer = ex.reference_answer();
        rec.k = options.k;
        if (gold) {
            rec.target = prompting::render_target(options.mode, gold_positions(rec.context_order, rec.gold_ids),
                                                  reasoning, rec.answer, rec.context_order.size());
        } else {
            rec.target = prompting::render_closed_book_target(options.mode, reasoning, rec.answer);
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

ValidationReport validate(const std::vector<SftRecord>& records) {
    ValidationReport report;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SftRecord& r = records[i];
        ++report.checked;
        std::vector<std::string> problems;

        const auto gold_ids = sorted_ids(r.gold_ids);
        const auto expected_positions = gold_positions(r.context_order, gold_ids);
        const bool has_gold = !expected_positions.empty();
        if (has_gold != r.gold_present) {
            problems.push_back(r.gold_present ? "gold_present but no gold id in context_order"
                                              : "gold withheld but a gold id is in context_order");
        }
        if (std::set<DocId>(r.context_order.begin(), r.context_order.end()).size() != r.context_order.size()) {
            problems.push_back("duplicate doc id in context_order");
        }
        if (r.context_order.empty()) problems.push_back("no contexts");
        if (r.gold_present && r.context_order.size() > r.k) problems.push_back("more than k contexts");
        if (!r.gold_present && r.context_order.size() != r.k) problems.push_back("closed-book record without k contexts");
        const std::size_t blocks = prompting::count_context_lines(r.prompt);
        if (blocks != r.context_order.size()) {
            problems.push_back("prompt has " + std::to_string(blocks) + " context lines, expected " +
                               std::to_string(r.context_order.size()));
        }

        const auto parsed = parsing::parse_output(r.target, r.mode, r.context_order);
        if (!parsed.flags.empty()) {
            problems.push_back("target parse flags: " + text::join(parsed.flags.names(), ","));
        }
        if (parsed.answer != r.answer) problems.push_back("answer does not round-trip");
        if (has_id_line(r.mode)) {
            if (!parsed.id_line_present) {
                problems.push_back("missing ID line");
            } else if (parsed.selected_positions != expected_positions) {
                problems.push_back("ID line does not name the gold positions");
            }
        } else if (r.target.find(prompting::kIdHeader) != std::string::npos) {
            problems.push_back("ID line in a mode without one");
        }
        if (has_reasoning_block(r.mode) && !parsed.reasoning_text) problems.push_back("missing reasoning block");

        for (auto& p : problems) report.failures.push_back(ValidationFailure{i, r.example_id, std::move(p)});
    }
    return report;
}

namespace {

json record_to_json(const SftRecord& r) {
    return json{{"prompt", r.prompt},
                {"completion", r.target},
                {"meta",
                 {{"example_id", r.example_id},
                  {"mode", to_string(r.mode)},
                  {"gold_present", r.gold_present},
                  {"closed_book", !r.gold_present},
                  {"context_order", r.context_order},
                  {"gold_ids", r.gold_ids},
                  {"answer", r.answer},
                  {"k", r.k}}}};
}

SftRecord record_from_json(const json& j) {
    SftRecord r;
    r.prompt = j.at("prompt").get<std::string>();
    r.target = j.at("completion").get<std::string>();
    const json& m = j.at("meta");
    r.example_id = m.at("example_id").get<std::string>();
    const auto mode = parse_reasoning_mode(m.at("mode").get<std::string>());
    if (!mode) throw std::invalid_argument("unknown mode " + m.at("mode").get<std::string>());
    r.mode = *mode;
    r.gold_present = m.at("gold_present").get<bool>();
    r.context_order = m.at("context_order").get<std::vector<DocId>>();
    r.gold_ids = m.at("gold_ids").get<std::vector<DocId>>();
    r.answer = m.at("answer").get<std::string>();
    r.k = m.at("k").get<std::size_t>();
    return r;
}

}  // namespace

std::string to_jsonl(const std::vector<SftRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<SftRecord> from_jsonl(const std::string& text) {
    std::vector<SftRecord> out;
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(text)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw FormatError("SFT line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    return out;
}

void write_sft(const std::vector<SftRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << to_jsonl(records);
    if (!out) throw ConfigError("write failed: " + path.string());
}

std::vector<SftRecord> read_sft(const std::filesystem::path& path) {
    return from_jsonl(digest::read_file(path));
}

namespace {

std::string fill_reasoning_prompt(std::string_view prompt, const corpus::Example& ex) {
    std::vector<std::string> contexts;
    for (const DocId id : ex.gold_ids) contexts.push_back(prompting::context_text(ex.doc(id)));
    std::vector<std::string> lines;
    for (const auto line : text::split_lines(prompt)) {
        if (line.find("{context_N}") != std::string_view::npos) {
            for (std::size_t i = 0; i < contexts.size(); ++i) {
                auto filled = text::replace_all(line, "{context_N}", contexts[i]);
                lines.push_back(text::replace_all(filled, "{N}", std::to_string(i + 1)));
            }
            continue;
        }
        lines.emplace_back(line);
    }
    std::string out = text::join(lines, "\n");
    out = text::replace_all(out, "{question}", ex.question);
    return text::replace_all(out, "{answer}", ex.reference_answer());
}

// A reasoning block must stay one section of the target.
std::optional<std::string> usable_reasoning(std::string_view raw) {
    std::vector<std::string> lines;
    for (const auto line : text::split_lines(raw)) {
        if (text::trim(line).rfind("## ", 0) == 0) return std::nullopt;
        lines.emplace_back(line);
    }
    std::string joined(text::trim(text::join(lines, "\n")));
    if (joined.empty()) return std::nullopt;
    return joined;
}

}  // namespace

std::map<std::string, std::string> attach_reasoning(const std::vector<corpus::Example>& examples,
                                                    const std::string& prompt_file_text, backend::Backend& backend,
                                                    const ReasoningOptions& options) {
    std::map<std::string, std::string> out;
    if (examples.empty()) return out;
    const std::string prompt_hash = digest::sha256_hex(prompt_file_text);

    if (!options.cache_path.empty() && std::filesystem::exists(options.cache_path)) {
        std::size_t lineno = 0;
        const std::string cached = digest::read_file(options.cache_path);
        for (const auto line : text::split_lines(cached)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            try {
                const json row = json::parse(line);
                if (row.at("prompt_hash").get<std::string>() != prompt_hash) continue;
                out.insert_or_assign(row.at("example_id").get<std::string>(), row.at("reasoning").get<std::string>());
            } catch (const json::exception& e) {
                throw FormatError("reasoning cache line " + std::to_string(lineno) + ": " + e.what(), lineno);
            }
        }
    }

    std::vector<const corpus::Example*> pending;
    std::vector<backend::GenRequest> requests;
    std::set<std::string> wanted;
    for (const auto& ex : examples) {
        wanted.insert(ex.example_id);
        if (out.count(ex.example_id) > 0) continue;
        backend::GenRequest r;
        r.prompt = fill_reasoning_prompt(prompt_file_text, ex);
        r.max_new_tokens = options.max_new_tokens;
        r.seed = options.seed;
        r.tag = ex.example_id;
        pending.push_back(&ex);
        requests.push_back(std::move(r));
    }

    const auto results = backend::generate_batch(backend, requests, options.max_in_flight, false);
    std::string appended;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string& id = pending[i]->example_id;
        if (!results[i].ok()) {
            spdlog::warn("reasoning: {} failed: {}", id, results[i].error);
            continue;
        }
        auto reasoning = usable_reasoning(results[i].response->text);
        if (!reasoning) {
            spdlog::warn("reasoning: {} produced no usable reasoning block", id);
            continue;
        }
        appended += json{{"example_id", id}, {"prompt_hash", prompt_hash}, {"reasoning", *reasoning}}.dump() + "\n";
        out.insert_or_assign(id, std::move(*reasoning));
    }
    if (!options.cache_path.empty() && !appended.empty()) {
        std::ofstream cache(options.cache_path, std::ios::binary | std::ios::app);
        if (!cache) throw ConfigError("cannot write reasoning cache " + options.cache_path.string());
        cache << appended;
    }

    for (auto it = out.begin(); it != out.end();) {
        it = wanted.count(it->first) > 0 ? std::next(it) : out.erase(it);
    }
    return out;
}

}  // namespace cor::sft
