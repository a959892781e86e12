#include "cor/corpus.hpp"

#include "cor/api_ast.hpp"
#include "cor/digest.hpp"
#include "cor/error.hpp"
#include "cor/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cor::corpus {

using json = nlohmann::json;

bool Example::is_gold(DocId id) const noexcept {
    return std::binary_search(gold_ids.begin(), gold_ids.end(), id);
}

const ContextDoc& Example::doc(DocId id) const {
    if (id < 1 || static_cast<std::size_t>(id) > pool_size()) {
        throw InvalidArgument("doc_id " + std::to_string(id) + " outside pool of example " + example_id);
    }
    return (*pool)[static_cast<std::size_t>(id - 1)];
}

ContextDoc Example::context(DocId id) const {
    ContextDoc c = doc(id);
    c.is_gold = is_gold(id);
    return c;
}

std::vector<ContextDoc> Example::contexts() const {
    std::vector<ContextDoc> out;
    out.reserve(pool_size());
    for (std::size_t i = 0; i < pool_size(); ++i) out.push_back(context(static_cast<DocId>(i + 1)));
    return out;
}

const std::string& Example::reference_answer() const {
    if (task_kind == TaskKind::api) {
        if (!gold_api) throw InvalidArgument("api example " + example_id + " has no gold API");
        return gold_api->api_call;
    }
    if (gold_answers.empty()) throw InvalidArgument("qa example " + example_id + " has no gold answer");
    return gold_answers.front();
}

void Example::check_invariants() const {
    const auto fail = [this](const std::string& what) {
        throw InvalidArgument("example " + example_id + ": " + what);
    };
    if (pool_size() == 0) fail("empty context pool");
    for (std::size_t i = 0; i < pool->size(); ++i) {
        const ContextDoc& d = (*pool)[i];
        if (d.doc_id != static_cast<DocId>(i + 1)) fail("doc_ids are not contiguous from 1");
        if (text::trim(d.body).empty()) fail("context " + std::to_string(d.doc_id) + " has an empty body");
    }
    if (gold_ids.empty()) fail("no gold context");
    if (!std::is_sorted(gold_ids.begin(), gold_ids.end()) ||
        std::adjacent_find(gold_ids.begin(), gold_ids.end()) != gold_ids.end()) {
        fail("gold_ids not sorted and unique");
    }
    if (gold_ids.front() < 1 || static_cast<std::size_t>(gold_ids.back()) > pool_size()) {
        fail("gold id outside the pool");
    }
    if (task_kind == TaskKind::qa && gold_answers.empty()) fail("qa example without gold answers");
    if (task_kind == TaskKind::api && !gold_api) fail("api example without gold API");
}

bool operator==(const Example& a, const Example& b) {
    const bool pools_equal = (a.pool == b.pool) || (a.pool && b.pool && *a.pool == *b.pool);
    return pools_equal && a.example_id == b.example_id && a.question == b.question &&
           a.gold_ids == b.gold_ids && a.gold_answers == b.gold_answers && a.gold_api == b.gold_api &&
           a.task_kind == b.task_kind;
}

// ---------------------------------------------------------------------------
// HotPotQA

namespace {

json parse_json_file(const std::filesystem::path& path) {
    const std::string content = digest::read_file(path);
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        throw IngestError(path.string() + ": invalid JSON: " + e.what(), 0);
    }
}

const json& require(const json& obj, const char* key, json::value_t type, std::size_t index) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->type() != type) {
        throw IngestError("entry " + std::to_string(index) + ": missing or mistyped field '" + key + "'",
                          index);
    }
    return *it;
}

}  // namespace

HotpotIngest ingest_hotpot(const std::filesystem::path& path, HotpotSplit split) {
    const json root = parse_json_file(path);
    if (!root.is_array()) throw IngestError(path.string() + ": expected a top-level array", 0);

    HotpotIngest result;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& entry = root[i];
        if (!entry.is_object()) throw IngestError("entry " + std::to_string(i) + ": not an object", i);

        const auto& id = require(entry, "_id", json::value_t::string, i);
        const auto& question = require(entry, "question", json::value_t::string, i);
        const auto& answer = require(entry, "answer", json::value_t::string, i);
        const auto& context = require(entry, "context", json::value_t::array, i);
        const auto& facts = require(entry, "supporting_facts", json::value_t::array, i);

        std::set<std::string> supporting_titles;
        for (const auto& fact : facts) {
            if (!fact.is_array() || fact.empty() || !fact[0].is_string()) {
                throw IngestError("entry " + std::to_string(i) + ": malformed supporting fact", i);
            }
            supporting_titles.insert(fact[0].get<std::string>());
        }

        auto pool = std::make_shared<ContextPool>();
        std::vector<DocId> gold;
        bool empty_body = false;
        for (const auto& c : context) {
            if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_array()) {
                throw IngestError("entry " + std::to_string(i) + ": malformed context", i);
            }
            std::vector<std::string> sentences;
            for (const auto& s : c[1]) {
                if (!s.is_string()) {
                    throw IngestError("entry " + std::to_string(i) + ": non-string sentence", i);
                }
                const auto trimmed = text::trim(s.get_ref<const std::string&>());
                if (!trimmed.empty()) sentences.emplace_back(trimmed);
            }
            ContextDoc doc;
            doc.doc_id = static_cast<DocId>(pool->size() + 1);
            doc.title = c[0].get<std::string>();
            doc.body = text::join(sentences, " ");
            if (doc.body.empty()) empty_body = true;
            if (supporting_titles.count(doc.title) != 0) gold.push_back(doc.doc_id);
            pool->push_back(std::move(doc));
        }

        if (pool->size() != 10 || empty_body) {
            spdlog::warn("hotpot entry {} ({}): {} contexts{}, skipped", i, id.get<std::string>(),
                         pool->size(), empty_body ? " with an empty body" : "");
            ++result.skipped_context_count;
            continue;
        }
        if (gold.empty()) {
            spdlog::warn("hotpot entry {} ({}): supporting titles match no context, skipped", i,
                         id.get<std::string>());
            ++result.skipped_no_gold;
            continue;
        }

        Example ex;
        ex.example_id = id.get<std::string>();
        ex.question = question.get<std::string>();
        ex.pool = std::move(pool);
        ex.gold_ids = std::move(gold);
        ex.gold_answers = {answer.get<std::string>()};
        ex.task_kind = TaskKind::qa;
        result.examples.push_back(std::move(ex));
    }
    spdlog::info("ingested {} hotpot {} examples ({} skipped without gold, {} with bad contexts)",
                 result.examples.size(), split == HotpotSplit::dev ? "dev" : "train",
                 result.skipped_no_gold, result.skipped_context_count);
    return result;
}

// ---------------------------------------------------------------------------
// Gorilla

namespace {

std::vector<json> read_json_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string(), 0);
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw IngestError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what(),
                              lineno - 1);
        }
        if (!out.back().is_object()) {
            throw IngestError(path.string() + ":" + std::to_string(lineno) + ": not an object", lineno - 1);
        }
    }
    return out;
}

std::string string_field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    return it->is_string() ? it->get<std::string>() : it->dump();
}

}  // namespace

std::string serialize_api_body(const ApiRef& api) {
    std::string body;
    body += "api_name: " + text::flatten_line_breaks(api.api_name);
    body += "; description: " + text::flatten_line_breaks(api.description);
    body += "; api_call: " + text::flatten_line_breaks(api.api_call);
    body += "; api_arguments: " + text::flatten_line_breaks(api.documented_arguments);
    body += "; example_code: " + text::flatten_line_breaks(api.example_code);
    return body;
}

GorillaIngest ingest_gorilla(const std::filesystem::path& api_db, const std::filesystem::path& queries,
                             const std::string& framework) {
    GorillaIngest result;
    auto pool = std::make_shared<ContextPool>();
    std::unordered_map<std::string, std::size_t> by_id;

    const auto records = read_json_lines(api_db);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const json& rec = records[i];
        const auto call_it = rec.find("api_call");
        if (call_it == rec.end() || !call_it->is_string() || text::trim(call_it->get<std::string>()).empty()) {
            throw IngestError("API record " + std::to_string(i) + ": missing api_call", i);
        }
        ApiRef api;
        api.api_name = string_field(rec, "api_name");
        api.api_id = rec.contains("api_id") ? string_field(rec, "api_id") : api.api_name;
        api.api_call = call_it->get<std::string>();
        api.documented_arguments = string_field(rec, "api_arguments");
        api.description = string_field(rec, "description");
        api.example_code = string_field(rec, "example_code");
        api.framework = framework;
        try {
            api.api_arguments = ast::required_arguments(ast::parse_call(api.api_call));
        } catch (const ast::AstParseError& e) {
            throw IngestError("API record " + std::to_string(i) + " (" + api.api_id +
                                  "): api_call does not parse: " + e.what(),
                              i);
        }
        if (api.api_id.empty()) throw IngestError("API record " + std::to_string(i) + ": no identifier", i);
        if (!by_id.emplace(api.api_id, i).second) {
            throw IngestError("API record " + std::to_string(i) + ": duplicate id " + api.api_id, i);
        }

        ContextDoc doc;
        doc.doc_id = static_cast<DocId>(i + 1);
        doc.body = serialize_api_body(api);
        pool->push_back(std::move(doc));
        result.apis.push_back(std::move(api));
    }
    if (pool->empty()) throw IngestError(api_db.string() + ": empty API database", 0);

    const auto query_rows = read_json_lines(queries);
    for (std::size_t i = 0; i < query_rows.size(); ++i) {
        const json& q = query_rows[i];
        const std::string gold_id = string_field(q, "api_id");
        const auto hit = by_id.find(gold_id);
        if (hit == by_id.end()) {
            throw IngestError("query " + std::to_string(i) + ": gold API '" + gold_id + "' not in " +
                                  api_db.string(),
                              i);
        }
        const auto instr = q.find("instruction");
        if (instr == q.end() || !instr->is_string()) {
            throw IngestError("query " + std::to_string(i) + ": missing instruction", i);
        }
        Example ex;
        ex.example_id = q.contains("query_id") ? string_field(q, "query_id")
                                               : framework + "-" + std::to_string(i);
        ex.question = instr->get<std::string>();
        ex.pool = pool;
        ex.gold_ids = {static_cast<DocId>(hit->second + 1)};
        ex.gold_api = result.apis[hit->second];
        ex.task_kind = TaskKind::api;
        result.examples.push_back(std::move(ex));
    }
    spdlog::info("ingested {} {} APIs and {} queries", result.apis.size(), framework, result.examples.size());
    return result;
}

// ---------------------------------------------------------------------------
// Canonical store

namespace {

constexpr const char* kFormatName = "cor-canonical";

json pool_to_json(const ContextPool& pool) {
    json arr = json::array();
    for (const auto& d : pool) {
        arr.push_back({{"doc_id", d.doc_id}, {"title", d.title}, {"body", d.body}});
    }
    return arr;
}

json api_to_json(const ApiRef& api) {
    return {{"api_id", api.api_id},
            {"api_name", api.api_name},
            {"api_call", api.api_call},
            {"api_arguments", api.api_arguments},
            {"documented_arguments", api.documented_arguments},
            {"description", api.description},
            {"framework", api.framework},
            {"example_code", api.example_code}};
}

std::shared_ptr<const ContextPool> pool_from_json(const json& arr) {
    auto pool = std::make_shared<ContextPool>();
    for (const auto& d : arr) {
        ContextDoc doc;
        doc.doc_id = d.at("doc_id").get<DocId>();
        doc.title = d.at("title").get<std::string>();
        doc.body = d.at("body").get<std::string>();
        pool->push_back(std::move(doc));
    }
    return pool;
}

ApiRef api_from_json(const json& j) {
    ApiRef api;
    api.api_id = j.at("api_id").get<std::string>();
    api.api_name = j.at("api_name").get<std::string>();
    api.api_call = j.at("api_call").get<std::string>();
    api.api_arguments = j.at("api_arguments").get<std::map<std::string, std::string>>();
    api.documented_arguments = j.at("documented_arguments").get<std::string>();
    api.description = j.at("description").get<std::string>();
    api.framework = j.at("framework").get<std::string>();
    api.example_code = j.at("example_code").get<std::string>();
    return api;
}

}  // namespace

std::string to_canonical_text(const std::vector<Example>& examples) {
    // Pools referenced by more than one example are written once.
    std::unordered_map<const ContextPool*, std::size_t> uses;
    for (const auto& ex : examples) ++uses[ex.pool.get()];

    std::ostringstream out;
    out << json{{"format", kFormatName}, {"version", kCanonicalVersion}}.dump() << '\n';
    std::unordered_map<const ContextPool*, std::string> pool_names;
    for (const auto& ex : examples) {
        if (!ex.pool) throw InvalidArgument("example " + ex.example_id + " has no pool");
        json row = {{"example_id", ex.example_id},
                    {"question", ex.question},
                    {"task_kind", std::string(to_string(ex.task_kind))},
                    {"gold_ids", ex.gold_ids},
                    {"gold_answers", ex.gold_answers}};
        if (ex.gold_api) row["gold_api"] = api_to_json(*ex.gold_api);
        if (uses[ex.pool.get()] > 1) {
            auto [it, inserted] = pool_names.emplace(ex.pool.get(), "p" + std::to_string(pool_names.size()));
            if (inserted) {
                out << json{{"pool", it->second}, {"contexts", pool_to_json(*ex.pool)}}.dump() << '\n';
            }
            row["pool"] = it->second;
        } else {
            row["contexts"] = pool_to_json(*ex.pool);
        }
        out << row.dump() << '\n';
    }
    return std::move(out).str();
}

std::vector<Example> from_canonical_text(const std::string& text) {
    std::vector<Example> examples;
    std::unordered_map<std::string, std::shared_ptr<const ContextPool>> pools;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError("line " + std::to_string(lineno) + ": invalid JSON: " + e.what(), lineno);
        }
        if (!saw_header) {
            if (!row.is_object() || row.value("format", "") != kFormatName) {
                throw FormatError("line 1: missing cor-canonical header", lineno);
            }
            const int found = row.value("version", -1);
            if (found != kCanonicalVersion) {
                throw FormatError("canonical version mismatch: expected " + std::to_string(kCanonicalVersion) +
                                      ", found " + std::to_string(found),
                                  lineno);
            }
            saw_header = true;
            continue;
        }
        try {
            if (row.contains("pool") && row.contains("contexts")) {
                pools[row.at("pool").get<std::string>()] = pool_from_json(row.at("contexts"));
                continue;
            }
            Example ex;
            ex.example_id = row.at("example_id").get<std::string>();
            ex.question = row.at("question").get<std::string>();
            const auto kind = parse_task_kind(row.at("task_kind").get<std::string>());
            if (!kind) throw FormatError("line " + std::to_string(lineno) + ": unknown task_kind", lineno);
            ex.task_kind = *kind;
            ex.gold_ids = row.at("gold_ids").get<std::vector<DocId>>();
            ex.gold_answers = row.at("gold_answers").get<std::vector<std::string>>();
            if (row.contains("gold_api")) ex.gold_api = api_from_json(row.at("gold_api"));
            if (row.contains("pool")) {
                const auto it = pools.find(row.at("pool").get<std::string>());
                if (it == pools.end()) {
                    throw FormatError("line " + std::to_string(lineno) + ": reference to undefined pool", lineno);
                }
                ex.pool = it->second;
            } else {
                ex.pool = pool_from_json(row.at("contexts"));
            }
            examples.push_back(std::move(ex));
        } catch (const json::exception& e) {
            throw FormatError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    if (!saw_header) throw FormatError("missing cor-canonical header", 1);
    return examples;
}

void save_canonical(const std::vector<Example>& examples, const std::filesystem::path& path) {
    const std::string content = to_canonical_text(examples);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<Example> load_canonical(const std::filesystem::path& path) {
    return from_canonical_text(digest::read_file(path));
}

}  // namespace cor::corpus
