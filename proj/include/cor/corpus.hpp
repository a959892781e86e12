#pragma once

#include "cor/types.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cor::corpus {

struct ContextDoc {
    DocId doc_id = 0;
    std::string title;
    std::string body;
    // Relative to one query. Pool storage leaves this false; Example::contexts()
    // and the retriever's selections fill it in.
    bool is_gold = false;

    friend bool operator==(const ContextDoc&, const ContextDoc&) = default;
};

using ContextPool = std::vector<ContextDoc>;

// One API documentation record of a Gorilla-style database.
struct ApiRef {
    std::string api_id;
    std::string api_name;
    std::string api_call;
    // Arguments a generated call must reproduce, derived from api_call:
    // keyword arguments by name, positional ones as "#<index>". Values are
    // normalized value text (see ast::normalized_text).
    std::map<std::string, std::string> api_arguments;
    // The record's own documented argument field, verbatim JSON.
    std::string documented_arguments;
    std::string description;
    std::string framework;
    std::string example_code;

    friend bool operator==(const ApiRef&, const ApiRef&) = default;
};

struct Example {
    std::string example_id;
    std::string question;
    // Candidate pool, doc_ids 1..N in order. Shared between examples when the
    // pool is a whole API database.
    std::shared_ptr<const ContextPool> pool;
    std::vector<DocId> gold_ids;  // sorted, unique
    std::vector<std::string> gold_answers;
    std::optional<ApiRef> gold_api;
    TaskKind task_kind = TaskKind::qa;

    [[nodiscard]] std::size_t pool_size() const noexcept { return pool ? pool->size() : 0; }
    [[nodiscard]] bool is_gold(DocId id) const noexcept;
    // Throws InvalidArgument for ids outside 1..pool_size().
    [[nodiscard]] const ContextDoc& doc(DocId id) const;
    // Copy of `doc(id)` with is_gold set for this example.
    [[nodiscard]] ContextDoc context(DocId id) const;
    // Whole pool with gold flags.
    [[nodiscard]] std::vector<ContextDoc> contexts() const;
    // The answer string a perfect system would emit (gold answer or api_call).
    [[nodiscard]] const std::string& reference_answer() const;

    // Throws InvalidArgument describing the first broken invariant.
    void check_invariants() const;

    friend bool operator==(const Example& a, const Example& b);
};

enum class HotpotSplit { train, dev };

struct HotpotIngest {
    std::vector<Example> examples;
    std::size_t skipped_no_gold = 0;
    std::size_t skipped_context_count = 0;
};

// Upstream distractor-format JSON. Throws IngestError for malformed entries.
[[nodiscard]] HotpotIngest ingest_hotpot(const std::filesystem::path& path, HotpotSplit split);

struct GorillaIngest {
    std::vector<ApiRef> apis;
    std::vector<Example> examples;
};

// api_db: one JSON API record per line, identified by "api_id" (falls back to
// "api_name"). queries: one {"query_id"?, "instruction", "api_id"} per line.
// Every example shares one pool built from the whole database.
[[nodiscard]] GorillaIngest ingest_gorilla(const std::filesystem::path& api_db,
                                           const std::filesystem::path& queries,
                                           const std::string& framework);

// Deterministic single-line document body for an API record.
[[nodiscard]] std::string serialize_api_body(const ApiRef& api);

// Canonical store: line-delimited JSON with a version header.
inline constexpr int kCanonicalVersion = 1;

void save_canonical(const std::vector<Example>& examples, const std::filesystem::path& path);
[[nodiscard]] std::vector<Example> load_canonical(const std::filesystem::path& path);

// Stream forms of the same format.
[[nodiscard]] std::string to_canonical_text(const std::vector<Example>& examples);
[[nodiscard]] std::vector<Example> from_canonical_text(const std::string& text);

}  // namespace cor::corpus
