#pragma once

#include "cor/corpus.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Okapi BM25 over one example pool, plus the guarantee that a selected
// context set always carries a gold document.
namespace cor::retrieval {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Lowercase, split on every non-alphanumeric ASCII character, drop empties.
[[nodiscard]] std::vector<std::string> tokenize(std::string_view text);

struct Posting {
    std::size_t ordinal = 0;
    int tf = 0;
};

class Bm25Index {
public:
    // Indexes tokenize(title + " " + body) of each doc. Throws InvalidArgument
    // on an empty doc list or negative parameters.
    Bm25Index(const std::vector<corpus::ContextDoc>& docs, Bm25Params params = {});

    [[nodiscard]] std::size_t doc_count() const noexcept { return doc_lengths_.size(); }
    [[nodiscard]] double avg_doc_len() const noexcept { return avg_doc_len_; }
    [[nodiscard]] const std::vector<int>& doc_lengths() const noexcept { return doc_lengths_; }
    [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }
    [[nodiscard]] DocId doc_id(std::size_t ordinal) const { return doc_ids_.at(ordinal); }
    // Empty list for unknown terms.
    [[nodiscard]] const std::vector<Posting>& postings(const std::string& term) const;

    // idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
    [[nodiscard]] double idf(const std::string& term) const;

    // Sum over query terms (duplicates included) of
    // idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len)).
    [[nodiscard]] double score(const std::vector<std::string>& query_terms, std::size_t ordinal) const;

    // Scores of all docs by ordinal, accumulated term-at-a-time over postings.
    [[nodiscard]] std::vector<double> score_all(const std::vector<std::string>& query_terms) const;

private:
    [[nodiscard]] double term_weight(double idf, int tf, std::size_t ordinal) const;

    Bm25Params params_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::vector<int> doc_lengths_;
    std::vector<DocId> doc_ids_;
    double avg_doc_len_ = 0.0;
};

[[nodiscard]] inline Bm25Index build_index(const std::vector<corpus::ContextDoc>& docs, Bm25Params params = {}) {
    return Bm25Index(docs, params);
}

struct ScoredDoc {
    DocId doc_id = 0;
    double score = 0.0;
    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

struct RetrievalResult {
    std::vector<ScoredDoc> ranked;     // top-k, score desc then ordinal asc
    std::vector<ScoredDoc> remainder;  // rest of the pool in the same order
    std::size_t k_requested = 0;
    bool gold_injected = false;
};

// Throws InvalidArgument for k == 0.
[[nodiscard]] RetrievalResult retrieve(const Bm25Index& index, std::string_view question, std::size_t k);

struct ContextSelection {
    std::vector<corpus::ContextDoc> docs;  // is_gold filled in
    std::vector<double> scores;
    bool gold_injected = false;
};

// If no gold doc is in the top-k, the last (lowest-scoring) slot is replaced by
// the best-ranked gold doc from the remainder. Output size is min(k, pool).
// Throws InvalidArgument when the example has no gold doc in the result at all.
[[nodiscard]] ContextSelection ensure_gold(const RetrievalResult& result, const corpus::Example& example,
                                           std::size_t k);

}  // namespace cor::retrieval
