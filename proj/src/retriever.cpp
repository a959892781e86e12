#include "cor/retriever.hpp"

#include "cor/error.hpp"
#include "cor/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cor::retrieval {

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> terms;
    std::string current;
    for (const char c : input) {
        if (text::is_alnum(c)) {
            current.push_back(text::to_lower(c));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

Bm25Index::Bm25Index(const std::vector<corpus::ContextDoc>& docs, Bm25Params params) : params_(params) {
    if (docs.empty()) throw InvalidArgument("cannot build a BM25 index over zero documents");
    if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0) {
        throw InvalidArgument("BM25 parameters out of range (k1 >= 0, 0 <= b <= 1)");
    }
    doc_lengths_.reserve(docs.size());
    doc_ids_.reserve(docs.size());
    std::unordered_map<std::string, int> tf;
    for (std::size_t ordinal = 0; ordinal < docs.size(); ++ordinal) {
        const auto terms = tokenize(docs[ordinal].title + " " + docs[ordinal].body);
        tf.clear();
        for (const auto& t : terms) ++tf[t];
        // Sorted insertion keeps the posting lists (and hence the index) independent
        // of hash-map iteration order.
        std::vector<std::pair<std::string, int>> sorted(tf.begin(), tf.end());
        std::sort(sorted.begin(), sorted.end());
        for (auto& [term, count] : sorted) postings_[term].push_back(Posting{ordinal, count});
        doc_lengths_.push_back(static_cast<int>(terms.size()));
        doc_ids_.push_back(docs[ordinal].doc_id);
    }
    const double total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), 0.0);
    avg_doc_len_ = total / static_cast<double>(doc_lengths_.size());
}

const std::vector<Posting>& Bm25Index::postings(const std::string& term) const {
    static const std::vector<Posting> kEmpty;
    const auto it = postings_.find(term);
    return it == postings_.end() ? kEmpty : it->second;
}

double Bm25Index::idf(const std::string& term) const {
    const double n = static_cast<double>(doc_count());
    const double df = static_cast<double>(postings(term).size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::term_weight(double idf, int tf, std::size_t ordinal) const {
    const double len_ratio =
        avg_doc_len_ > 0.0 ? static_cast<double>(doc_lengths_[ordinal]) / avg_doc_len_ : 1.0;
    const double f = static_cast<double>(tf);
    return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * (1.0 - params_.b + params_.b * len_ratio));
}

double Bm25Index::score(const std::vector<std::string>& query_terms, std::size_t ordinal) const {
    if (ordinal >= doc_count()) throw InvalidArgument("document ordinal out of range");
    double total = 0.0;
    for (const auto& term : query_terms) {
        const auto& plist = postings(term);
        const auto it = std::lower_bound(plist.begin(), plist.end(), ordinal,
                                         [](const Posting& p, std::size_t o) { return p.ordinal < o; });
        if (it == plist.end() || it->ordinal != ordinal) continue;
        total += term_weight(idf(term), it->tf, ordinal);
    }
    return total;
}

std::vector<double> Bm25Index::score_all(const std::vector<std::string>& query_terms) const {
    std::vector<double> scores(doc_count(), 0.0);
    for (const auto& term : query_terms) {
        const auto& plist = postings(term);
        if (plist.empty()) continue;
        const double w = idf(term);
        for (const auto& p : plist) scores[p.ordinal] += term_weight(w, p.tf, p.ordinal);
    }
    return scores;
}

RetrievalResult retrieve(const Bm25Index& index, std::string_view question, std::size_t k) {
    if (k == 0) throw InvalidArgument("retrieve: k must be at least 1");
    const auto scores = index.score_all(tokenize(question));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RetrievalResult result;
    result.k_requested = k;
    const std::size_t top = std::min(k, order.size());
    result.ranked.reserve(top);
    result.remainder.reserve(order.size() - top);
    for (std::size_t i = 0; i < order.size(); ++i) {
        ScoredDoc sd{index.doc_id(order[i]), scores[order[i]]};
        (i < top ? result.ranked : result.remainder).push_back(sd);
    }
    return result;
}

ContextSelection ensure_gold(const RetrievalResult& result, const corpus::Example& example, std::size_t k) {
    if (example.gold_ids.empty()) throw InvalidArgument("ensure_gold: example has no gold ids");
    const std::size_t size = std::min(k, example.pool_size());
    if (size == 0) throw InvalidArgument("ensure_gold: k must be at least 1");

    std::vector<ScoredDoc> chosen(result.ranked.begin(),
                                  result.ranked.begin() + static_cast<std::ptrdiff_t>(
                                                              std::min(size, result.ranked.size())));
    // A short ranking (k_requested < k) is topped up from the remainder.
    std::size_t next = 0;
    while (chosen.size() < size && next < result.remainder.size()) chosen.push_back(result.remainder[next++]);

    ContextSelection selection;
    const bool has_gold = std::any_of(chosen.begin(), chosen.end(),
                                      [&](const ScoredDoc& d) { return example.is_gold(d.doc_id); });
    if (!has_gold) {
        const auto gold_it =
            std::find_if(result.remainder.begin() + static_cast<std::ptrdiff_t>(next), result.remainder.end(),
                         [&](const ScoredDoc& d) { return example.is_gold(d.doc_id); });
        if (gold_it == result.remainder.end() || chosen.empty()) {
            throw InvalidArgument("ensure_gold: no gold document of example " + example.example_id +
                                  " in the retrieval result");
        }
        chosen.back() = *gold_it;
        selection.gold_injected = true;
    }
    for (const auto& d : chosen) {
        selection.docs.push_back(example.context(d.doc_id));
        selection.scores.push_back(d.score);
    }
    return selection;
}

}  // namespace cor::retrieval
