#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rageval/corpus.hpp"

namespace rageval {

// Lowercased maximal runs of word characters. ASCII letters are lowercased,
// digits kept, every other ASCII byte splits; non-ASCII bytes are treated as
// word characters and passed through unchanged.
std::vector<std::string> tokenize(std::string_view text);

struct RankedEntry {
    std::string passage_id;
    double score = 0.0;
};

// Entries sorted by score descending, ties by ascending passage_id, no
// duplicate ids. check() enforces the invariants.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;
    std::string producer = "bm25"; // bm25 | rerank | oracle

    void check() const;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Inverted index with BM25 scoring:
//   score(q, d) = sum over query tokens t (in query order, duplicates kept)
//                 of idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
//   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
// idf is strictly positive, so score > 0 iff some query term occurs in the
// passage. Immutable after build; concurrent searches are safe.
class Bm25Index {
public:
    static Bm25Index build(const Corpus& corpus, Bm25Params params = {});

    // Score of the query term multiset against one passage. Unknown
    // passage_id raises validation_error.
    double score(const std::vector<std::string>& query_terms, const std::string& passage_id) const;

    // Top-k by (score desc, passage_id asc); zero-score passages are
    // excluded, so the list may be shorter than k. k < 1 raises
    // validation_error.
    RankedList search(const std::string& question, int k, const std::string& query_id = "") const;

    double idf(const std::string& term) const;

    size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Bm25Params& params() const { return params_; }
    size_t doc_length(const std::string& passage_id) const;

    // Serialization is canonical (terms sorted, fixed float formatting), so
    // rebuilding from the same corpus writes byte-identical files.
    void save(const std::filesystem::path& dir) const;
    static Bm25Index load(const std::filesystem::path& dir);

private:
    struct Posting {
        uint32_t doc = 0;
        uint32_t tf = 0;
    };

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::map<std::string, std::vector<Posting>> postings_; // docs ascending

    size_t doc_index(const std::string& passage_id) const; // throws
    double term_weight(const Posting& p, double idf_value) const;
};

} // namespace rageval
