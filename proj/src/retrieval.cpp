#include "rageval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rageval/errors.hpp"
#include "rageval/jsonl.hpp"

namespace rageval {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (c >= 0x80) {
            current.push_back(static_cast<char>(c));
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

void RankedList::check() const {
    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (!seen.insert(entries[i].passage_id).second)
            throw validation_error("duplicate passage in ranked list: " + entries[i].passage_id);
        if (i == 0) continue;
        const auto& prev = entries[i - 1];
        const auto& cur = entries[i];
        bool ordered = prev.score > cur.score ||
                       (prev.score == cur.score && prev.passage_id < cur.passage_id);
        if (!ordered)
            throw validation_error("ranked list out of order at " + cur.passage_id);
    }
}

Bm25Index Bm25Index::build(const Corpus& corpus, Bm25Params params) {
    if (corpus.empty()) throw validation_error("cannot index an empty corpus");
    Bm25Index index;
    index.params_ = params;
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());
    uint64_t total_length = 0;
    for (const auto& passage : corpus.passages()) {
        uint32_t doc = static_cast<uint32_t>(index.doc_ids_.size());
        index.doc_ids_.push_back(passage.id);
        auto terms = tokenize(passage.text);
        index.doc_lengths_.push_back(static_cast<uint32_t>(terms.size()));
        total_length += terms.size();
        std::map<std::string, uint32_t> counts;
        for (auto& t : terms) ++counts[t];
        for (auto& [term, tf] : counts) index.postings_[term].push_back({doc, tf});
    }
    index.avg_doc_length_ =
        static_cast<double>(total_length) / static_cast<double>(corpus.size());
    return index;
}

double Bm25Index::idf(const std::string& term) const {
    auto it = postings_.find(term);
    double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    double n = static_cast<double>(doc_ids_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::term_weight(const Posting& p, double idf_value) const {
    double tf = static_cast<double>(p.tf);
    double norm = params_.k1 * (1.0 - params_.b +
                                params_.b * static_cast<double>(doc_lengths_[p.doc]) /
                                    avg_doc_length_);
    return idf_value * tf * (params_.k1 + 1.0) / (tf + norm);
}

size_t Bm25Index::doc_index(const std::string& passage_id) const {
    auto it = std::find(doc_ids_.begin(), doc_ids_.end(), passage_id);
    if (it == doc_ids_.end()) throw validation_error("unknown passage id \"" + passage_id + "\"");
    return static_cast<size_t>(it - doc_ids_.begin());
}

size_t Bm25Index::doc_length(const std::string& passage_id) const {
    return doc_lengths_[doc_index(passage_id)];
}

double Bm25Index::score(const std::vector<std::string>& query_terms,
                        const std::string& passage_id) const {
    uint32_t doc = static_cast<uint32_t>(doc_index(passage_id));
    double total = 0.0;
    for (const auto& term : query_terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& list = it->second;
        auto pos = std::lower_bound(list.begin(), list.end(), doc,
                                    [](const Posting& p, uint32_t d) { return p.doc < d; });
        if (pos == list.end() || pos->doc != doc) continue;
        total += term_weight(*pos, idf(term));
    }
    return total;
}

RankedList Bm25Index::search(const std::string& question, int k,
                             const std::string& query_id) const {
    if (k < 1) throw validation_error("search requires k >= 1");
    auto query_terms = tokenize(question);
    // Per-document sums accumulate in query-token order (duplicates kept),
    // the same order score() uses, so the two agree bit for bit.
    std::vector<double> scores(doc_ids_.size(), 0.0);
    std::vector<uint32_t> touched;
    for (const auto& term : query_terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        double idf_value = idf(term);
        for (const auto& posting : it->second) {
            if (scores[posting.doc] == 0.0) touched.push_back(posting.doc);
            scores[posting.doc] += term_weight(posting, idf_value);
        }
    }
    std::vector<RankedEntry> entries;
    entries.reserve(touched.size());
    for (uint32_t doc : touched)
        if (scores[doc] > 0.0) entries.push_back({doc_ids_[doc], scores[doc]});
    std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.passage_id < b.passage_id;
    });
    if (entries.size() > static_cast<size_t>(k)) entries.resize(static_cast<size_t>(k));
    RankedList result;
    result.query_id = query_id;
    result.entries = std::move(entries);
    result.producer = "bm25";
    return result;
}

void Bm25Index::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json postings = json::object();
    for (const auto& [term, list] : postings_) {
        json entries = json::array();
        for (const auto& p : list) entries.push_back({p.doc, p.tf});
        postings[term] = std::move(entries);
    }
    json doc = {
        {"format", "bm25-index-v1"},
        {"k1", params_.k1},
        {"b", params_.b},
        {"doc_ids", doc_ids_},
        {"doc_lengths", doc_lengths_},
        {"postings", std::move(postings)},
    };
    write_text_atomic(dir / "bm25_index.json", doc.dump() + "\n");
}

Bm25Index Bm25Index::load(const std::filesystem::path& dir) {
    std::filesystem::path file = dir / "bm25_index.json";
    json doc = json::parse(read_text(file), nullptr, false);
    if (doc.is_discarded() || doc.value("format", "") != "bm25-index-v1")
        throw parse_error("not a bm25 index file: " + file.string());
    Bm25Index index;
    index.params_.k1 = doc.at("k1").get<double>();
    index.params_.b = doc.at("b").get<double>();
    index.doc_ids_ = doc.at("doc_ids").get<std::vector<std::string>>();
    index.doc_lengths_ = doc.at("doc_lengths").get<std::vector<uint32_t>>();
    if (index.doc_ids_.empty()) throw parse_error("empty index: " + file.string());
    uint64_t total = 0;
    for (uint32_t len : index.doc_lengths_) total += len;
    index.avg_doc_length_ = static_cast<double>(total) /
                            static_cast<double>(index.doc_ids_.size());
    for (const auto& [term, entries] : doc.at("postings").items()) {
        auto& list = index.postings_[term];
        for (const auto& e : entries)
            list.push_back({e.at(0).get<uint32_t>(), e.at(1).get<uint32_t>()});
    }
    return index;
}

} // namespace rageval
