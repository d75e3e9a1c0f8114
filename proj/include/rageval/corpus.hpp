#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace rageval {

// A retrievable unit. `sentences` must be pre-segmented in the input file;
// the harness never splits text itself and sentence-level oracle contexts
// require it.
struct Passage {
    std::string id;
    std::string text;
    std::optional<std::string> title;
    std::optional<std::vector<std::string>> sentences;
};

struct SentenceRef {
    std::string passage_id;
    size_t sentence_index = 0; // 0-based into Passage::sentences
};

struct Query {
    std::string id;
    std::string question;
    std::vector<std::string> gold_answers; // at least one non-empty string
    std::vector<std::string> gold_passage_ids;
    std::vector<SentenceRef> gold_sentence_refs;

    bool has_gold_passages() const { return !gold_passage_ids.empty(); }
    bool has_gold_sentences() const { return !gold_sentence_refs.empty(); }
};

enum class HopType { single_hop, multi_hop };

std::string to_string(HopType t);
HopType hop_type_from_string(const std::string& s);

// Immutable after load; safe to share across threads.
class Corpus {
public:
    // Throws validation_error on duplicate id.
    void add(Passage p);

    const Passage* find(const std::string& id) const;
    const Passage& at(const std::string& id) const; // throws validation_error
    bool contains(const std::string& id) const { return find(id) != nullptr; }

    size_t size() const { return passages_.size(); }
    bool empty() const { return passages_.empty(); }
    const std::vector<Passage>& passages() const { return passages_; }

private:
    std::vector<Passage> passages_;
    std::unordered_map<std::string, size_t> by_id_;
};

struct Dataset {
    std::string name;
    std::vector<Query> queries;
    std::string corpus_ref;
    HopType hop_type = HopType::single_hop; // descriptive metadata only

    const Query* find(const std::string& id) const;
};

struct ValidationIssue {
    std::string query_id; // empty for corpus-level issues
    std::string detail;
};

struct ValidationReport {
    size_t query_count = 0;
    size_t with_gold_passages = 0;
    size_t with_gold_sentences = 0;
    std::vector<ValidationIssue> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }
    nlohmann::json to_json() const;
};

// One JSON object per line: {"id", "text", "title"?, "sentences"?}.
// Malformed lines raise parse_error naming the line number; duplicate ids
// raise validation_error naming the id. An empty file yields an empty corpus
// and a warning.
Corpus load_corpus(const std::filesystem::path& path,
                   std::vector<std::string>* warnings = nullptr);

// One JSON object per line:
// {"id", "question", "gold_answers", "gold_passage_ids"?, "gold_sentence_refs"?}.
// With strict=true every gold reference must resolve against the corpus;
// unresolved references raise validation_error naming the query and target.
// With strict=false they are left for validate() to report.
Dataset load_dataset(const std::filesystem::path& path, const Corpus& corpus,
                     bool strict = true);

// Report-only: never throws. Checks reference resolution, sentence index
// bounds, sentence coverage of passages and duplicate query ids.
ValidationReport validate(const Dataset& dataset, const Corpus& corpus);

} // namespace rageval
