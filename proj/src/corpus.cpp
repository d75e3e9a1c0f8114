#include "rageval/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "rageval/errors.hpp"
#include "rageval/jsonl.hpp"
#include "rageval/retrieval.hpp"

namespace rageval {

namespace {

std::string location(const std::filesystem::path& path, size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::string require_string(const json& record, const char* key, const std::string& where) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string())
        throw parse_error(where + ": missing or non-string field \"" + key + "\"");
    return it->get<std::string>();
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

std::string to_string(HopType t) {
    return t == HopType::multi_hop ? "multi_hop" : "single_hop";
}

HopType hop_type_from_string(const std::string& s) {
    if (s == "single_hop") return HopType::single_hop;
    if (s == "multi_hop") return HopType::multi_hop;
    throw validation_error("unknown hop_type \"" + s + "\"");
}

void Corpus::add(Passage p) {
    auto [it, inserted] = by_id_.emplace(p.id, passages_.size());
    if (!inserted) throw validation_error("duplicate passage id \"" + p.id + "\"");
    passages_.push_back(std::move(p));
}

const Passage* Corpus::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &passages_[it->second];
}

const Passage& Corpus::at(const std::string& id) const {
    const Passage* p = find(id);
    if (!p) throw validation_error("unknown passage id \"" + id + "\"");
    return *p;
}

const Query* Dataset::find(const std::string& id) const {
    for (const auto& q : queries)
        if (q.id == id) return &q;
    return nullptr;
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json violations_json = nlohmann::json::array();
    for (const auto& v : violations)
        violations_json.push_back({{"query_id", v.query_id}, {"detail", v.detail}});
    return {
        {"queries", query_count},
        {"with_gold_passages", with_gold_passages},
        {"with_gold_sentences", with_gold_sentences},
        {"violations", violations_json},
        {"warnings", warnings},
        {"ok", ok()},
    };
}

Corpus load_corpus(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    Corpus corpus;
    for_each_jsonl(path, [&](const json& record, size_t line) {
        const std::string where = location(path, line);
        if (!record.is_object()) throw parse_error(where + ": record is not a JSON object");
        Passage p;
        p.id = require_string(record, "id", where);
        if (p.id.empty()) throw parse_error(where + ": empty passage id");
        p.text = require_string(record, "text", where);
        if (blank(p.text)) throw parse_error(where + ": blank passage text");
        if (auto it = record.find("title"); it != record.end() && !it->is_null()) {
            if (!it->is_string()) throw parse_error(where + ": non-string title");
            p.title = it->get<std::string>();
        }
        if (auto it = record.find("sentences"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) throw parse_error(where + ": sentences is not an array");
            std::vector<std::string> sentences;
            for (const auto& s : *it) {
                if (!s.is_string()) throw parse_error(where + ": non-string sentence");
                sentences.push_back(s.get<std::string>());
            }
            p.sentences = std::move(sentences);
        }
        corpus.add(std::move(p));
    });
    if (corpus.empty() && warnings) warnings->push_back("empty corpus: " + path.string());
    return corpus;
}

namespace {

SentenceRef parse_sentence_ref(const json& value, const std::string& where) {
    SentenceRef ref;
    if (value.is_array() && value.size() == 2 && value[0].is_string() &&
        value[1].is_number_integer()) {
        ref.passage_id = value[0].get<std::string>();
        auto idx = value[1].get<int64_t>();
        if (idx < 0) throw parse_error(where + ": negative sentence index");
        ref.sentence_index = static_cast<size_t>(idx);
        return ref;
    }
    if (value.is_object()) {
        ref.passage_id = require_string(value, "passage_id", where);
        auto it = value.find("sentence_index");
        if (it == value.end() || !it->is_number_integer())
            throw parse_error(where + ": missing or non-integer sentence_index");
        auto idx = it->get<int64_t>();
        if (idx < 0) throw parse_error(where + ": negative sentence index");
        ref.sentence_index = static_cast<size_t>(idx);
        return ref;
    }
    throw parse_error(where + ": gold_sentence_refs entries must be [passage_id, index] pairs");
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path, const Corpus& corpus, bool strict) {
    Dataset dataset;
    dataset.name = path.stem().string();
    std::unordered_set<std::string> seen_ids;
    for_each_jsonl(path, [&](const json& record, size_t line) {
        const std::string where = location(path, line);
        if (!record.is_object()) throw parse_error(where + ": record is not a JSON object");
        // A question-less record carries dataset metadata.
        if (!record.contains("question")) {
            if (auto it = record.find("name"); it != record.end() && it->is_string())
                dataset.name = it->get<std::string>();
            if (auto it = record.find("corpus_ref"); it != record.end() && it->is_string())
                dataset.corpus_ref = it->get<std::string>();
            if (auto it = record.find("hop_type"); it != record.end() && it->is_string())
                dataset.hop_type = hop_type_from_string(it->get<std::string>());
            return;
        }
        Query q;
        q.id = require_string(record, "id", where);
        if (q.id.empty()) throw parse_error(where + ": empty query id");
        if (!seen_ids.insert(q.id).second)
            throw validation_error(where + ": duplicate query id \"" + q.id + "\"");
        q.question = require_string(record, "question", where);
        auto answers = record.find("gold_answers");
        if (answers == record.end() || !answers->is_array())
            throw parse_error(where + ": missing or non-array gold_answers");
        for (const auto& a : *answers) {
            if (!a.is_string()) throw parse_error(where + ": non-string gold answer");
            q.gold_answers.push_back(a.get<std::string>());
        }
        bool any_answer = std::any_of(q.gold_answers.begin(), q.gold_answers.end(),
                                      [](const std::string& a) { return !a.empty(); });
        if (strict && !any_answer)
            throw validation_error("query \"" + q.id + "\" has no non-empty gold answer");
        if (auto it = record.find("gold_passage_ids"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) throw parse_error(where + ": non-array gold_passage_ids");
            for (const auto& pid : *it) {
                if (!pid.is_string()) throw parse_error(where + ": non-string gold passage id");
                q.gold_passage_ids.push_back(pid.get<std::string>());
            }
        }
        if (auto it = record.find("gold_sentence_refs"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) throw parse_error(where + ": non-array gold_sentence_refs");
            for (const auto& ref : *it) q.gold_sentence_refs.push_back(parse_sentence_ref(ref, where));
        }
        if (strict) {
            for (const auto& pid : q.gold_passage_ids)
                if (!corpus.contains(pid))
                    throw validation_error("query \"" + q.id + "\": unresolved gold passage \"" +
                                           pid + "\"");
            for (const auto& ref : q.gold_sentence_refs) {
                const Passage* p = corpus.find(ref.passage_id);
                if (!p)
                    throw validation_error("query \"" + q.id + "\": unresolved gold passage \"" +
                                           ref.passage_id + "\"");
                if (!p->sentences || ref.sentence_index >= p->sentences->size())
                    throw validation_error("query \"" + q.id + "\": sentence " +
                                           std::to_string(ref.sentence_index) +
                                           " out of range in passage \"" + ref.passage_id + "\"");
            }
        }
        dataset.queries.push_back(std::move(q));
    });
    return dataset;
}

ValidationReport validate(const Dataset& dataset, const Corpus& corpus) {
    ValidationReport report;
    report.query_count = dataset.queries.size();
    if (dataset.queries.empty()) report.warnings.push_back("dataset has no queries");
    if (corpus.empty()) report.warnings.push_back("corpus is empty");

    std::unordered_set<std::string> seen_ids;
    for (const auto& q : dataset.queries) {
        if (!seen_ids.insert(q.id).second)
            report.violations.push_back({q.id, "duplicate query id"});
        if (q.has_gold_passages()) ++report.with_gold_passages;
        if (q.has_gold_sentences()) ++report.with_gold_sentences;
        bool any_answer = std::any_of(q.gold_answers.begin(), q.gold_answers.end(),
                                      [](const std::string& a) { return !a.empty(); });
        if (!any_answer) report.violations.push_back({q.id, "no non-empty gold answer"});
        for (const auto& pid : q.gold_passage_ids)
            if (!corpus.contains(pid))
                report.violations.push_back({q.id, "unresolved gold passage \"" + pid + "\""});
        for (const auto& ref : q.gold_sentence_refs) {
            const Passage* p = corpus.find(ref.passage_id);
            if (!p) {
                report.violations.push_back(
                    {q.id, "unresolved gold passage \"" + ref.passage_id + "\""});
            } else if (!p->sentences) {
                report.violations.push_back(
                    {q.id, "passage \"" + ref.passage_id + "\" has no sentences"});
            } else if (ref.sentence_index >= p->sentences->size()) {
                report.violations.push_back(
                    {q.id, "sentence " + std::to_string(ref.sentence_index) +
                               " out of range in passage \"" + ref.passage_id + "\""});
            }
        }
    }

    // Sentence segmentations should cover the passage text; a shortfall in
    // token count means material was dropped during segmentation.
    for (const auto& p : corpus.passages()) {
        if (!p.sentences) continue;
        std::string joined;
        for (const auto& s : *p.sentences) {
            if (!joined.empty()) joined += ' ';
            joined += s;
        }
        if (tokenize(joined).size() < tokenize(p.text).size())
            report.warnings.push_back("passage \"" + p.id + "\": sentences do not cover text");
    }
    return report;
}

} // namespace rageval
