#include "rageval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rageval/conditions.hpp"
#include "rageval/errors.hpp"
#include "rageval/jsonl.hpp"

namespace rageval {

namespace {

bool ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool ascii_punct(unsigned char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
           (c >= '{' && c <= '~');
}

bool is_article(const std::string& token) {
    return token == "a" || token == "an" || token == "the";
}

void require_golds(const std::vector<std::string>& gold_answers) {
    if (gold_answers.empty()) throw validation_error("empty gold answer list");
}

double f1_against(const std::vector<std::string>& pred_toks,
                  const std::vector<std::string>& gold_toks) {
    if (pred_toks.empty() || gold_toks.empty())
        return pred_toks == gold_toks ? 1.0 : 0.0;
    std::unordered_map<std::string, int> counts;
    for (const auto& t : gold_toks) ++counts[t];
    int overlap = 0;
    for (const auto& t : pred_toks) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(pred_toks.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(gold_toks.size());
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

std::vector<std::string> normalize(std::string_view text) {
    // The extractive-QA convention: lowercase, delete punctuation (so
    // "42-nd" fuses to "42nd"), split, drop articles. Punctuation and case
    // handling are ASCII; non-ASCII bytes pass through inside tokens.
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        if (c < 0x80) {
            if (ascii_punct(c)) continue;
            if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
            cleaned.push_back(static_cast<char>(c));
        } else {
            cleaned.push_back(static_cast<char>(c));
        }
    }
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < cleaned.size()) {
        while (i < cleaned.size() && ascii_space(static_cast<unsigned char>(cleaned[i]))) ++i;
        size_t start = i;
        while (i < cleaned.size() && !ascii_space(static_cast<unsigned char>(cleaned[i]))) ++i;
        if (i > start) {
            std::string token = cleaned.substr(start, i - start);
            if (!is_article(token)) tokens.push_back(std::move(token));
        }
    }
    return tokens;
}

double token_f1(const std::string& prediction, const std::vector<std::string>& gold_answers) {
    require_golds(gold_answers);
    auto pred_toks = normalize(prediction);
    double best = 0.0;
    for (const auto& gold : gold_answers) best = std::max(best, f1_against(pred_toks, normalize(gold)));
    return best;
}

int exact_match(const std::string& prediction, const std::vector<std::string>& gold_answers) {
    require_golds(gold_answers);
    auto pred_toks = normalize(prediction);
    for (const auto& gold : gold_answers)
        if (pred_toks == normalize(gold)) return 1;
    return 0;
}

int substring_accuracy(const std::string& prediction,
                       const std::vector<std::string>& gold_answers) {
    require_golds(gold_answers);
    auto pred_toks = normalize(prediction);
    for (const auto& gold : gold_answers) {
        auto gold_toks = normalize(gold);
        if (gold_toks.empty()) return 1;
        if (gold_toks.size() > pred_toks.size()) continue;
        auto it = std::search(pred_toks.begin(), pred_toks.end(), gold_toks.begin(),
                              gold_toks.end());
        if (it != pred_toks.end()) return 1;
    }
    return 0;
}

ScoreRecord score_answer(const std::string& query_id, const std::string& condition_label,
                         const std::string& prediction,
                         const std::vector<std::string>& gold_answers) {
    ScoreRecord r;
    r.query_id = query_id;
    r.condition_label = condition_label;
    r.f1 = token_f1(prediction, gold_answers);
    r.exact_match = exact_match(prediction, gold_answers);
    r.accuracy = substring_accuracy(prediction, gold_answers);
    return r;
}

namespace {

std::string cell_key(std::string_view query_id, std::string_view condition_label) {
    std::string key;
    key.reserve(query_id.size() + condition_label.size() + 1);
    key.append(query_id);
    key.push_back('\x1e');
    key.append(condition_label);
    return key;
}

} // namespace

void ScoreTable::add(ScoreRecord r) {
    std::string key = cell_key(r.query_id, r.condition_label);
    auto it = index_.find(key);
    if (it != index_.end()) {
        records_[it->second] = std::move(r);
    } else {
        index_.emplace(std::move(key), records_.size());
        records_.push_back(std::move(r));
    }
}

const ScoreRecord* ScoreTable::find(std::string_view query_id,
                                    std::string_view condition_label) const {
    auto it = index_.find(cell_key(query_id, condition_label));
    return it == index_.end() ? nullptr : &records_[it->second];
}

double ScoreTable::f1_at(const std::string& query_id, const std::string& condition_label) const {
    const ScoreRecord* r = find(query_id, condition_label);
    if (!r) throw coverage_error("missing score for (" + query_id + ", " + condition_label + ")");
    return r->f1;
}

std::vector<std::string> ScoreTable::topics() const {
    std::set<std::string> unique;
    for (const auto& r : records_) unique.insert(r.query_id);
    return {unique.begin(), unique.end()};
}

std::vector<std::string> ScoreTable::conditions() const {
    std::set<std::string> unique;
    for (const auto& r : records_) unique.insert(r.condition_label);
    return {unique.begin(), unique.end()};
}

ScoreTable ScoreTable::from_run_dir(const std::filesystem::path& dir) {
    std::filesystem::path records_dir = dir / "records";
    if (!std::filesystem::is_directory(records_dir)) records_dir = dir;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(records_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw validation_error("no record files under " + dir.string());

    ScoreTable table;
    for (const auto& file : files) {
        for_each_jsonl(file, [&](const json& record, size_t line) {
            ScoreRecord r;
            auto fail = [&](const char* what) {
                throw parse_error(file.string() + ":" + std::to_string(line) + ": " + what);
            };
            if (!record.is_object() || !record.contains("query_id")) fail("not a score record");
            r.query_id = record["query_id"].get<std::string>();
            if (record.contains("condition"))
                r.condition_label = record["condition"].get<std::string>();
            else if (record.contains("condition_label"))
                r.condition_label = record["condition_label"].get<std::string>();
            else
                fail("missing condition");
            const json& scores = record.contains("scores") ? record["scores"] : record;
            if (!scores.contains("f1")) fail("missing f1");
            r.f1 = scores["f1"].get<double>();
            r.exact_match = scores.value("exact_match", 0);
            r.accuracy = scores.value("accuracy", 0);
            table.add(std::move(r));
        });
    }
    return table;
}

std::vector<ConditionMean> aggregate(const std::vector<ScoreRecord>& records,
                                     const std::vector<std::string>* expected_labels,
                                     std::vector<std::string>* warnings) {
    std::map<std::string, ConditionMean> by_label;
    for (const auto& r : records) {
        auto& m = by_label[r.condition_label];
        m.condition_label = r.condition_label;
        ++m.count;
        m.f1 += r.f1;
        m.exact_match += r.exact_match;
        m.accuracy += r.accuracy;
    }
    if (expected_labels && warnings) {
        for (const auto& label : *expected_labels)
            if (!by_label.count(label)) warnings->push_back("no records for condition " + label);
    }
    std::vector<ConditionMean> means;
    means.reserve(by_label.size());
    for (auto& [label, m] : by_label) {
        m.f1 /= static_cast<double>(m.count);
        m.exact_match /= static_cast<double>(m.count);
        m.accuracy /= static_cast<double>(m.count);
        means.push_back(std::move(m));
    }
    return means;
}

double mean_f1_over(const ScoreTable& table, const std::vector<std::string>& topics,
                    const std::string& condition_label) {
    if (topics.empty()) throw validation_error("empty topic set for " + condition_label);
    double sum = 0.0;
    std::string missing;
    size_t missing_count = 0;
    for (const auto& topic : topics) {
        const ScoreRecord* r = table.find(topic, condition_label);
        if (!r) {
            ++missing_count;
            if (missing_count <= 5) {
                if (!missing.empty()) missing += ", ";
                missing += topic;
            }
            continue;
        }
        sum += r->f1;
    }
    if (missing_count > 0)
        throw coverage_error("condition " + condition_label + " missing " +
                             std::to_string(missing_count) + " topics (" + missing +
                             (missing_count > 5 ? ", ..." : "") + ")");
    return sum / static_cast<double>(topics.size());
}

DeltaCurve delta_curve(const ScoreTable& table, const std::string& strategy_a,
                       const std::string& strategy_b, const std::vector<int>& k_grid,
                       const std::vector<std::vector<std::string>>* subsets) {
    DeltaCurve curve;
    curve.strategy_a = strategy_a;
    curve.strategy_b = strategy_b;
    std::vector<std::string> all_topics = table.topics();
    for (int k : k_grid) {
        std::string label_a = retrieved_label(k, strategy_a);
        std::string label_b = retrieved_label(k, strategy_b);
        std::vector<double> deltas;
        if (subsets) {
            for (const auto& subset : *subsets)
                deltas.push_back(mean_f1_over(table, subset, label_a) -
                                 mean_f1_over(table, subset, label_b));
        } else {
            deltas.push_back(mean_f1_over(table, all_topics, label_a) -
                             mean_f1_over(table, all_topics, label_b));
        }
        DeltaPoint point;
        point.k = k;
        point.n_subsets = deltas.size();
        point.min_delta = *std::min_element(deltas.begin(), deltas.end());
        point.max_delta = *std::max_element(deltas.begin(), deltas.end());
        double sum = 0.0;
        for (double d : deltas) sum += d;
        point.mean_delta = sum / static_cast<double>(deltas.size());
        if (deltas.size() > 1) {
            double ss = 0.0;
            for (double d : deltas) ss += (d - point.mean_delta) * (d - point.mean_delta);
            point.std_dev = std::sqrt(ss / static_cast<double>(deltas.size() - 1));
        }
        curve.points.push_back(point);
    }
    return curve;
}

} // namespace rageval
