#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rageval {

// Answer-string metrics. All three share one normalizer, the standard
// extractive-QA convention: ASCII lowercase, strip ASCII punctuation,
// drop the articles a/an/the, split on whitespace. Multi-answer handling
// is max-over-golds everywhere.

std::vector<std::string> normalize(std::string_view text);

// Token-level F1 against the best-matching gold. Both-empty normalizations
// score 1; an empty side against a non-empty one scores 0.
double token_f1(const std::string& prediction, const std::vector<std::string>& gold_answers);

// 1 iff the normalized prediction equals any normalized gold.
int exact_match(const std::string& prediction, const std::vector<std::string>& gold_answers);

// 1 iff any normalized gold appears as a contiguous token subsequence of the
// normalized prediction (token-level containment, not character-level).
int substring_accuracy(const std::string& prediction, const std::vector<std::string>& gold_answers);

struct ScoreRecord {
    std::string query_id;
    std::string condition_label;
    double f1 = 0.0;
    int exact_match = 0;
    int accuracy = 0;
};

ScoreRecord score_answer(const std::string& query_id, const std::string& condition_label,
                         const std::string& prediction, const std::vector<std::string>& gold_answers);

// Lookup table over scored records, keyed (query_id, condition_label).
// Adding an existing key replaces the record.
class ScoreTable {
public:
    void add(ScoreRecord r);

    const ScoreRecord* find(std::string_view query_id, std::string_view condition_label) const;
    // Throws coverage_error when the cell is missing.
    double f1_at(const std::string& query_id, const std::string& condition_label) const;

    const std::vector<ScoreRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }

    // Sorted unique query ids / condition labels.
    std::vector<std::string> topics() const;
    std::vector<std::string> conditions() const;

    // Reads every records/*.jsonl (or *.jsonl directly under `dir`).
    static ScoreTable from_run_dir(const std::filesystem::path& dir);

private:
    std::vector<ScoreRecord> records_;
    std::unordered_map<std::string, size_t> index_;
};

struct ConditionMean {
    std::string condition_label;
    size_t count = 0;
    double f1 = 0.0;
    double exact_match = 0.0;
    double accuracy = 0.0;
};

// Arithmetic means per condition, conditions sorted. When expected_labels is
// given, labels with no records are excluded and reported in `warnings`.
std::vector<ConditionMean> aggregate(const std::vector<ScoreRecord>& records,
                                     const std::vector<std::string>* expected_labels = nullptr,
                                     std::vector<std::string>* warnings = nullptr);

struct DeltaPoint {
    int k = 0;
    double mean_delta = 0.0;
    double std_dev = 0.0; // sample std, n-1 denominator; 0 when n_subsets < 2
    double min_delta = 0.0;
    double max_delta = 0.0;
    size_t n_subsets = 1;
};

struct DeltaCurve {
    std::string strategy_a;
    std::string strategy_b;
    std::vector<DeltaPoint> points; // one per k, ascending
};

// Delta of mean F1 between two ordering strategies at each k, over condition
// labels "retrieved:k=<k>:<strategy>". Without subsets: one delta over all
// topics per k. With subsets: per-subset deltas summarized as
// mean/std/min/max. Missing (query, k) coverage for either strategy raises
// coverage_error listing the gaps.
DeltaCurve delta_curve(const ScoreTable& table, const std::string& strategy_a,
                       const std::string& strategy_b, const std::vector<int>& k_grid,
                       const std::vector<std::vector<std::string>>* subsets = nullptr);

// Mean F1 for one strategy at one k over the given topics (throws
// coverage_error on gaps). Shared by delta_curve and the calibrator.
double mean_f1_over(const ScoreTable& table, const std::vector<std::string>& topics,
                    const std::string& condition_label);

} // namespace rageval
