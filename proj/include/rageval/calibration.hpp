#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rageval/jsonl.hpp"
#include "rageval/metrics.hpp"

namespace rageval {

struct CalibrationConfig {
    std::vector<int> budgets = {500, 1000, 2000, 3000, 4000, 5000};
    int subsets = 10;
    double epsilon = 0.005;
    uint64_t seed = 0;
    std::vector<int> k_grid = {5, 10, 25, 50, 75, 100};
    // Ordering-strategy pairs compared at every k; delta = mean(a) - mean(b).
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"reverse", "standard"},
        {"reverse", "random"},
        {"standard", "random"},
    };
    bool nested = false; // nested prefixes of one permutation instead of independent draws
};

struct CellStats {
    int k = 0;
    std::string pair; // "reverse-standard"
    std::vector<double> per_subset_deltas;
    double mean_delta = 0.0;
    double std_delta = 0.0; // sample std over subsets, n-1
    double min_delta = 0.0;
    double max_delta = 0.0;
    double reference_delta = 0.0; // full-topic-set delta for this (pair, k)
    bool crossing = false;        // per-subset deltas straddle zero
    bool noticeable = false;      // |reference_delta| >= epsilon
};

struct BudgetReport {
    int budget = 0;
    std::vector<CellStats> cells;
    int crossing_cells = 0;
    int noticeable_crossing_cells = 0;
};

struct CalibrationResult {
    std::vector<BudgetReport> budgets;
    int recommended_budget = 0; // 0 = none within grid
    std::string recommendation_note;

    json to_json() const;
};

// Subset t of size n for draw s: partial Fisher-Yates over the sorted topic
// ids seeded by (seed, "subset", n, s); nested mode permutes once per s and
// takes prefixes so smaller budgets are subsets of larger ones.
std::vector<std::string> subset_topics(const std::vector<std::string>& sorted_topics, int n,
                                       int s, uint64_t seed, bool nested);

CalibrationResult calibrate(const ScoreTable& table, const CalibrationConfig& config);

// Synthetic per-topic score table with a known ordering effect: topic t gets
// a_t = clamp(0.5 + (mu + e_t)/2) for strategy a and the mirrored b_t, with
// e_t ~ Normal(0, sigma) drawn per topic, independently per k from (seed, k).
struct SynthEffectConfig {
    int topics = 5000;
    double mu = 0.01;
    double sigma = 0.15;
    uint64_t seed = 0;
    std::vector<int> k_grid = {5, 10, 25, 50, 75, 100};
    std::string strategy_a = "reverse";
    std::string strategy_b = "standard";
    std::string strategy_c = "random"; // gets the midpoint 0.5 baseline
};

ScoreTable synth_effect_table(const SynthEffectConfig& config);

} // namespace rageval
