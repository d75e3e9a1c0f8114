#include "rageval/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "rageval/conditions.hpp"
#include "rageval/errors.hpp"
#include "rageval/hash.hpp"

namespace rageval {

std::vector<std::string> subset_topics(const std::vector<std::string>& sorted_topics, int n,
                                       int s, uint64_t seed, bool nested) {
    if (n < 1) throw validation_error("budget must be >= 1");
    if (static_cast<size_t>(n) > sorted_topics.size())
        throw validation_error("budget " + std::to_string(n) + " exceeds population of " +
                               std::to_string(sorted_topics.size()));
    std::vector<std::string> ids = sorted_topics;
    if (nested) {
        // One permutation per draw index; prefixes nest across budgets.
        deterministic_shuffle(ids, stable_hash(seed, "nested", s));
    } else {
        // Partial front-loading Fisher-Yates: only the first n slots matter.
        splitmix64 rng(stable_hash(seed, "subset", n, s));
        for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
            size_t j = i + static_cast<size_t>(rng.next_below(ids.size() - i));
            std::swap(ids[i], ids[j]);
        }
    }
    ids.resize(static_cast<size_t>(n));
    return ids;
}

namespace {

void check_config(const CalibrationConfig& config) {
    if (config.budgets.empty()) throw config_error("empty budget grid");
    for (size_t i = 1; i < config.budgets.size(); ++i)
        if (config.budgets[i] <= config.budgets[i - 1])
            throw config_error("budgets must be strictly ascending");
    if (config.subsets < 2) throw config_error("subsets must be >= 2");
    if (config.epsilon < 0) throw config_error("epsilon must be >= 0");
    if (config.k_grid.empty()) throw config_error("empty k grid");
    if (config.pairs.empty()) throw config_error("no strategy pairs");
}

// Dense per-label F1 columns aligned to the sorted topic list; summing these
// in subset order reproduces mean_f1_over bit for bit.
struct F1Columns {
    std::vector<std::string> topics; // sorted
    std::unordered_map<std::string, std::vector<double>> by_label;

    double mean(const std::string& label, const std::vector<size_t>& subset) const {
        const auto& column = by_label.at(label);
        double sum = 0.0;
        for (size_t idx : subset) sum += column[idx];
        return sum / static_cast<double>(subset.size());
    }
};

F1Columns build_columns(const ScoreTable& table, const CalibrationConfig& config) {
    F1Columns columns;
    columns.topics = table.topics();
    if (columns.topics.empty()) throw validation_error("empty score table");

    std::set<std::string> strategies;
    for (const auto& [a, b] : config.pairs) {
        strategies.insert(a);
        strategies.insert(b);
    }
    std::vector<std::string> missing;
    for (int k : config.k_grid) {
        for (const auto& strategy : strategies) {
            std::string label = retrieved_label(k, strategy);
            auto& column = columns.by_label[label];
            column.reserve(columns.topics.size());
            for (const auto& topic : columns.topics) {
                const ScoreRecord* r = table.find(topic, label);
                if (!r) {
                    if (missing.size() < 5) missing.push_back("(" + topic + ", " + label + ")");
                    column.push_back(0.0);
                    continue;
                }
                column.push_back(r->f1);
            }
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) {
            if (!list.empty()) list += ", ";
            list += m;
        }
        throw coverage_error("calibration input missing cells: " + list);
    }
    return columns;
}

} // namespace

CalibrationResult calibrate(const ScoreTable& table, const CalibrationConfig& config) {
    check_config(config);
    F1Columns columns = build_columns(table, config);
    size_t population = columns.topics.size();

    std::vector<size_t> all_indices(population);
    for (size_t i = 0; i < population; ++i) all_indices[i] = i;
    std::unordered_map<std::string, size_t> topic_index;
    for (size_t i = 0; i < population; ++i) topic_index.emplace(columns.topics[i], i);

    // Full-topic-set reference deltas drive the noticeable flag.
    std::map<std::pair<std::string, int>, double> reference;
    for (const auto& [a, b] : config.pairs) {
        for (int k : config.k_grid) {
            double delta = columns.mean(retrieved_label(k, a), all_indices) -
                           columns.mean(retrieved_label(k, b), all_indices);
            reference[{a + "-" + b, k}] = delta;
        }
    }

    CalibrationResult result;
    for (int budget : config.budgets) {
        BudgetReport report;
        report.budget = budget;

        std::vector<std::vector<size_t>> subsets;
        for (int s = 0; s < config.subsets; ++s) {
            auto ids = subset_topics(columns.topics, budget, s, config.seed, config.nested);
            std::vector<size_t> indices;
            indices.reserve(ids.size());
            for (const auto& id : ids) indices.push_back(topic_index.at(id));
            subsets.push_back(std::move(indices));
        }

        for (const auto& [a, b] : config.pairs) {
            for (int k : config.k_grid) {
                CellStats cell;
                cell.k = k;
                cell.pair = a + "-" + b;
                std::string label_a = retrieved_label(k, a);
                std::string label_b = retrieved_label(k, b);
                for (const auto& subset : subsets)
                    cell.per_subset_deltas.push_back(columns.mean(label_a, subset) -
                                                     columns.mean(label_b, subset));

                const auto& deltas = cell.per_subset_deltas;
                cell.min_delta = *std::min_element(deltas.begin(), deltas.end());
                cell.max_delta = *std::max_element(deltas.begin(), deltas.end());
                double sum = 0.0;
                for (double d : deltas) sum += d;
                cell.mean_delta = sum / static_cast<double>(deltas.size());
                double ss = 0.0;
                for (double d : deltas)
                    ss += (d - cell.mean_delta) * (d - cell.mean_delta);
                cell.std_delta = std::sqrt(ss / static_cast<double>(deltas.size() - 1));
                cell.reference_delta = reference.at({cell.pair, k});
                cell.crossing = cell.min_delta < 0.0 && cell.max_delta > 0.0;
                cell.noticeable = std::abs(cell.reference_delta) >= config.epsilon;
                if (cell.crossing) ++report.crossing_cells;
                if (cell.crossing && cell.noticeable) ++report.noticeable_crossing_cells;
                report.cells.push_back(std::move(cell));
            }
        }
        result.budgets.push_back(std::move(report));
    }

    for (const auto& report : result.budgets) {
        if (report.noticeable_crossing_cells == 0) {
            result.recommended_budget = report.budget;
            result.recommendation_note = "n=" + std::to_string(report.budget);
            break;
        }
    }
    if (result.recommended_budget == 0) result.recommendation_note = "none within grid";
    return result;
}

json CalibrationResult::to_json() const {
    json budgets_json = json::array();
    for (const auto& report : budgets) {
        json cells = json::array();
        for (const auto& cell : report.cells) {
            cells.push_back({
                {"pair", cell.pair},
                {"k", cell.k},
                {"per_subset_deltas", cell.per_subset_deltas},
                {"mean", cell.mean_delta},
                {"std", cell.std_delta},
                {"min", cell.min_delta},
                {"max", cell.max_delta},
                {"reference", cell.reference_delta},
                {"crossing", cell.crossing},
                {"noticeable", cell.noticeable},
            });
        }
        budgets_json.push_back({
            {"n", report.budget},
            {"cells", std::move(cells)},
            {"crossing_cells", report.crossing_cells},
            {"noticeable_crossing_cells", report.noticeable_crossing_cells},
        });
    }
    json recommended = recommended_budget > 0 ? json(recommended_budget) : json();
    return {
        {"budgets", std::move(budgets_json)},
        {"recommended_budget", std::move(recommended)},
        {"recommendation", recommendation_note},
    };
}

ScoreTable synth_effect_table(const SynthEffectConfig& config) {
    if (config.sigma < 0) throw config_error("sigma must be >= 0");
    if (config.topics < 1) throw config_error("topics must be >= 1");
    ScoreTable table;
    char id_buf[16];
    for (int k : config.k_grid) {
        splitmix64 rng(stable_hash(config.seed, "k", k));
        for (int t = 0; t < config.topics; ++t) {
            double effect = config.mu + config.sigma * rng.next_normal();
            double a = std::clamp(0.5 + effect / 2.0, 0.0, 1.0);
            double b = std::clamp(0.5 - effect / 2.0, 0.0, 1.0);
            std::snprintf(id_buf, sizeof id_buf, "t%05d", t + 1);
            std::string topic = id_buf;
            table.add({topic, retrieved_label(k, config.strategy_a), a, 0, 0});
            table.add({topic, retrieved_label(k, config.strategy_b), b, 0, 0});
            table.add({topic, retrieved_label(k, config.strategy_c), 0.5, 0, 0});
        }
    }
    return table;
}

} // namespace rageval
