#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rageval/metrics.hpp"

namespace rageval {

struct RunDirInfo {
    std::filesystem::path dir;
    std::string model;
    std::string dataset; // identity check when mixing runs
    std::string retriever;
    ScoreTable table;
};

RunDirInfo load_run_dir(const std::filesystem::path& dir);

// All CSVs carry a header row and are sorted, so output is independent of
// record file order.

// strategy,k,mean_f1,mean_accuracy,n
std::string curves_csv(const ScoreTable& table);

// pair,k,mean_delta,std_delta,min_delta,max_delta,n_subsets
std::string delta_csv(const ScoreTable& table,
                      const std::vector<std::pair<std::string, std::string>>& pairs,
                      const std::vector<int>& k_grid);

// position,k,mean_accuracy,mean_f1,n
std::string sweep_csv(const ScoreTable& table);

// model,k,delta_reverse_standard,best_f1,best_condition
std::string model_compare_csv(const std::vector<RunDirInfo>& runs,
                              const std::vector<int>& k_grid);

// Dispatch on mode (curves | delta | sweep | model_compare); writes
// <out>/<mode>.csv and returns its path. validation_error when the run dirs
// disagree on dataset.
std::filesystem::path write_report(const std::vector<std::filesystem::path>& run_dirs,
                                   const std::string& mode, const std::filesystem::path& out,
                                   const std::vector<int>& k_grid);

// k values present in retrieved:* labels, ascending.
std::vector<int> observed_k_grid(const ScoreTable& table);

} // namespace rageval
