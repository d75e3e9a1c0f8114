#pragma once

#include <filesystem>
#include <string>

#include "rageval/reader.hpp"
#include "rageval/runconfig.hpp"

namespace rageval {

struct RunSummary {
    std::filesystem::path run_dir;
    int records_written = 0;
    int records_resumed = 0; // present before this invocation, left untouched
    int skipped = 0;         // ineligible (query, condition) cells
    int failed = 0;          // transport or protocol failures after retries
    int conditions = 0;
};

// Retrieve, compose, generate, score; one jsonl record file per condition
// under <out_dir>/records/, plus manifest.json, effective_config.yaml,
// skips.jsonl and failures.jsonl. Records flush one at a time in dataset
// query order, so a killed run resumes from the flushed prefix. Re-running
// verifies the manifest's config hash and recomputes only missing cells.
// reader_override substitutes the backend (tests); nullptr uses the config.
RunSummary run_experiment(const ExperimentConfig& config, Reader* reader_override = nullptr);

// records ∪ skips ∪ failures must tile queries × conditions exactly;
// validation_error on any missing or duplicated cell.
void check_tiling(const std::filesystem::path& run_dir);

} // namespace rageval
