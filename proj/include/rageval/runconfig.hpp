#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rageval/composer.hpp"
#include "rageval/embedding.hpp"
#include "rageval/reader.hpp"
#include "rageval/retrieval.hpp"

namespace rageval {

// One template expands to one or more concrete ContextSpecs.
struct ConditionTemplate {
    ContextMode mode = ContextMode::retrieved;
    std::vector<int> k_grid;               // retrieved and oracle filler depths
    std::vector<OrderingKind> orderings;   // retrieved only
    std::vector<int> positions;            // positional_sweep only
    int k = 0;                             // positional_sweep context size
};

struct ExperimentConfig {
    std::string corpus_path;
    std::string dataset_path;
    std::string retriever = "bm25"; // bm25 | bm25_rerank
    int rerank_pool = 100;
    Bm25Params bm25;
    EmbeddingEndpointConfig embedding; // consulted only for bm25_rerank
    std::vector<ConditionTemplate> conditions;
    PromptTemplate prompt;
    DistractorPolicy distractor_policy = DistractorPolicy::random;
    ReaderConfig reader;
    uint64_t seed = 0;
    std::string out_dir = "run";
    std::string cache_path; // empty = <out_dir>/cache/journal.jsonl
    int max_in_flight = 1;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Every field spelled out, defaults included, so the run directory records
// the exact settings even when the input file omitted them.
std::string effective_config_yaml(const ExperimentConfig& config);

// Hash of the canonical serialization minus out_dir and cache_path, so a run
// moved to a new directory still resumes.
std::string config_hash(const ExperimentConfig& config);

// Concrete specs in template order, grid-major within each template,
// duplicates (by label) dropped keeping the first.
std::vector<ContextSpec> expand_conditions(const ExperimentConfig& config);

} // namespace rageval
