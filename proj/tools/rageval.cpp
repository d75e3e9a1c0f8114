#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rageval/calibration.hpp"
#include "rageval/composer.hpp"
#include "rageval/conditions.hpp"
#include "rageval/corpus.hpp"
#include "rageval/embedding.hpp"
#include "rageval/errors.hpp"
#include "rageval/jsonl.hpp"
#include "rageval/metrics.hpp"
#include "rageval/report.hpp"
#include "rageval/retrieval.hpp"
#include "rageval/runconfig.hpp"
#include "rageval/runner.hpp"
#include "rageval/version.hpp"

namespace {

using namespace rageval;

struct GlobalFlags {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

int cmd_ingest(const std::string& corpus_path, const std::string& dataset_path,
               const std::string& out_dir) {
    std::vector<std::string> warnings;
    Corpus corpus = load_corpus(corpus_path, &warnings);
    Dataset dataset = load_dataset(dataset_path, corpus, /*strict=*/false);
    ValidationReport report = validate(dataset, corpus);
    for (const auto& w : warnings) report.warnings.push_back(w);

    json out = report.to_json();
    out["dataset"] = dataset.name;
    out["passages"] = corpus.size();
    if (!out_dir.empty())
        write_text_atomic(std::filesystem::path(out_dir) / "validation.json",
                          out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return report.ok() ? 0 : 2;
}

int cmd_index(const std::string& corpus_path, const std::string& out_dir, double k1, double b) {
    Corpus corpus = load_corpus(corpus_path);
    Bm25Index index = Bm25Index::build(corpus, {k1, b});
    index.save(out_dir);
    std::cout << "indexed " << index.doc_count() << " passages (avg length "
              << index.avg_doc_length() << ") -> " << out_dir << "\n";
    return 0;
}

int cmd_retrieve(const std::string& index_dir, const std::string& dataset_path,
                 const std::string& corpus_path, int k, bool do_rerank, int pool,
                 const std::string& embed_endpoint, const std::string& embed_model,
                 const std::string& out_dir) {
    Bm25Index index = Bm25Index::load(index_dir);
    Corpus corpus;
    if (!corpus_path.empty()) corpus = load_corpus(corpus_path);
    if (do_rerank && corpus.empty())
        throw config_error("--rerank needs --corpus for passage texts");
    Dataset dataset = load_dataset(dataset_path, corpus, /*strict=*/false);

    std::unique_ptr<EmbeddingProvider> provider;
    if (do_rerank) {
        EmbeddingEndpointConfig cfg;
        cfg.endpoint = embed_endpoint;
        cfg.model_name = embed_model;
        provider = std::make_unique<CachingEmbeddingProvider>(make_http_embedding_provider(cfg));
    }

    jsonl_writer out(std::filesystem::path(out_dir) / "ranked.jsonl");
    for (const auto& query : dataset.queries) {
        RankedList list = index.search(query.question, do_rerank ? std::max(pool, k) : k,
                                       query.id);
        if (do_rerank) list = rerank(corpus, list, query.question, *provider, pool, k);
        json entries = json::array();
        for (const auto& e : list.entries)
            entries.push_back({{"passage_id", e.passage_id}, {"score", e.score}});
        out.write({{"query_id", list.query_id},
                   {"producer", list.producer},
                   {"entries", std::move(entries)}});
    }
    std::cout << "wrote " << dataset.queries.size() << " ranked lists -> " << out.path().string()
              << "\n";
    return 0;
}

int cmd_compose(const ExperimentConfig& config, const std::string& out_dir) {
    Corpus corpus = load_corpus(config.corpus_path);
    Dataset dataset = load_dataset(config.dataset_path, corpus, /*strict=*/true);
    Bm25Index index = Bm25Index::build(corpus, config.bm25);
    auto specs = expand_conditions(config);

    jsonl_writer contexts(std::filesystem::path(out_dir) / "contexts.jsonl");
    jsonl_writer skips(std::filesystem::path(out_dir) / "compose_skips.jsonl");
    size_t written = 0, skipped = 0;
    for (const auto& spec : specs) {
        std::string label = spec.label();
        for (const auto& query : dataset.queries) {
            try {
                ComposedContext ctx;
                switch (spec.mode) {
                    case ContextMode::retrieved: {
                        RankedList ranked = index.search(query.question, spec.k, query.id);
                        ctx = retrieved_context(query, corpus, ranked, spec.k, spec.ordering,
                                                config.seed, config.prompt);
                        break;
                    }
                    case ContextMode::positional_sweep: {
                        if (!query.has_gold_passages())
                            throw validation_error("no gold passages");
                        size_t golds = query.gold_passage_ids.size();
                        if (golds > static_cast<size_t>(spec.k))
                            throw validation_error("gold block exceeds k");
                        RankedList ranked;
                        const RankedList* ranked_ptr = nullptr;
                        if (config.distractor_policy == DistractorPolicy::retrieved) {
                            ranked = index.search(query.question,
                                                  spec.k + static_cast<int>(golds), query.id);
                            ranked_ptr = &ranked;
                        }
                        auto distractors = distractor_pool(
                            query, corpus, ranked_ptr, config.distractor_policy,
                            static_cast<size_t>(spec.k) - golds, config.seed);
                        ctx = positional_sweep_context(query, corpus, query.gold_passage_ids,
                                                       distractors, spec.position, spec.k,
                                                       config.prompt);
                        break;
                    }
                    case ContextMode::oracle_bm25_standard:
                    case ContextMode::oracle_bm25_reverse: {
                        RankedList ranked = index.search(
                            query.question,
                            spec.k + static_cast<int>(query.gold_passage_ids.size()),
                            query.id);
                        ctx = oracle_context(query, corpus, spec.mode, &ranked, spec.k,
                                             config.prompt);
                        break;
                    }
                    default:
                        ctx = oracle_context(query, corpus, spec.mode, nullptr, spec.k,
                                             config.prompt);
                }
                contexts.write({{"query_id", ctx.query_id},
                                {"condition", label},
                                {"passage_ids", ctx.passage_ids},
                                {"prompt", ctx.prompt},
                                {"source", ctx.provenance.source},
                                {"seed", ctx.provenance.seed}});
                ++written;
            } catch (const validation_error& e) {
                skips.write({{"query_id", query.id}, {"condition", label},
                             {"reason", e.what()}});
                ++skipped;
            }
        }
    }
    std::cout << "composed " << written << " contexts, skipped " << skipped << " -> "
              << contexts.path().string() << "\n";
    return 0;
}

int cmd_run(const ExperimentConfig& config) {
    RunSummary summary = run_experiment(config);
    check_tiling(summary.run_dir);
    std::cout << "run " << summary.run_dir.string() << ": " << summary.records_written
              << " records written, " << summary.records_resumed << " resumed, "
              << summary.skipped << " skipped, " << summary.failed << " failed over "
              << summary.conditions << " conditions\n";
    return summary.failed > 0 ? 4 : 0;
}

int cmd_calibrate(const std::string& records_dir, const CalibrationConfig& config,
                  const std::string& out_dir) {
    ScoreTable table = ScoreTable::from_run_dir(records_dir);
    CalibrationResult result = calibrate(table, config);

    std::string csv = "pair,k,n,mean_delta,std,min,max,reference,crossing,noticeable\n";
    char buf[64];
    for (const auto& report : result.budgets) {
        for (const auto& cell : report.cells) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f", cell.mean_delta,
                          cell.std_delta, cell.min_delta, cell.max_delta, cell.reference_delta);
            csv += cell.pair + "," + std::to_string(cell.k) + "," +
                   std::to_string(report.budget) + "," + buf + "," +
                   (cell.crossing ? "1" : "0") + "," + (cell.noticeable ? "1" : "0") + "\n";
        }
    }
    if (!out_dir.empty()) {
        write_text_atomic(std::filesystem::path(out_dir) / "calibration.json",
                          result.to_json().dump(2) + "\n");
        write_text_atomic(std::filesystem::path(out_dir) / "calibration.csv", csv);
    }
    std::cout << "recommended budget: " << result.recommendation_note << "\n";
    for (const auto& report : result.budgets)
        std::cout << "  n=" << report.budget << ": " << report.noticeable_crossing_cells
                  << " noticeable crossing cells (" << report.crossing_cells
                  << " crossing total)\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& mode,
               const std::string& out_dir, const std::vector<int>& k_grid) {
    std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
    auto path = write_report(dirs, mode, out_dir, k_grid);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(
    const std::vector<std::string>& specs) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& s : specs) {
        auto dash = s.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 == s.size())
            throw config_error("strategy pair must look like reverse-standard: \"" + s + "\"");
        pairs.emplace_back(s.substr(0, dash), s.substr(dash + 1));
    }
    return pairs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAG evaluation harness and topic-budget calibrator"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough(); // global --config/--seed/--out may follow the subcommand

    GlobalFlags global;
    app.add_option("--config", global.config_path, "experiment config file (yaml)");
    app.add_option("--seed", global.seed, "global seed override")
        ->each([&](const std::string&) { global.seed_set = true; });
    app.add_option("--out", global.out_dir, "output directory override");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a corpus and dataset");
    std::string in_corpus, in_dataset;
    ingest->add_option("--corpus", in_corpus, "corpus jsonl")->required();
    ingest->add_option("--dataset", in_dataset, "dataset jsonl")->required();

    // index
    auto* index_cmd = app.add_subcommand("index", "build a bm25 index");
    std::string ix_corpus;
    double ix_k1 = 1.2, ix_b = 0.75;
    index_cmd->add_option("--corpus", ix_corpus, "corpus jsonl")->required();
    index_cmd->add_option("--k1", ix_k1, "bm25 k1");
    index_cmd->add_option("--b", ix_b, "bm25 b");

    // retrieve
    auto* retrieve_cmd = app.add_subcommand("retrieve", "run top-k retrieval over a dataset");
    std::string rt_index, rt_dataset, rt_corpus, rt_embed_endpoint, rt_embed_model;
    int rt_k = 10, rt_pool = 100;
    bool rt_rerank = false;
    retrieve_cmd->add_option("--index", rt_index, "index directory")->required();
    retrieve_cmd->add_option("--dataset", rt_dataset, "dataset jsonl")->required();
    retrieve_cmd->add_option("--corpus", rt_corpus, "corpus jsonl (required for --rerank)");
    retrieve_cmd->add_option("--k", rt_k, "results per query");
    retrieve_cmd->add_flag("--rerank", rt_rerank, "re-score the bm25 pool by embedding cosine");
    retrieve_cmd->add_option("--pool", rt_pool, "rerank pool size");
    retrieve_cmd->add_option("--embed-endpoint", rt_embed_endpoint, "embeddings endpoint");
    retrieve_cmd->add_option("--embed-model", rt_embed_model, "embeddings model name");

    // compose
    auto* compose_cmd = app.add_subcommand("compose", "emit composed contexts for audit");

    // run
    auto* run_cmd = app.add_subcommand("run", "run the full experiment grid");

    // calibrate
    auto* calibrate_cmd = app.add_subcommand("calibrate", "recommend a stable topic budget");
    std::string cal_records;
    CalibrationConfig cal_config;
    std::vector<std::string> cal_pairs;
    calibrate_cmd->add_option("--records", cal_records, "run or records directory")->required();
    calibrate_cmd->add_option("--budgets", cal_config.budgets, "budget grid")->delimiter(',');
    calibrate_cmd->add_option("--subsets", cal_config.subsets, "subsets per budget");
    calibrate_cmd->add_option("--epsilon", cal_config.epsilon, "noticeable-delta floor");
    calibrate_cmd->add_option("--k-grid", cal_config.k_grid, "k grid")->delimiter(',');
    calibrate_cmd->add_option("--pairs", cal_pairs, "strategy pairs, e.g. reverse-standard")
        ->delimiter(',');
    calibrate_cmd->add_flag("--nested", cal_config.nested, "nested subsets across budgets");

    // report
    auto* report_cmd = app.add_subcommand("report", "aggregate run dirs into plot data");
    std::vector<std::string> rp_dirs;
    std::string rp_mode = "curves";
    std::vector<int> rp_k_grid;
    report_cmd->add_option("--mode", rp_mode, "curves | delta | sweep | model_compare");
    report_cmd->add_option("--k-grid", rp_k_grid, "k grid")->delimiter(',');
    report_cmd->add_option("dirs", rp_dirs, "run directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto out_or = [&](const std::string& fallback) {
            return global.out_dir.empty() ? fallback : global.out_dir;
        };
        auto load_config = [&]() {
            if (global.config_path.empty()) throw config_error("--config is required");
            ExperimentConfig config = load_experiment_config(global.config_path);
            if (global.seed_set) config.seed = global.seed;
            if (!global.out_dir.empty()) config.out_dir = global.out_dir;
            return config;
        };

        if (*ingest) return cmd_ingest(in_corpus, in_dataset, global.out_dir);
        if (*index_cmd) return cmd_index(ix_corpus, out_or("index"), ix_k1, ix_b);
        if (*retrieve_cmd)
            return cmd_retrieve(rt_index, rt_dataset, rt_corpus, rt_k, rt_rerank, rt_pool,
                                rt_embed_endpoint, rt_embed_model, out_or("retrieval"));
        if (*compose_cmd) {
            ExperimentConfig config = load_config();
            return cmd_compose(config, out_or("contexts"));
        }
        if (*run_cmd) return cmd_run(load_config());
        if (*calibrate_cmd) {
            if (global.seed_set) cal_config.seed = global.seed;
            if (!cal_pairs.empty()) cal_config.pairs = parse_pairs(cal_pairs);
            return cmd_calibrate(cal_records, cal_config, global.out_dir);
        }
        if (*report_cmd) return cmd_report(rp_dirs, rp_mode, out_or("report"), rp_k_grid);
        return 2;
    } catch (const transport_error& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 4;
    } catch (const protocol_error& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 4;
    } catch (const coverage_error& e) {
        std::cerr << "coverage error: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
}
