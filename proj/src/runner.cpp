#include "rageval/runner.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "rageval/calibration.hpp"
#include "rageval/composer.hpp"
#include "rageval/conditions.hpp"
#include "rageval/embedding.hpp"
#include "rageval/errors.hpp"
#include "rageval/hash.hpp"
#include "rageval/jsonl.hpp"
#include "rageval/metrics.hpp"
#include "rageval/version.hpp"

namespace rageval {

namespace {

// Reads back a record file for resume. A process killed mid-write can leave a
// torn final line; that line is dropped and the file truncated to the intact
// prefix. Torn lines anywhere else mean real corruption and stay fatal.
std::unordered_set<std::string> read_completed(const std::filesystem::path& path) {
    std::unordered_set<std::string> done;
    if (!std::filesystem::exists(path)) return done;
    std::string text = read_text(path);
    size_t offset = 0;
    size_t good_end = 0;
    while (offset < text.size()) {
        size_t eol = text.find('\n', offset);
        bool complete = eol != std::string::npos;
        std::string line = text.substr(offset, complete ? eol - offset : std::string::npos);
        json record = json::parse(line, nullptr, false);
        bool valid = !record.is_discarded() && record.is_object() && record.contains("query_id");
        if (!valid) {
            if (complete)
                throw parse_error(path.string() + ": corrupt record mid-file");
            break; // torn tail
        }
        done.insert(record["query_id"].get<std::string>());
        if (!complete) break;
        offset = eol + 1;
        good_end = offset;
    }
    if (good_end < text.size()) std::filesystem::resize_file(path, good_end);
    return done;
}

struct CellOutcome {
    json record;                       // set on success
    std::optional<std::string> skip;   // validation reason
    std::optional<std::string> fail;   // transport or protocol reason
};

struct RetrievalMemo {
    std::mutex mutex;
    std::unordered_map<std::string, RankedList> bm25;
    std::unordered_map<std::string, RankedList> final; // reranked when configured
};

} // namespace

RunSummary run_experiment(const ExperimentConfig& config, Reader* reader_override) {
    std::vector<std::string> warnings;
    Corpus corpus = load_corpus(config.corpus_path, &warnings);
    Dataset dataset = load_dataset(config.dataset_path, corpus, /*strict=*/true);
    if (dataset.queries.empty())
        throw validation_error("dataset " + config.dataset_path + " has no queries");

    auto specs = expand_conditions(config);
    Bm25Index index = Bm25Index::build(corpus, config.bm25);

    std::unique_ptr<EmbeddingProvider> embedder;
    if (config.retriever == "bm25_rerank")
        embedder = std::make_unique<CachingEmbeddingProvider>(
            make_http_embedding_provider(config.embedding));

    std::filesystem::path run_dir = config.out_dir;
    std::filesystem::path records_dir = run_dir / "records";
    std::filesystem::create_directories(records_dir);

    std::string hash = config_hash(config);
    std::filesystem::path manifest_path = run_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        json manifest = json::parse(read_text(manifest_path), nullptr, false);
        if (manifest.is_discarded() || manifest.value("config_hash", "") != hash)
            throw validation_error(run_dir.string() +
                                   " holds a run with a different config; refusing to mix");
    } else {
        json manifest = {
            {"config_hash", hash},
            {"version", kVersion},
            {"dataset", dataset.name},
            {"dataset_path", config.dataset_path},
            {"corpus_path", config.corpus_path},
            {"model", config.reader.model_name},
            {"retriever", config.retriever},
            {"created", utc_timestamp()},
        };
        write_text_atomic(manifest_path, manifest.dump(2) + "\n");
    }
    write_text_atomic(run_dir / "effective_config.yaml", effective_config_yaml(config));

    std::shared_ptr<AnswerCache> cache = std::make_shared<AnswerCache>(
        config.cache_path.empty() ? run_dir / "cache" / "journal.jsonl"
                                  : std::filesystem::path(config.cache_path));
    std::unique_ptr<Reader> owned_reader;
    Reader* backend = reader_override;
    if (!backend) {
        owned_reader = make_reader(config.reader);
        backend = owned_reader.get();
    }
    // The override is borrowed, so the caching layer wraps a forwarding shim.
    struct Forwarder : Reader {
        Reader* inner;
        explicit Forwarder(Reader* r) : inner(r) {}
        GenerationResult generate(const GenerationRequest& req) override {
            return inner->generate(req);
        }
        std::string model_name() const override { return inner->model_name(); }
    };
    std::unique_ptr<Reader> reader = make_caching_reader(
        std::make_unique<Forwarder>(backend), cache, config.reader.temperature,
        config.reader.max_output_tokens);

    // One retrieval pass per query: deep enough for the largest retrieved k,
    // the rerank pool, and gold-dependent conditions that skip gold entries.
    int max_retrieved_k = 0;
    int max_gold_dependent_k = 0;
    for (const auto& spec : specs) {
        switch (spec.mode) {
            case ContextMode::retrieved:
                max_retrieved_k = std::max(max_retrieved_k, spec.k);
                break;
            case ContextMode::positional_sweep:
            case ContextMode::oracle_bm25_standard:
            case ContextMode::oracle_bm25_reverse:
                max_gold_dependent_k = std::max(max_gold_dependent_k, spec.k);
                break;
            default: break;
        }
    }
    if (embedder && max_retrieved_k > config.rerank_pool)
        throw config_error("rerank_pool " + std::to_string(config.rerank_pool) +
                           " smaller than the largest retrieved k " +
                           std::to_string(max_retrieved_k));

    RetrievalMemo memo;
    auto retrieve = [&](const Query& query) -> std::pair<const RankedList*, const RankedList*> {
        std::lock_guard<std::mutex> lock(memo.mutex);
        auto it = memo.bm25.find(query.id);
        if (it == memo.bm25.end()) {
            int depth = std::max(max_retrieved_k,
                                 max_gold_dependent_k +
                                     static_cast<int>(query.gold_passage_ids.size()));
            if (embedder) depth = std::max(depth, config.rerank_pool);
            depth = std::max(depth, 1);
            RankedList bm25 = index.search(query.question, depth, query.id);
            if (embedder && max_retrieved_k > 0) {
                int k = std::min<int>(max_retrieved_k,
                                      static_cast<int>(bm25.entries.size()));
                memo.final[query.id] =
                    k > 0 ? rerank(corpus, bm25, query.question, *embedder, config.rerank_pool,
                                   std::max(k, 1))
                          : bm25;
            }
            it = memo.bm25.emplace(query.id, std::move(bm25)).first;
        }
        const RankedList* final_list = &it->second;
        auto fit = memo.final.find(query.id);
        if (fit != memo.final.end()) final_list = &fit->second;
        return {&it->second, final_list};
    };

    auto evaluate_cell = [&](const Query& query, const ContextSpec& spec,
                             const std::string& label) -> CellOutcome {
        CellOutcome outcome;
        try {
            ComposedContext ctx;
            switch (spec.mode) {
                case ContextMode::retrieved: {
                    auto [bm25_list, final_list] = retrieve(query);
                    (void)bm25_list;
                    ctx = retrieved_context(query, corpus, *final_list, spec.k, spec.ordering,
                                            config.seed, config.prompt);
                    break;
                }
                case ContextMode::positional_sweep: {
                    if (!query.has_gold_passages())
                        throw validation_error("no gold passages");
                    size_t golds = query.gold_passage_ids.size();
                    if (golds > static_cast<size_t>(spec.k))
                        throw validation_error("gold block of " + std::to_string(golds) +
                                               " exceeds k=" + std::to_string(spec.k));
                    const RankedList* bm25_list = nullptr;
                    if (config.distractor_policy == DistractorPolicy::retrieved)
                        bm25_list = retrieve(query).first;
                    auto distractors =
                        distractor_pool(query, corpus, bm25_list, config.distractor_policy,
                                        static_cast<size_t>(spec.k) - golds, config.seed);
                    ctx = positional_sweep_context(query, corpus, query.gold_passage_ids,
                                                   distractors, spec.position, spec.k,
                                                   config.prompt);
                    break;
                }
                case ContextMode::closed_book:
                    ctx = oracle_context(query, corpus, spec.mode, nullptr, 0, config.prompt);
                    break;
                case ContextMode::oracle_passages:
                case ContextMode::oracle_sents:
                    ctx = oracle_context(query, corpus, spec.mode, nullptr, spec.k,
                                         config.prompt);
                    break;
                case ContextMode::oracle_bm25_standard:
                case ContextMode::oracle_bm25_reverse: {
                    const RankedList* bm25_list = retrieve(query).first;
                    ctx = oracle_context(query, corpus, spec.mode, bm25_list, spec.k,
                                         config.prompt);
                    break;
                }
            }

            GenerationRequest req;
            req.query_id = query.id;
            req.condition_label = label;
            req.prompt = ctx.prompt;
            req.context_text = ctx.context_text();
            req.gold_answers = query.gold_answers;
            req.sweep_position = spec.position;
            GenerationResult result = reader->generate(req);

            ScoreRecord score = score_answer(query.id, label, result.answer, query.gold_answers);
            json provenance = {
                {"retriever", ctx.provenance.source},
                {"seed", ctx.provenance.seed},
                {"model", reader->model_name()},
                {"cached", result.cached},
                {"ts", utc_timestamp()},
            };
            if (ctx.provenance.short_context) provenance["short_context"] = true;
            if (ctx.provenance.truncated_passages > 0)
                provenance["truncated_passages"] = ctx.provenance.truncated_passages;
            outcome.record = {
                {"query_id", query.id},
                {"condition", label},
                {"prompt_hash", stable_hash128_hex(ctx.prompt)},
                {"answer", result.answer},
                {"scores",
                 {{"f1", score.f1}, {"exact_match", score.exact_match},
                  {"accuracy", score.accuracy}}},
                {"provenance", std::move(provenance)},
            };
        } catch (const transport_error& e) {
            outcome.fail = std::string("transport: ") + e.what();
        } catch (const protocol_error& e) {
            outcome.fail = std::string("protocol: ") + e.what();
        } catch (const validation_error& e) {
            outcome.skip = e.what();
        }
        return outcome;
    };

    RunSummary summary;
    summary.run_dir = run_dir;
    summary.conditions = static_cast<int>(specs.size());

    jsonl_writer skips(run_dir / "skips.jsonl");
    jsonl_writer failures(run_dir / "failures.jsonl");

    for (const auto& spec : specs) {
        std::string label = spec.label();
        std::filesystem::path record_path = records_dir / (label_to_filename(label) + ".jsonl");
        auto done = read_completed(record_path);
        summary.records_resumed += static_cast<int>(done.size());
        jsonl_writer records(record_path, /*append=*/true);

        auto commit = [&](const Query& query, CellOutcome outcome) {
            if (outcome.skip) {
                skips.write({{"query_id", query.id}, {"condition", label},
                             {"reason", *outcome.skip}});
                ++summary.skipped;
            } else if (outcome.fail) {
                failures.write({{"query_id", query.id}, {"condition", label},
                                {"error", *outcome.fail}});
                ++summary.failed;
            } else {
                records.write(outcome.record);
                ++summary.records_written;
            }
        };

        // Records commit strictly in dataset order regardless of which
        // in-flight generation finishes first.
        std::deque<std::pair<const Query*, std::future<CellOutcome>>> window;
        auto drain_one = [&] {
            auto [query, future] = std::move(window.front());
            window.pop_front();
            commit(*query, future.get());
        };
        for (const auto& query : dataset.queries) {
            if (done.count(query.id)) continue;
            while (window.size() >= static_cast<size_t>(config.max_in_flight)) drain_one();
            window.emplace_back(&query, std::async(std::launch::async, [&, label] {
                                    return evaluate_cell(query, spec, label);
                                }));
        }
        while (!window.empty()) drain_one();
    }
    return summary;
}

void check_tiling(const std::filesystem::path& run_dir) {
    ExperimentConfig config = load_experiment_config(run_dir / "effective_config.yaml");
    Corpus corpus = load_corpus(config.corpus_path);
    Dataset dataset = load_dataset(config.dataset_path, corpus, /*strict=*/false);
    auto specs = expand_conditions(config);

    // cell -> count over records, skips and failures; exact tiling required.
    std::map<std::pair<std::string, std::string>, int> seen;
    auto tally_file = [&](const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) return;
        for_each_jsonl(path, [&](const json& record, size_t) {
            ++seen[{record.at("query_id").get<std::string>(),
                    record.at("condition").get<std::string>()}];
        });
    };
    for (const auto& spec : specs)
        tally_file(run_dir / "records" / (label_to_filename(spec.label()) + ".jsonl"));
    tally_file(run_dir / "skips.jsonl");
    tally_file(run_dir / "failures.jsonl");

    for (const auto& spec : specs) {
        std::string label = spec.label();
        for (const auto& query : dataset.queries) {
            auto it = seen.find({query.id, label});
            int count = it == seen.end() ? 0 : it->second;
            if (count != 1)
                throw validation_error("cell (" + query.id + ", " + label + ") appears " +
                                       std::to_string(count) + " times");
            seen.erase(it);
        }
    }
    if (!seen.empty()) {
        const auto& extra = seen.begin()->first;
        throw validation_error("unexpected cell (" + extra.first + ", " + extra.second + ")");
    }
}

} // namespace rageval
