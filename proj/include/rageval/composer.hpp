#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rageval/conditions.hpp"
#include "rageval/corpus.hpp"
#include "rageval/retrieval.hpp"

namespace rageval {

enum class OrderingKind { standard, reverse, random };

std::string to_string(OrderingKind k);
OrderingKind ordering_from_string(const std::string& s);

struct OrderingScheme {
    OrderingKind kind = OrderingKind::standard;
    uint64_t seed = 0; // used only by random
};

enum class ContextMode {
    retrieved,
    positional_sweep,
    closed_book,
    oracle_passages,
    oracle_sents,
    oracle_bm25_standard,
    oracle_bm25_reverse,
};

std::string to_string(ContextMode m);
ContextMode context_mode_from_string(const std::string& s);

struct ContextSpec {
    ContextMode mode = ContextMode::retrieved;
    int k = 0;                                       // 0 where size does not apply
    OrderingKind ordering = OrderingKind::standard;  // retrieved only
    int position = 0;                                // positional_sweep only, 1-indexed

    std::string label() const;
};

struct PromptTemplate {
    std::string instruction = "Answer the question using the provided documents; answer concisely.";
    std::string question_prefix = "Question: ";
    std::string answer_prefix = "Answer:";
    // Whitespace-token budget for the rendered prompt; 0 = unlimited. On
    // overflow whole passages are dropped from the last position inward and
    // the drop count is recorded in provenance.
    size_t token_budget = 0;
};

struct PassageView {
    std::string id;
    std::string title; // empty = untitled
    std::string text;
};

struct ContextProvenance {
    std::string source = "none"; // bm25 | rerank | oracle | distractors | none
    uint64_t seed = 0;
    int truncated_passages = 0;
    bool short_context = false; // filler or candidates ran out before k
};

struct ComposedContext {
    std::string query_id;
    std::vector<std::string> passage_ids;
    std::vector<PassageView> passages; // texts actually rendered (oracle_sents condenses)
    std::string prompt;
    ContextSpec spec;
    ContextProvenance provenance;

    std::string context_text() const; // passage texts joined, for audits and mocks
};

// Per-query randomness: adding or removing queries never shifts another
// query's permutation or distractor draw.
uint64_t per_query_seed(uint64_t global_seed, const std::string& query_id,
                        const std::string& condition_label);

// standard -> unchanged, reverse -> exact reversal, random -> seeded uniform
// permutation. Always a permutation of the input ids.
std::vector<std::string> apply_ordering(const std::vector<RankedEntry>& prefix,
                                        const OrderingScheme& scheme);

// Deterministic prompt rendering; passages appear in the given order. With no
// passages the context block is omitted entirely.
std::string render_prompt(const std::string& question, const std::vector<PassageView>& passages,
                          const PromptTemplate& tmpl);

size_t whitespace_token_count(std::string_view text);

// First min(k, |ranked|) entries of `ranked`, arranged by `ordering`; the
// random permutation is seeded per (global_seed, query, label).
ComposedContext retrieved_context(const Query& query, const Corpus& corpus,
                                  const RankedList& ranked, int k, OrderingKind ordering,
                                  uint64_t global_seed, const PromptTemplate& tmpl);

// Gold block placement: distractors fill positions 1..position-1, golds sit
// at position..position+|golds|-1 in their given order, distractors fill the
// rest; exactly k passages. Requires 1 <= position, position+|golds|-1 <= k
// and enough distractors (validation_error otherwise).
ComposedContext positional_sweep_context(const Query& query, const Corpus& corpus,
                                         const std::vector<std::string>& gold_ids,
                                         const std::vector<std::string>& distractor_ids,
                                         int position, int k, const PromptTemplate& tmpl);

// closed_book: no passages. oracle_passages: all golds in dataset order.
// oracle_sents: one synthetic passage per gold holding only its gold
// sentences. oracle_bm25_standard: golds first, then top non-gold filler
// descending up to k. oracle_bm25_reverse: the same non-gold filler ascending
// first, golds appended last. Gold entries in the filler are skipped, never
// duplicated; golds themselves are never dropped.
ComposedContext oracle_context(const Query& query, const Corpus& corpus, ContextMode mode,
                               const RankedList* filler, int k, const PromptTemplate& tmpl);

enum class DistractorPolicy { random, retrieved };

std::string to_string(DistractorPolicy p);
DistractorPolicy distractor_policy_from_string(const std::string& s);

// Ordered non-gold passage ids for sweep padding. random: uniform draw
// without replacement from the corpus (ids sorted before shuffling, seeded
// per query); retrieved: top non-gold entries of `ranked`. Fewer than `count`
// available raises validation_error naming the shortfall.
std::vector<std::string> distractor_pool(const Query& query, const Corpus& corpus,
                                         const RankedList* ranked, DistractorPolicy policy,
                                         size_t count, uint64_t global_seed);

} // namespace rageval
