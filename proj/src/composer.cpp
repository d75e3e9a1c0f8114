#include "rageval/composer.hpp"

#include <algorithm>
#include <unordered_set>

#include "rageval/errors.hpp"
#include "rageval/hash.hpp"

namespace rageval {

std::string to_string(OrderingKind k) {
    switch (k) {
        case OrderingKind::standard: return "standard";
        case OrderingKind::reverse: return "reverse";
        case OrderingKind::random: return "random";
    }
    return "standard";
}

OrderingKind ordering_from_string(const std::string& s) {
    if (s == "standard") return OrderingKind::standard;
    if (s == "reverse") return OrderingKind::reverse;
    if (s == "random") return OrderingKind::random;
    throw config_error("unknown ordering \"" + s + "\"");
}

std::string to_string(ContextMode m) {
    switch (m) {
        case ContextMode::retrieved: return "retrieved";
        case ContextMode::positional_sweep: return "sweep";
        case ContextMode::closed_book: return "closed_book";
        case ContextMode::oracle_passages: return "oracle_passages";
        case ContextMode::oracle_sents: return "oracle_sents";
        case ContextMode::oracle_bm25_standard: return "oracle_bm25_standard";
        case ContextMode::oracle_bm25_reverse: return "oracle_bm25_reverse";
    }
    return "retrieved";
}

ContextMode context_mode_from_string(const std::string& s) {
    if (s == "retrieved") return ContextMode::retrieved;
    if (s == "sweep" || s == "positional_sweep") return ContextMode::positional_sweep;
    if (s == "closed_book") return ContextMode::closed_book;
    if (s == "oracle_passages") return ContextMode::oracle_passages;
    if (s == "oracle_sents") return ContextMode::oracle_sents;
    if (s == "oracle_bm25_standard") return ContextMode::oracle_bm25_standard;
    if (s == "oracle_bm25_reverse") return ContextMode::oracle_bm25_reverse;
    throw config_error("unknown context mode \"" + s + "\"");
}

std::string to_string(DistractorPolicy p) {
    return p == DistractorPolicy::random ? "random" : "retrieved";
}

DistractorPolicy distractor_policy_from_string(const std::string& s) {
    if (s == "random") return DistractorPolicy::random;
    if (s == "retrieved") return DistractorPolicy::retrieved;
    throw config_error("unknown distractor policy \"" + s + "\"");
}

std::string ContextSpec::label() const {
    switch (mode) {
        case ContextMode::retrieved: return retrieved_label(k, rageval::to_string(ordering));
        case ContextMode::positional_sweep: return sweep_label(k, position);
        case ContextMode::closed_book: return "closed_book";
        case ContextMode::oracle_sents: return "oracle_sents";
        default: return oracle_label(rageval::to_string(mode), k);
    }
}

std::string ComposedContext::context_text() const {
    std::string text;
    for (const auto& view : passages) {
        if (!text.empty()) text += "\n\n";
        text += view.text;
    }
    return text;
}

uint64_t per_query_seed(uint64_t global_seed, const std::string& query_id,
                        const std::string& condition_label) {
    return stable_hash(global_seed, query_id, condition_label);
}

std::vector<std::string> apply_ordering(const std::vector<RankedEntry>& prefix,
                                        const OrderingScheme& scheme) {
    std::vector<std::string> ids;
    ids.reserve(prefix.size());
    for (const auto& e : prefix) ids.push_back(e.passage_id);
    switch (scheme.kind) {
        case OrderingKind::standard: break;
        case OrderingKind::reverse: std::reverse(ids.begin(), ids.end()); break;
        case OrderingKind::random: deterministic_shuffle(ids, scheme.seed); break;
    }
    return ids;
}

size_t whitespace_token_count(std::string_view text) {
    size_t count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (space) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::string render_prompt(const std::string& question, const std::vector<PassageView>& passages,
                          const PromptTemplate& tmpl) {
    std::string prompt = tmpl.instruction;
    prompt += "\n\n";
    if (!passages.empty()) {
        for (size_t i = 0; i < passages.size(); ++i) {
            prompt += "Document [" + std::to_string(i + 1) + "]";
            if (!passages[i].title.empty()) prompt += " (" + passages[i].title + ")";
            prompt += ": " + passages[i].text + "\n";
        }
        prompt += "\n";
    }
    prompt += tmpl.question_prefix + question + "\n";
    prompt += tmpl.answer_prefix;
    return prompt;
}

namespace {

PassageView view_of(const Corpus& corpus, const std::string& id) {
    const Passage& p = corpus.at(id);
    return {p.id, p.title.value_or(""), p.text};
}

void check_unique(const std::vector<std::string>& ids) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            throw validation_error("duplicate passage in context: " + id);
}

// Renders the prompt, dropping whole passages from the last position inward
// until the whitespace-token budget is met.
void finalize(ComposedContext& ctx, const std::string& question, const PromptTemplate& tmpl) {
    check_unique(ctx.passage_ids);
    ctx.prompt = render_prompt(question, ctx.passages, tmpl);
    if (tmpl.token_budget == 0) return;
    while (!ctx.passages.empty() && whitespace_token_count(ctx.prompt) > tmpl.token_budget) {
        ctx.passages.pop_back();
        ctx.passage_ids.pop_back();
        ++ctx.provenance.truncated_passages;
        ctx.prompt = render_prompt(question, ctx.passages, tmpl);
    }
}

} // namespace

ComposedContext retrieved_context(const Query& query, const Corpus& corpus,
                                  const RankedList& ranked, int k, OrderingKind ordering,
                                  uint64_t global_seed, const PromptTemplate& tmpl) {
    if (k < 1) throw validation_error("retrieved context requires k >= 1");
    ComposedContext ctx;
    ctx.query_id = query.id;
    ctx.spec = {ContextMode::retrieved, k, ordering, 0};
    ctx.provenance.source = ranked.producer;
    ctx.provenance.seed = per_query_seed(global_seed, query.id, ctx.spec.label());

    size_t take = std::min(ranked.entries.size(), static_cast<size_t>(k));
    if (take < static_cast<size_t>(k)) ctx.provenance.short_context = true;
    std::vector<RankedEntry> prefix(ranked.entries.begin(),
                                    ranked.entries.begin() + static_cast<long>(take));
    ctx.passage_ids = apply_ordering(prefix, {ordering, ctx.provenance.seed});
    for (const auto& id : ctx.passage_ids) ctx.passages.push_back(view_of(corpus, id));
    finalize(ctx, query.question, tmpl);
    return ctx;
}

ComposedContext positional_sweep_context(const Query& query, const Corpus& corpus,
                                         const std::vector<std::string>& gold_ids,
                                         const std::vector<std::string>& distractor_ids,
                                         int position, int k, const PromptTemplate& tmpl) {
    if (gold_ids.empty()) throw validation_error("sweep requires gold passages");
    if (k < 1 || position < 1 || position > k)
        throw validation_error("sweep position " + std::to_string(position) +
                               " outside context of size " + std::to_string(k));
    size_t golds = gold_ids.size();
    if (static_cast<size_t>(position) + golds - 1 > static_cast<size_t>(k))
        throw validation_error("gold block of " + std::to_string(golds) +
                               " does not fit at position " + std::to_string(position) +
                               " with k=" + std::to_string(k));
    size_t needed = static_cast<size_t>(k) - golds;
    if (distractor_ids.size() < needed)
        throw validation_error("need " + std::to_string(needed) + " distractors, have " +
                               std::to_string(distractor_ids.size()));

    ComposedContext ctx;
    ctx.query_id = query.id;
    ctx.spec = {ContextMode::positional_sweep, k, OrderingKind::standard, position};
    ctx.provenance.source = "distractors";

    size_t before = static_cast<size_t>(position) - 1;
    auto next_distractor = distractor_ids.begin();
    for (size_t i = 0; i < before; ++i) ctx.passage_ids.push_back(*next_distractor++);
    for (const auto& id : gold_ids) ctx.passage_ids.push_back(id);
    while (ctx.passage_ids.size() < static_cast<size_t>(k))
        ctx.passage_ids.push_back(*next_distractor++);
    for (const auto& id : ctx.passage_ids) ctx.passages.push_back(view_of(corpus, id));
    finalize(ctx, query.question, tmpl);
    return ctx;
}

namespace {

// One synthetic passage per gold passage, holding only its gold sentences,
// grouped by first appearance order of the refs.
std::vector<PassageView> condense_gold_sentences(const Query& query, const Corpus& corpus) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<size_t>> by_passage;
    for (const auto& ref : query.gold_sentence_refs) {
        auto [it, inserted] = by_passage.try_emplace(ref.passage_id);
        if (inserted) order.push_back(ref.passage_id);
        it->second.push_back(ref.sentence_index);
    }
    std::vector<PassageView> views;
    for (const auto& id : order) {
        const Passage& p = corpus.at(id);
        if (!p.sentences)
            throw validation_error("passage \"" + id + "\" has no sentence segmentation");
        std::string text;
        for (size_t idx : by_passage[id]) {
            if (idx >= p.sentences->size())
                throw validation_error("sentence " + std::to_string(idx) +
                                       " out of range in passage \"" + id + "\"");
            if (!text.empty()) text += ' ';
            text += (*p.sentences)[idx];
        }
        views.push_back({p.id, p.title.value_or(""), std::move(text)});
    }
    return views;
}

} // namespace

ComposedContext oracle_context(const Query& query, const Corpus& corpus, ContextMode mode,
                               const RankedList* filler, int k, const PromptTemplate& tmpl) {
    ComposedContext ctx;
    ctx.query_id = query.id;
    ctx.spec = {mode, k, OrderingKind::standard, 0};
    ctx.provenance.source = mode == ContextMode::closed_book ? "none" : "oracle";

    switch (mode) {
        case ContextMode::closed_book: break;

        case ContextMode::oracle_passages: {
            if (!query.has_gold_passages())
                throw validation_error("query \"" + query.id + "\" has no gold passages");
            for (const auto& id : query.gold_passage_ids) {
                ctx.passage_ids.push_back(id);
                ctx.passages.push_back(view_of(corpus, id));
            }
            break;
        }

        case ContextMode::oracle_sents: {
            if (!query.has_gold_sentences())
                throw validation_error("query \"" + query.id + "\" has no gold sentences");
            ctx.passages = condense_gold_sentences(query, corpus);
            for (const auto& view : ctx.passages) ctx.passage_ids.push_back(view.id);
            break;
        }

        case ContextMode::oracle_bm25_standard:
        case ContextMode::oracle_bm25_reverse: {
            if (!query.has_gold_passages())
                throw validation_error("query \"" + query.id + "\" has no gold passages");
            if (!filler) throw validation_error("hybrid oracle modes require a filler list");
            if (k < 1) throw validation_error("hybrid oracle modes require k >= 1");
            std::unordered_set<std::string> gold_set(query.gold_passage_ids.begin(),
                                                     query.gold_passage_ids.end());
            size_t golds = query.gold_passage_ids.size();
            size_t slots = static_cast<size_t>(k) > golds ? static_cast<size_t>(k) - golds : 0;
            std::vector<std::string> non_gold;
            for (const auto& e : filler->entries) {
                if (non_gold.size() == slots) break;
                if (!gold_set.count(e.passage_id)) non_gold.push_back(e.passage_id);
            }
            if (non_gold.size() < slots) ctx.provenance.short_context = true;
            if (mode == ContextMode::oracle_bm25_standard) {
                ctx.passage_ids = query.gold_passage_ids;
                ctx.passage_ids.insert(ctx.passage_ids.end(), non_gold.begin(), non_gold.end());
            } else {
                std::reverse(non_gold.begin(), non_gold.end());
                ctx.passage_ids = std::move(non_gold);
                ctx.passage_ids.insert(ctx.passage_ids.end(), query.gold_passage_ids.begin(),
                                       query.gold_passage_ids.end());
            }
            for (const auto& id : ctx.passage_ids) ctx.passages.push_back(view_of(corpus, id));
            break;
        }

        case ContextMode::retrieved:
        case ContextMode::positional_sweep:
            throw validation_error("not an oracle mode: " + rageval::to_string(mode));
    }
    finalize(ctx, query.question, tmpl);
    return ctx;
}

std::vector<std::string> distractor_pool(const Query& query, const Corpus& corpus,
                                         const RankedList* ranked, DistractorPolicy policy,
                                         size_t count, uint64_t global_seed) {
    std::unordered_set<std::string> gold_set(query.gold_passage_ids.begin(),
                                             query.gold_passage_ids.end());
    std::vector<std::string> pool;
    if (policy == DistractorPolicy::random) {
        std::vector<std::string> candidates;
        candidates.reserve(corpus.size());
        for (const auto& p : corpus.passages())
            if (!gold_set.count(p.id)) candidates.push_back(p.id);
        std::sort(candidates.begin(), candidates.end());
        deterministic_shuffle(candidates, stable_hash(global_seed, query.id, "distractors"));
        size_t take = std::min(count, candidates.size());
        pool.assign(candidates.begin(), candidates.begin() + static_cast<long>(take));
    } else {
        if (!ranked) throw validation_error("retrieved distractor policy requires a ranked list");
        for (const auto& e : ranked->entries) {
            if (pool.size() == count) break;
            if (!gold_set.count(e.passage_id)) pool.push_back(e.passage_id);
        }
    }
    if (pool.size() < count)
        throw validation_error("need " + std::to_string(count) + " distractors for query \"" +
                               query.id + "\", only " + std::to_string(pool.size()) +
                               " available");
    return pool;
}

} // namespace rageval
