#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rageval/corpus.hpp"
#include "rageval/retrieval.hpp"

namespace rageval {

// Cosine similarity; dimensions must match and both vectors must be nonzero
// (validation_error otherwise).
double cosine(std::span<const double> u, std::span<const double> v);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    // One vector per input, in input order.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string model_name() const = 0;
    virtual size_t dimension() const = 0; // 0 until known
};

struct EmbeddingEndpointConfig {
    std::string endpoint;   // e.g. http://localhost:8080/v1/embeddings
    std::string model_name;
    size_t dimension = 0;   // 0 = adopt the first response's length
    int batch_size = 32;
    int timeout_ms = 30000;
    int max_retries = 3;
};

// OpenAI-compatible embeddings endpoint: POST {"model", "input": [...]},
// response {"data": [{"embedding": [...], "index": n}, ...]}. Requests are
// split into batches of batch_size. A vector of the wrong length raises
// protocol_error; transport failures retry up to max_retries then raise
// transport_error.
std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(const EmbeddingEndpointConfig& cfg);

// In-memory cache keyed by (model_name, text hash); thread-safe.
class CachingEmbeddingProvider : public EmbeddingProvider {
public:
    explicit CachingEmbeddingProvider(std::unique_ptr<EmbeddingProvider> inner);

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string model_name() const override { return inner_->model_name(); }
    size_t dimension() const override { return inner_->dimension(); }

    size_t hits() const { return hits_; }
    size_t misses() const { return misses_; }

private:
    std::unique_ptr<EmbeddingProvider> inner_;
    std::unordered_map<std::string, std::vector<double>> cache_;
    std::mutex mutex_;
    size_t hits_ = 0;
    size_t misses_ = 0;
};

// Re-scores the first min(pool, |candidates|) BM25 entries by cosine
// similarity between the question embedding and each passage embedding, and
// returns the top-k with the (score desc, id asc) tie rule. Requires
// candidates.producer == "bm25" and pool >= k.
RankedList rerank(const Corpus& corpus, const RankedList& candidates, const std::string& question,
                  EmbeddingProvider& provider, int pool, int k);

} // namespace rageval
