#include "rageval/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "httplib.h"

#include "rageval/errors.hpp"
#include "rageval/hash.hpp"
#include "rageval/jsonl.hpp"

namespace rageval {

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw validation_error("cosine dimension mismatch: " + std::to_string(u.size()) +
                               " vs " + std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw validation_error("cosine of a zero vector is undefined");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

// Splits http(s)://host[:port] from the request path.
struct ParsedEndpoint {
    std::string base;
    std::string path;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw config_error("endpoint must start with http:// or https://: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(EmbeddingEndpointConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty()) throw config_error("embedding endpoint not set");
        if (cfg_.batch_size < 1) throw config_error("embedding batch_size must be >= 1");
    }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (size_t start = 0; start < texts.size();
             start += static_cast<size_t>(cfg_.batch_size)) {
            size_t end = std::min(texts.size(), start + static_cast<size_t>(cfg_.batch_size));
            auto batch = embed_batch({texts.begin() + static_cast<long>(start),
                                      texts.begin() + static_cast<long>(end)});
            for (auto& v : batch) out.push_back(std::move(v));
        }
        return out;
    }

    std::string model_name() const override { return cfg_.model_name; }
    size_t dimension() const override { return dimension_; }

private:
    EmbeddingEndpointConfig cfg_;
    size_t dimension_ = 0;

    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) {
        auto [base, path] = split_endpoint(cfg_.endpoint);
        json body = {{"model", cfg_.model_name}, {"input", texts}};
        std::string payload = body.dump();

        httplib::Result res;
        int attempts = 0;
        for (; attempts < std::max(1, cfg_.max_retries); ++attempts) {
            httplib::Client client(base);
            client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
            client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
            res = client.Post(path, payload, "application/json");
            if (res && res->status < 500) break;
        }
        if (!res || res->status >= 500)
            throw transport_error("embedding endpoint unreachable after " +
                                  std::to_string(attempts) + " attempts: " + cfg_.endpoint);
        if (res->status != 200)
            throw protocol_error("embedding endpoint returned HTTP " +
                                 std::to_string(res->status));

        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("data") || !reply["data"].is_array() ||
            reply["data"].size() != texts.size())
            throw protocol_error("malformed embedding response");
        std::vector<std::vector<double>> vectors(texts.size());
        for (const auto& item : reply["data"]) {
            if (!item.contains("embedding") || !item["embedding"].is_array())
                throw protocol_error("malformed embedding response entry");
            size_t index = item.value("index", vectors.size());
            if (index >= vectors.size()) throw protocol_error("embedding index out of range");
            vectors[index] = item["embedding"].get<std::vector<double>>();
        }
        for (const auto& v : vectors) {
            if (dimension_ == 0 && cfg_.dimension == 0) dimension_ = v.size();
            size_t expected = cfg_.dimension ? cfg_.dimension : dimension_;
            if (v.size() != expected)
                throw protocol_error("embedding dimension " + std::to_string(v.size()) +
                                     ", expected " + std::to_string(expected));
        }
        if (dimension_ == 0) dimension_ = cfg_.dimension;
        return vectors;
    }
};

} // namespace

std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(
    const EmbeddingEndpointConfig& cfg) {
    return std::make_unique<HttpEmbeddingProvider>(cfg);
}

CachingEmbeddingProvider::CachingEmbeddingProvider(std::unique_ptr<EmbeddingProvider> inner)
    : inner_(std::move(inner)) {}

std::vector<std::vector<double>> CachingEmbeddingProvider::embed(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out(texts.size());
    std::vector<std::string> keys(texts.size());
    std::vector<size_t> missing;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (size_t i = 0; i < texts.size(); ++i) {
            keys[i] = stable_hash128_hex(inner_->model_name(), texts[i]);
            auto it = cache_.find(keys[i]);
            if (it != cache_.end()) {
                out[i] = it->second;
                ++hits_;
            } else {
                missing.push_back(i);
                ++misses_;
            }
        }
    }
    if (!missing.empty()) {
        std::vector<std::string> to_fetch;
        to_fetch.reserve(missing.size());
        for (size_t i : missing) to_fetch.push_back(texts[i]);
        auto fetched = inner_->embed(to_fetch);
        std::lock_guard<std::mutex> lock(mutex_);
        for (size_t j = 0; j < missing.size(); ++j) {
            out[missing[j]] = fetched[j];
            cache_[keys[missing[j]]] = std::move(fetched[j]);
        }
    }
    return out;
}

RankedList rerank(const Corpus& corpus, const RankedList& candidates, const std::string& question,
                  EmbeddingProvider& provider, int pool, int k) {
    if (candidates.producer != "bm25")
        throw validation_error("rerank expects bm25 candidates, got " + candidates.producer);
    if (pool < k) throw validation_error("rerank pool must be >= k");
    if (k < 1) throw validation_error("rerank requires k >= 1");

    size_t take = std::min(candidates.entries.size(), static_cast<size_t>(pool));
    std::vector<std::string> texts;
    texts.reserve(take + 1);
    texts.push_back(question);
    for (size_t i = 0; i < take; ++i)
        texts.push_back(corpus.at(candidates.entries[i].passage_id).text);

    auto vectors = provider.embed(texts);
    std::vector<RankedEntry> entries;
    entries.reserve(take);
    for (size_t i = 0; i < take; ++i)
        entries.push_back({candidates.entries[i].passage_id, cosine(vectors[0], vectors[i + 1])});
    std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.passage_id < b.passage_id;
    });
    if (entries.size() > static_cast<size_t>(k)) entries.resize(static_cast<size_t>(k));

    RankedList result;
    result.query_id = candidates.query_id;
    result.entries = std::move(entries);
    result.producer = "rerank";
    return result;
}

} // namespace rageval
