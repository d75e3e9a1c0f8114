#include "rageval/reader.hpp"

#include <algorithm>
#include <cstdlib>

#include "httplib.h"

#include "rageval/errors.hpp"
#include "rageval/hash.hpp"
#include "rageval/jsonl.hpp"

namespace rageval {

AnswerCache::AnswerCache(std::filesystem::path journal_path)
    : journal_path_(std::move(journal_path)) {
    if (!std::filesystem::exists(journal_path_)) return;
    for_each_jsonl(journal_path_, [&](const json& record, size_t) {
        if (record.contains("key") && record.contains("answer"))
            entries_[record["key"].get<std::string>()] = record["answer"].get<std::string>();
    });
}

std::string AnswerCache::cache_key(const std::string& model, double temperature,
                                   int max_output_tokens, const std::string& prompt) {
    return stable_hash128_hex(model, temperature, max_output_tokens, prompt);
}

std::optional<std::string> AnswerCache::lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void AnswerCache::store(const std::string& key, const std::string& model,
                        const std::string& prompt, const std::string& answer) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!entries_.emplace(key, answer).second) return;
    jsonl_writer out(journal_path_, /*append=*/true);
    out.write({{"key", key}, {"model", model}, {"prompt", prompt}, {"answer", answer}});
}

size_t AnswerCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

namespace {

bool contains_case_insensitive(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return false;
    auto fold = [](unsigned char c) {
        return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    };
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [&](char a, char b) { return fold(static_cast<unsigned char>(a)) ==
                                                       fold(static_cast<unsigned char>(b)); });
    return it != haystack.end();
}

// Answers with the first gold string present in the context, otherwise a
// fixed wrong answer; makes end-to-end scores a pure function of composition.
class MockContainmentReader : public Reader {
public:
    explicit MockContainmentReader(std::string model) : model_(std::move(model)) {}

    GenerationResult generate(const GenerationRequest& req) override {
        for (const auto& gold : req.gold_answers)
            if (contains_case_insensitive(req.context_text, gold)) return {gold, false};
        return {"unknown", false};
    }

    std::string model_name() const override { return model_; }

private:
    std::string model_;
};

// Plants accuracy(i) = clamp(base - slope * (i - 1)) at gold position i; the
// draw is a pure function of (noise_seed, query_id, condition_label).
class MockPositionalReader : public Reader {
public:
    MockPositionalReader(std::string model, double base, double slope, uint64_t noise_seed)
        : model_(std::move(model)), base_(base), slope_(slope), noise_seed_(noise_seed) {}

    GenerationResult generate(const GenerationRequest& req) override {
        int position = std::max(1, req.sweep_position);
        double p = base_ - slope_ * static_cast<double>(position - 1);
        p = std::clamp(p, 0.0, 1.0);
        splitmix64 rng(stable_hash(noise_seed_, req.query_id, req.condition_label));
        bool correct = rng.next_unit() < p;
        if (correct && !req.gold_answers.empty()) return {req.gold_answers.front(), false};
        return {"incorrect", false};
    }

    std::string model_name() const override { return model_; }

private:
    std::string model_;
    double base_;
    double slope_;
    uint64_t noise_seed_;
};

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

class HttpChatReader : public Reader {
public:
    explicit HttpChatReader(ReaderConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty()) throw config_error("http_chat backend requires an endpoint");
        const char* key = nullptr;
        if (!cfg_.api_key_env.empty()) key = std::getenv(cfg_.api_key_env.c_str());
        if (!key) key = std::getenv("OPENAI_API_KEY");
        if (key) api_key_ = key;
    }

    GenerationResult generate(const GenerationRequest& req) override {
        auto [base, path] = split_endpoint(cfg_.endpoint);
        json body = {
            {"model", cfg_.model_name},
            {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", cfg_.temperature},
            {"max_tokens", cfg_.max_output_tokens},
        };
        std::string payload = body.dump();

        httplib::Result res;
        int attempts = 0;
        for (; attempts < std::max(1, cfg_.max_retries); ++attempts) {
            httplib::Client client(base);
            client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
            client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
            if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);
            res = client.Post(path, payload, "application/json");
            if (res && res->status < 500) break;
        }
        if (!res || res->status >= 500)
            throw transport_error("chat endpoint failed after " + std::to_string(attempts) +
                                  " attempts: " + cfg_.endpoint);
        if (res->status != 200)
            throw protocol_error("chat endpoint returned HTTP " + std::to_string(res->status));

        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
            reply["choices"].empty())
            throw protocol_error("malformed chat response");
        const json& message = reply["choices"][0];
        if (!message.contains("message") || !message["message"].contains("content") ||
            !message["message"]["content"].is_string())
            throw protocol_error("malformed chat response message");
        // Empty completions are legitimate output and get scored as-is.
        return {message["message"]["content"].get<std::string>(), false};
    }

    std::string model_name() const override { return cfg_.model_name; }

private:
    ReaderConfig cfg_;
    std::string api_key_;
};

class CachingReader : public Reader {
public:
    CachingReader(std::unique_ptr<Reader> inner, std::shared_ptr<AnswerCache> cache,
                  double temperature, int max_output_tokens)
        : inner_(std::move(inner)), cache_(std::move(cache)), temperature_(temperature),
          max_output_tokens_(max_output_tokens) {}

    GenerationResult generate(const GenerationRequest& req) override {
        std::string key = AnswerCache::cache_key(inner_->model_name(), temperature_,
                                                 max_output_tokens_, req.prompt);
        if (auto hit = cache_->lookup(key)) return {*hit, true};
        GenerationResult result = inner_->generate(req);
        cache_->store(key, inner_->model_name(), req.prompt, result.answer);
        return result;
    }

    std::string model_name() const override { return inner_->model_name(); }

private:
    std::unique_ptr<Reader> inner_;
    std::shared_ptr<AnswerCache> cache_;
    double temperature_;
    int max_output_tokens_;
};

} // namespace

std::unique_ptr<Reader> make_reader(const ReaderConfig& config) {
    if (config.temperature < 0) throw config_error("temperature must be >= 0");
    if (config.max_output_tokens < 1) throw config_error("max_output_tokens must be >= 1");
    if (config.backend == "mock_containment")
        return std::make_unique<MockContainmentReader>(config.model_name);
    if (config.backend == "mock_positional")
        return std::make_unique<MockPositionalReader>(config.model_name, config.base_accuracy,
                                                      config.position_slope, config.noise_seed);
    if (config.backend == "http_chat") return std::make_unique<HttpChatReader>(config);
    throw config_error("unknown reader backend \"" + config.backend + "\"");
}

std::unique_ptr<Reader> make_caching_reader(std::unique_ptr<Reader> inner,
                                            std::shared_ptr<AnswerCache> cache,
                                            double temperature, int max_output_tokens) {
    if (!cache) return inner;
    return std::make_unique<CachingReader>(std::move(inner), std::move(cache), temperature,
                                           max_output_tokens);
}

} // namespace rageval
