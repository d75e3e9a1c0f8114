#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rageval {

struct GenerationRequest {
    std::string query_id;
    std::string condition_label;
    std::string prompt;
    std::string context_text; // concatenated passage texts, used by mock backends
    std::vector<std::string> gold_answers;
    int sweep_position = 0; // 1-indexed gold position when the condition is a sweep point
};

struct GenerationResult {
    std::string answer;
    bool cached = false;
};

struct ReaderConfig {
    std::string backend = "mock_containment"; // http_chat | mock_containment | mock_positional
    std::string model_name = "mock";
    double temperature = 0.0;
    int max_output_tokens = 64;

    // http_chat
    std::string endpoint;     // e.g. http://host:port/v1/chat/completions
    std::string api_key_env = "RAGEVAL_API_KEY"; // falls back to OPENAI_API_KEY
    int timeout_ms = 30000;
    int max_retries = 3;

    // mock_positional
    double base_accuracy = 0.9;
    double position_slope = 0.05;
    uint64_t noise_seed = 0;
};

class Reader {
public:
    virtual ~Reader() = default;
    virtual GenerationResult generate(const GenerationRequest& req) = 0;
    virtual std::string model_name() const = 0;
};

// Keyed on (model, temperature, max_output_tokens, prompt); identical requests
// never hit the backend twice. The journal is append-only jsonl so a killed
// run loses at most the line being written.
class AnswerCache {
public:
    explicit AnswerCache(std::filesystem::path journal_path);

    static std::string cache_key(const std::string& model, double temperature,
                                 int max_output_tokens, const std::string& prompt);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, const std::string& model, const std::string& prompt,
               const std::string& answer);
    size_t size() const;
    const std::filesystem::path& path() const { return journal_path_; }

private:
    std::filesystem::path journal_path_;
    std::unordered_map<std::string, std::string> entries_;
    mutable std::mutex mutex_;
};

std::unique_ptr<Reader> make_reader(const ReaderConfig& config);

// Wraps any reader with the on-disk cache; cache == nullptr passes through.
std::unique_ptr<Reader> make_caching_reader(std::unique_ptr<Reader> inner,
                                            std::shared_ptr<AnswerCache> cache,
                                            double temperature, int max_output_tokens);

} // namespace rageval
