#include "rageval/runconfig.hpp"

#include <set>

#include <yaml-cpp/yaml.h>

#include "rageval/errors.hpp"
#include "rageval/hash.hpp"

namespace rageval {

namespace {

const std::vector<int> kDefaultKGrid = {5, 10, 25, 50, 75, 100};
const std::vector<OrderingKind> kAllOrderings = {OrderingKind::standard, OrderingKind::reverse,
                                                 OrderingKind::random};

template <typename T>
T as_or(const YAML::Node& node, const char* key, T fallback) {
    if (!node[key]) return fallback;
    return node[key].as<T>();
}

std::string require_string(const YAML::Node& node, const char* key, const std::string& where) {
    if (!node[key]) throw config_error(where + ": missing required key \"" + key + "\"");
    return node[key].as<std::string>();
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!node.IsMap()) return;
    for (const auto& entry : node) {
        std::string key = entry.first.as<std::string>();
        if (!allowed.count(key)) throw config_error(where + ": unknown key \"" + key + "\"");
    }
}

ConditionTemplate parse_condition(const YAML::Node& node, size_t index) {
    std::string where = "conditions[" + std::to_string(index) + "]";
    check_keys(node, {"mode", "k_grid", "orderings", "positions", "k"}, where);
    ConditionTemplate tmpl;
    tmpl.mode = context_mode_from_string(require_string(node, "mode", where));
    if (node["k_grid"]) tmpl.k_grid = node["k_grid"].as<std::vector<int>>();
    if (node["orderings"])
        for (const auto& o : node["orderings"])
            tmpl.orderings.push_back(ordering_from_string(o.as<std::string>()));
    if (node["positions"]) tmpl.positions = node["positions"].as<std::vector<int>>();
    tmpl.k = as_or<int>(node, "k", 0);

    switch (tmpl.mode) {
        case ContextMode::retrieved:
            if (tmpl.k_grid.empty()) tmpl.k_grid = kDefaultKGrid;
            if (tmpl.orderings.empty()) tmpl.orderings = kAllOrderings;
            break;
        case ContextMode::positional_sweep:
            if (tmpl.k < 1) throw config_error(where + ": sweep requires k >= 1");
            if (tmpl.positions.empty())
                for (int i = 1; i <= tmpl.k; ++i) tmpl.positions.push_back(i);
            for (int i : tmpl.positions)
                if (i < 1 || i > tmpl.k)
                    throw config_error(where + ": sweep position " + std::to_string(i) +
                                       " outside 1.." + std::to_string(tmpl.k));
            break;
        case ContextMode::oracle_bm25_standard:
        case ContextMode::oracle_bm25_reverse:
            if (tmpl.k_grid.empty()) tmpl.k_grid = kDefaultKGrid;
            break;
        case ContextMode::closed_book:
        case ContextMode::oracle_sents:
        case ContextMode::oracle_passages:
            break;
    }
    for (int k : tmpl.k_grid)
        if (k < 1) throw config_error(where + ": k grid values must be positive");
    return tmpl;
}

} // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw config_error("cannot parse " + path.string() + ": " + e.what());
    }
    try {
        check_keys(root,
                   {"corpus", "dataset", "retriever", "rerank_pool", "bm25", "embedding",
                    "conditions", "prompt", "distractor_policy", "reader", "seed", "out",
                    "cache", "max_in_flight"},
                   path.string());
        ExperimentConfig config;
        config.corpus_path = require_string(root, "corpus", path.string());
        config.dataset_path = require_string(root, "dataset", path.string());
        config.retriever = as_or<std::string>(root, "retriever", "bm25");
        if (config.retriever != "bm25" && config.retriever != "bm25_rerank")
            throw config_error("retriever must be bm25 or bm25_rerank, got \"" +
                               config.retriever + "\"");
        config.rerank_pool = as_or<int>(root, "rerank_pool", 100);
        if (config.rerank_pool < 1) throw config_error("rerank_pool must be >= 1");

        if (root["bm25"]) {
            check_keys(root["bm25"], {"k1", "b"}, "bm25");
            config.bm25.k1 = as_or<double>(root["bm25"], "k1", 1.2);
            config.bm25.b = as_or<double>(root["bm25"], "b", 0.75);
        }
        if (root["embedding"]) {
            const auto& node = root["embedding"];
            check_keys(node, {"endpoint", "model", "dimension", "batch_size", "timeout_ms",
                              "max_retries"},
                       "embedding");
            config.embedding.endpoint = as_or<std::string>(node, "endpoint", "");
            config.embedding.model_name = as_or<std::string>(node, "model", "");
            config.embedding.dimension = as_or<size_t>(node, "dimension", 0);
            config.embedding.batch_size = as_or<int>(node, "batch_size", 32);
            config.embedding.timeout_ms = as_or<int>(node, "timeout_ms", 30000);
            config.embedding.max_retries = as_or<int>(node, "max_retries", 3);
        }
        if (root["conditions"]) {
            size_t index = 0;
            for (const auto& node : root["conditions"])
                config.conditions.push_back(parse_condition(node, index++));
        } else {
            ConditionTemplate tmpl;
            tmpl.mode = ContextMode::retrieved;
            tmpl.k_grid = kDefaultKGrid;
            tmpl.orderings = kAllOrderings;
            config.conditions.push_back(tmpl);
        }
        if (root["prompt"]) {
            const auto& node = root["prompt"];
            check_keys(node, {"instruction", "question_prefix", "answer_prefix", "token_budget"},
                       "prompt");
            config.prompt.instruction =
                as_or<std::string>(node, "instruction", config.prompt.instruction);
            config.prompt.question_prefix =
                as_or<std::string>(node, "question_prefix", config.prompt.question_prefix);
            config.prompt.answer_prefix =
                as_or<std::string>(node, "answer_prefix", config.prompt.answer_prefix);
            config.prompt.token_budget = as_or<size_t>(node, "token_budget", 0);
        }
        config.distractor_policy =
            distractor_policy_from_string(as_or<std::string>(root, "distractor_policy", "random"));
        if (root["reader"]) {
            const auto& node = root["reader"];
            check_keys(node,
                       {"backend", "model", "temperature", "max_output_tokens", "endpoint",
                        "api_key_env", "timeout_ms", "max_retries", "base_accuracy",
                        "position_slope", "noise_seed"},
                       "reader");
            config.reader.backend = as_or<std::string>(node, "backend", "mock_containment");
            config.reader.model_name = as_or<std::string>(node, "model", "mock");
            config.reader.temperature = as_or<double>(node, "temperature", 0.0);
            config.reader.max_output_tokens = as_or<int>(node, "max_output_tokens", 64);
            config.reader.endpoint = as_or<std::string>(node, "endpoint", "");
            config.reader.api_key_env =
                as_or<std::string>(node, "api_key_env", "RAGEVAL_API_KEY");
            config.reader.timeout_ms = as_or<int>(node, "timeout_ms", 30000);
            config.reader.max_retries = as_or<int>(node, "max_retries", 3);
            config.reader.base_accuracy = as_or<double>(node, "base_accuracy", 0.9);
            config.reader.position_slope = as_or<double>(node, "position_slope", 0.05);
            config.reader.noise_seed = as_or<uint64_t>(node, "noise_seed", 0);
        }
        config.seed = as_or<uint64_t>(root, "seed", 0);
        config.out_dir = as_or<std::string>(root, "out", "run");
        config.cache_path = as_or<std::string>(root, "cache", "");
        config.max_in_flight = as_or<int>(root, "max_in_flight", 1);
        if (config.max_in_flight < 1) throw config_error("max_in_flight must be >= 1");
        return config;
    } catch (const YAML::Exception& e) {
        throw config_error("bad value in " + path.string() + ": " + e.what());
    }
}

std::string effective_config_yaml(const ExperimentConfig& config) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "corpus" << YAML::Value << config.corpus_path;
    out << YAML::Key << "dataset" << YAML::Value << config.dataset_path;
    out << YAML::Key << "retriever" << YAML::Value << config.retriever;
    out << YAML::Key << "rerank_pool" << YAML::Value << config.rerank_pool;
    out << YAML::Key << "bm25" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "k1" << YAML::Value << config.bm25.k1;
    out << YAML::Key << "b" << YAML::Value << config.bm25.b;
    out << YAML::EndMap;
    out << YAML::Key << "embedding" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "endpoint" << YAML::Value << config.embedding.endpoint;
    out << YAML::Key << "model" << YAML::Value << config.embedding.model_name;
    out << YAML::Key << "dimension" << YAML::Value << config.embedding.dimension;
    out << YAML::Key << "batch_size" << YAML::Value << config.embedding.batch_size;
    out << YAML::Key << "timeout_ms" << YAML::Value << config.embedding.timeout_ms;
    out << YAML::Key << "max_retries" << YAML::Value << config.embedding.max_retries;
    out << YAML::EndMap;
    out << YAML::Key << "conditions" << YAML::Value << YAML::BeginSeq;
    for (const auto& tmpl : config.conditions) {
        out << YAML::BeginMap;
        out << YAML::Key << "mode" << YAML::Value << to_string(tmpl.mode);
        if (!tmpl.k_grid.empty())
            out << YAML::Key << "k_grid" << YAML::Value << YAML::Flow << tmpl.k_grid;
        if (!tmpl.orderings.empty()) {
            std::vector<std::string> names;
            for (auto o : tmpl.orderings) names.push_back(to_string(o));
            out << YAML::Key << "orderings" << YAML::Value << YAML::Flow << names;
        }
        if (tmpl.k > 0) out << YAML::Key << "k" << YAML::Value << tmpl.k;
        if (!tmpl.positions.empty())
            out << YAML::Key << "positions" << YAML::Value << YAML::Flow << tmpl.positions;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "prompt" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "instruction" << YAML::Value << config.prompt.instruction;
    out << YAML::Key << "question_prefix" << YAML::Value << config.prompt.question_prefix;
    out << YAML::Key << "answer_prefix" << YAML::Value << config.prompt.answer_prefix;
    out << YAML::Key << "token_budget" << YAML::Value << config.prompt.token_budget;
    out << YAML::EndMap;
    out << YAML::Key << "distractor_policy" << YAML::Value
        << to_string(config.distractor_policy);
    out << YAML::Key << "reader" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "backend" << YAML::Value << config.reader.backend;
    out << YAML::Key << "model" << YAML::Value << config.reader.model_name;
    out << YAML::Key << "temperature" << YAML::Value << config.reader.temperature;
    out << YAML::Key << "max_output_tokens" << YAML::Value << config.reader.max_output_tokens;
    out << YAML::Key << "endpoint" << YAML::Value << config.reader.endpoint;
    out << YAML::Key << "api_key_env" << YAML::Value << config.reader.api_key_env;
    out << YAML::Key << "timeout_ms" << YAML::Value << config.reader.timeout_ms;
    out << YAML::Key << "max_retries" << YAML::Value << config.reader.max_retries;
    out << YAML::Key << "base_accuracy" << YAML::Value << config.reader.base_accuracy;
    out << YAML::Key << "position_slope" << YAML::Value << config.reader.position_slope;
    out << YAML::Key << "noise_seed" << YAML::Value << config.reader.noise_seed;
    out << YAML::EndMap;
    out << YAML::Key << "seed" << YAML::Value << config.seed;
    out << YAML::Key << "out" << YAML::Value << config.out_dir;
    out << YAML::Key << "cache" << YAML::Value << config.cache_path;
    out << YAML::Key << "max_in_flight" << YAML::Value << config.max_in_flight;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
    // Only settings that change record contents participate; out_dir,
    // cache_path and the operational knobs (timeouts, retries, concurrency)
    // stay out so a moved or re-tuned run still resumes.
    stable_hasher h;
    h.feed(config.corpus_path).feed(config.dataset_path).feed(config.retriever);
    h.feed(config.rerank_pool);
    h.feed(config.bm25.k1).feed(config.bm25.b);
    h.feed(config.embedding.endpoint).feed(config.embedding.model_name);
    h.feed(static_cast<uint64_t>(config.embedding.dimension));
    for (const auto& tmpl : config.conditions) {
        h.feed(to_string(tmpl.mode));
        for (int k : tmpl.k_grid) h.feed(k);
        for (auto o : tmpl.orderings) h.feed(to_string(o));
        for (int i : tmpl.positions) h.feed(i);
        h.feed(tmpl.k);
    }
    h.feed(config.prompt.instruction).feed(config.prompt.question_prefix);
    h.feed(config.prompt.answer_prefix).feed(static_cast<uint64_t>(config.prompt.token_budget));
    h.feed(to_string(config.distractor_policy));
    h.feed(config.reader.backend).feed(config.reader.model_name);
    h.feed(config.reader.temperature).feed(config.reader.max_output_tokens);
    h.feed(config.reader.endpoint);
    h.feed(config.reader.base_accuracy).feed(config.reader.position_slope);
    h.feed(config.reader.noise_seed);
    h.feed(config.seed);
    return hex64(h.digest());
}

std::vector<ContextSpec> expand_conditions(const ExperimentConfig& config) {
    std::vector<ContextSpec> specs;
    std::set<std::string> seen;
    auto push = [&](ContextSpec spec) {
        if (seen.insert(spec.label()).second) specs.push_back(spec);
    };
    for (const auto& tmpl : config.conditions) {
        switch (tmpl.mode) {
            case ContextMode::retrieved:
                for (int k : tmpl.k_grid)
                    for (auto ordering : tmpl.orderings)
                        push({ContextMode::retrieved, k, ordering, 0});
                break;
            case ContextMode::positional_sweep:
                for (int i : tmpl.positions)
                    push({ContextMode::positional_sweep, tmpl.k, OrderingKind::standard, i});
                break;
            case ContextMode::closed_book:
                push({ContextMode::closed_book, 0, OrderingKind::standard, 0});
                break;
            case ContextMode::oracle_sents:
                push({ContextMode::oracle_sents, 0, OrderingKind::standard, 0});
                break;
            case ContextMode::oracle_passages:
                if (tmpl.k_grid.empty()) {
                    push({ContextMode::oracle_passages, 0, OrderingKind::standard, 0});
                } else {
                    for (int k : tmpl.k_grid)
                        push({ContextMode::oracle_passages, k, OrderingKind::standard, 0});
                }
                break;
            case ContextMode::oracle_bm25_standard:
            case ContextMode::oracle_bm25_reverse:
                for (int k : tmpl.k_grid)
                    push({tmpl.mode, k, OrderingKind::standard, 0});
                break;
        }
    }
    if (specs.empty()) throw config_error("condition templates expand to nothing");
    return specs;
}

} // namespace rageval
