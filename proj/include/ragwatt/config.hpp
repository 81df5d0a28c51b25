#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragwatt/energymeter.hpp"
#include "ragwatt/errors.hpp"

namespace ragwatt {

struct ModelConfig {
    std::string model_id;
    std::string endpoint;
    int context_window = 2048;
    int reserved_output = 256;
    long long param_count = 0;  // model size in parameters, used by the RQ3 analysis
};

struct DatasetConfig {
    std::string corpus_path;
    std::string format = "canonical";
    double pool_fraction = 0.9;
    uint64_t seed = 42;
    int max_queries = 0;  // 0 = all
    // provided-split mode: both set -> corpus_path/pool_fraction unused
    std::string pool_path;
    std::string queries_path;
};

struct RetrievalSettings {
    std::string provider = "hash";  // hash | remote
    std::string endpoint;
    std::string model = "all-MiniLM-L6-v2";
    int dim = 384;
    int k = 8;
    int max_examples = 3;
    std::string index_path;  // optional prebuilt index
    int batch_size = 32;
    int in_flight = 1;
};

struct BackendSettings {
    std::string kind = "mock";  // mock | http
    int mock_base_delay_ms = 5;
    int mock_per_token_delay_ms = 1;
    std::string mock_echo_policy = "first_example_code";  // or fixed_stub
};

struct DecodeSettings {
    int max_new_tokens = 256;
    double temperature = 0.0;
    uint64_t seed = 0;
    int timeout_s = 60;
};

struct ExperimentConfig {
    std::vector<ModelConfig> models;
    DatasetConfig dataset;
    RetrievalSettings retrieval;
    BackendSettings backend;
    DecodeSettings decode;
    int repetitions = 3;
    int warmup = 1;
    uint64_t seed = 42;
    MeterConfig meter;

    void validate() const;  // ConfigError with a field path
    nlohmann::json to_json() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

/// Hash of the normalized config; resume refuses when it changed.
std::string config_hash(const ExperimentConfig& config);

}  // namespace ragwatt
