#include "ragwatt/config.hpp"

#include <algorithm>

#include "ragwatt/hashing.hpp"
#include "ragwatt/toml.hpp"

namespace ragwatt {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const std::string& path, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

template <class T>
T required(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key + " is required");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

MeterConfig meter_from_json(const json& j, const std::string& path) {
    MeterConfig m;
    m.kind = field<std::string>(j, path, "kind", m.kind);
    m.sampling_interval_ms = field<int>(j, path, "sampling_interval_ms", m.sampling_interval_ms);
    m.sim_max_range_uj = field<uint64_t>(j, path, "sim_max_range_uj", m.sim_max_range_uj);
    m.powercap_root = field<std::string>(j, path, "powercap_root", m.powercap_root);
    if (j.contains("power_watts")) {
        if (!j["power_watts"].is_object()) throw ConfigError(path + ".power_watts: wrong type");
        for (const auto& [name, w] : j["power_watts"].items()) m.power_watts[name] = w.get<double>();
    }
    if (j.contains("children")) {
        size_t i = 0;
        for (const auto& child : j["children"])
            m.children.push_back(meter_from_json(child, path + ".children[" + std::to_string(i++) + "]"));
    }
    return m;
}

json meter_to_json(const MeterConfig& m) {
    json j{{"kind", m.kind},
           {"sampling_interval_ms", m.sampling_interval_ms},
           {"sim_max_range_uj", m.sim_max_range_uj},
           {"powercap_root", m.powercap_root}};
    json watts = json::object();
    for (const auto& [name, w] : m.power_watts) watts[name] = w;
    j["power_watts"] = watts;
    json children = json::array();
    for (const auto& child : m.children) children.push_back(meter_to_json(child));
    j["children"] = children;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (models.empty()) throw ConfigError("models: at least one model is required");
    std::vector<std::string> ids;
    for (size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        const std::string path = "models[" + std::to_string(i) + "]";
        if (m.model_id.empty()) throw ConfigError(path + ".model_id is required");
        if (m.param_count <= 0) throw ConfigError(path + ".param_count must be positive");
        if (m.context_window <= 0) throw ConfigError(path + ".context_window must be positive");
        if (m.reserved_output <= 0 || m.reserved_output >= m.context_window)
            throw ConfigError(path + ".reserved_output must be in (0, context_window)");
        ids.push_back(m.model_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw ConfigError("models: model ids must be unique");

    const bool provided = !dataset.pool_path.empty() || !dataset.queries_path.empty();
    if (provided) {
        if (dataset.pool_path.empty() || dataset.queries_path.empty())
            throw ConfigError("dataset: pool and queries must both be set for a provided split");
    } else {
        if (dataset.corpus_path.empty()) throw ConfigError("dataset.corpus is required");
        if (!(dataset.pool_fraction > 0.0 && dataset.pool_fraction < 1.0))
            throw ConfigError("dataset.pool_fraction must be in (0,1)");
    }
    if (dataset.max_queries < 0) throw ConfigError("dataset.max_queries must be >= 0");

    if (retrieval.provider != "hash" && retrieval.provider != "remote")
        throw ConfigError("retrieval.provider must be hash or remote");
    if (retrieval.provider == "remote" && retrieval.endpoint.empty())
        throw ConfigError("retrieval.endpoint is required for the remote provider");
    if (retrieval.dim < 8) throw ConfigError("retrieval.dim must be >= 8");
    if (retrieval.k < 1) throw ConfigError("retrieval.k must be >= 1");
    if (retrieval.max_examples < 1) throw ConfigError("retrieval.max_examples must be >= 1");

    if (backend.kind != "mock" && backend.kind != "http")
        throw ConfigError("backend.kind must be mock or http");
    if (backend.kind == "http")
        for (size_t i = 0; i < models.size(); ++i)
            if (models[i].endpoint.empty())
                throw ConfigError("models[" + std::to_string(i) + "].endpoint is required for http backend");
    if (backend.mock_echo_policy != "first_example_code" && backend.mock_echo_policy != "fixed_stub")
        throw ConfigError("backend.mock.echo_policy must be first_example_code or fixed_stub");

    if (decode.max_new_tokens < 1) throw ConfigError("decode.max_new_tokens must be >= 1");
    if (decode.temperature < 0) throw ConfigError("decode.temperature must be >= 0");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (warmup < 0) throw ConfigError("warmup must be >= 0");
    for (const auto& m : models)
        if (decode.max_new_tokens > m.reserved_output)
            throw ConfigError("decode.max_new_tokens exceeds reserved_output for model " + m.model_id);
}

json ExperimentConfig::to_json() const {
    json models_j = json::array();
    for (const auto& m : models)
        models_j.push_back(json{{"model_id", m.model_id},
                                {"endpoint", m.endpoint},
                                {"context_window", m.context_window},
                                {"reserved_output", m.reserved_output},
                                {"param_count", m.param_count}});
    return json{
        {"models", models_j},
        {"dataset",
         {{"corpus", dataset.corpus_path},
          {"format", dataset.format},
          {"pool_fraction", dataset.pool_fraction},
          {"seed", dataset.seed},
          {"max_queries", dataset.max_queries},
          {"pool", dataset.pool_path},
          {"queries", dataset.queries_path}}},
        {"retrieval",
         {{"provider", retrieval.provider},
          {"endpoint", retrieval.endpoint},
          {"model", retrieval.model},
          {"dim", retrieval.dim},
          {"k", retrieval.k},
          {"max_examples", retrieval.max_examples},
          {"index_path", retrieval.index_path},
          {"batch_size", retrieval.batch_size},
          {"in_flight", retrieval.in_flight}}},
        {"backend",
         {{"kind", backend.kind},
          {"mock",
           {{"base_delay_ms", backend.mock_base_delay_ms},
            {"per_token_delay_ms", backend.mock_per_token_delay_ms},
            {"echo_policy", backend.mock_echo_policy}}}}},
        {"decode",
         {{"max_new_tokens", decode.max_new_tokens},
          {"temperature", decode.temperature},
          {"seed", decode.seed},
          {"timeout_s", decode.timeout_s}}},
        {"repetitions", repetitions},
        {"warmup", warmup},
        {"seed", seed},
        {"meter", meter_to_json(meter)}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("models")) {
        size_t i = 0;
        for (const auto& mj : j["models"]) {
            const std::string path = "models[" + std::to_string(i++) + "]";
            ModelConfig m;
            m.model_id = required<std::string>(mj, path, "model_id");
            m.endpoint = field<std::string>(mj, path, "endpoint", "");
            m.context_window = field<int>(mj, path, "context_window", m.context_window);
            m.reserved_output = field<int>(mj, path, "reserved_output", m.reserved_output);
            m.param_count = required<long long>(mj, path, "param_count");
            c.models.push_back(std::move(m));
        }
    }
    if (j.contains("dataset")) {
        const auto& dj = j["dataset"];
        c.dataset.corpus_path = field<std::string>(dj, "dataset", "corpus", "");
        c.dataset.format = field<std::string>(dj, "dataset", "format", c.dataset.format);
        c.dataset.pool_fraction = field<double>(dj, "dataset", "pool_fraction", c.dataset.pool_fraction);
        c.dataset.seed = field<uint64_t>(dj, "dataset", "seed", c.dataset.seed);
        c.dataset.max_queries = field<int>(dj, "dataset", "max_queries", c.dataset.max_queries);
        c.dataset.pool_path = field<std::string>(dj, "dataset", "pool", "");
        c.dataset.queries_path = field<std::string>(dj, "dataset", "queries", "");
    }
    if (j.contains("retrieval")) {
        const auto& rj = j["retrieval"];
        c.retrieval.provider = field<std::string>(rj, "retrieval", "provider", c.retrieval.provider);
        c.retrieval.endpoint = field<std::string>(rj, "retrieval", "endpoint", "");
        c.retrieval.model = field<std::string>(rj, "retrieval", "model", c.retrieval.model);
        c.retrieval.dim = field<int>(rj, "retrieval", "dim", c.retrieval.dim);
        c.retrieval.k = field<int>(rj, "retrieval", "k", c.retrieval.k);
        c.retrieval.max_examples = field<int>(rj, "retrieval", "max_examples", c.retrieval.max_examples);
        c.retrieval.index_path = field<std::string>(rj, "retrieval", "index_path", "");
        c.retrieval.batch_size = field<int>(rj, "retrieval", "batch_size", c.retrieval.batch_size);
        c.retrieval.in_flight = field<int>(rj, "retrieval", "in_flight", c.retrieval.in_flight);
    }
    if (j.contains("backend")) {
        const auto& bj = j["backend"];
        c.backend.kind = field<std::string>(bj, "backend", "kind", c.backend.kind);
        if (bj.contains("mock")) {
            const auto& mj = bj["mock"];
            c.backend.mock_base_delay_ms =
                field<int>(mj, "backend.mock", "base_delay_ms", c.backend.mock_base_delay_ms);
            c.backend.mock_per_token_delay_ms =
                field<int>(mj, "backend.mock", "per_token_delay_ms", c.backend.mock_per_token_delay_ms);
            c.backend.mock_echo_policy =
                field<std::string>(mj, "backend.mock", "echo_policy", c.backend.mock_echo_policy);
        }
    }
    if (j.contains("decode")) {
        const auto& dj = j["decode"];
        c.decode.max_new_tokens = field<int>(dj, "decode", "max_new_tokens", c.decode.max_new_tokens);
        c.decode.temperature = field<double>(dj, "decode", "temperature", c.decode.temperature);
        c.decode.seed = field<uint64_t>(dj, "decode", "seed", c.decode.seed);
        c.decode.timeout_s = field<int>(dj, "decode", "timeout_s", c.decode.timeout_s);
    }
    c.repetitions = field<int>(j, "", "repetitions", c.repetitions);
    c.warmup = field<int>(j, "", "warmup", c.warmup);
    c.seed = field<uint64_t>(j, "", "seed", c.seed);
    if (j.contains("meter")) c.meter = meter_from_json(j["meter"], "meter");
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(toml::parse_file(path));
}

std::string config_hash(const ExperimentConfig& config) {
    return hex64(fnv1a64(config.to_json().dump()));
}

}  // namespace ragwatt
