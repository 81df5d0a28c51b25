#include "ragwatt/inference.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace ragwatt {

using nlohmann::json;

std::string to_string(BackendKind k) { return k == BackendKind::http ? "http" : "mock"; }

namespace {

using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
    return std::chrono::duration<double>(steady::now() - t0).count();
}

// The prompt template is canonical, so the first example's code sits between
// the first "Code:\n" and the next "### " marker.
std::string first_example_code(const std::string& prompt_text) {
    const std::string code_tag = "Code:\n";
    const size_t example = prompt_text.find("### Example 1\n");
    if (example == std::string::npos) return {};
    const size_t code = prompt_text.find(code_tag, example);
    if (code == std::string::npos) return {};
    const size_t begin = code + code_tag.size();
    size_t end = prompt_text.find("### ", begin);
    if (end == std::string::npos) end = prompt_text.size();
    while (end > begin && prompt_text[end - 1] == '\n') --end;
    return prompt_text.substr(begin, end - begin);
}

}  // namespace

GenerationResult mock_generate(const GenerationRequest& request, const MockBehavior& behavior) {
    const auto t0 = steady::now();

    std::string text;
    if (behavior.echo == MockBehavior::EchoPolicy::first_example_code &&
        !request.prompt.included_example_ids.empty())
        text = first_example_code(request.prompt.text);
    if (text.empty()) text = behavior.stub_text;

    HeuristicTokenizer counter;
    GenerationResult result;
    result.backend = BackendKind::mock;
    result.prompt_tokens = counter.count(request.prompt.text);
    result.completion_tokens = std::min(counter.count(text), request.max_new_tokens);
    result.text = std::move(text);
    result.token_counts_estimated = false;

    const auto simulated = behavior.base_delay + behavior.per_token_delay * result.completion_tokens;
    if (request.timeout.count() > 0 && simulated > request.timeout) {
        std::this_thread::sleep_for(request.timeout);
        throw TimeoutError("mock generation exceeded timeout", seconds_since(t0));
    }
    std::this_thread::sleep_for(simulated);
    result.latency_s = seconds_since(t0);
    return result;
}

GenerationResult MockBackend::generate(const GenerationRequest& request) {
    return mock_generate(request, behavior_);
}

HttpBackend::HttpBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}

bool HttpBackend::healthy() {
    httplib::Client client(endpoint_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(5, 0);
    auto res = client.Get("/v1/models");
    return res && res->status == 200;
}

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
    const auto t0 = steady::now();
    httplib::Client client(endpoint_);
    const auto timeout = request.timeout;
    client.set_connection_timeout(timeout.count() / 1000, (timeout.count() % 1000) * 1000);
    client.set_read_timeout(timeout.count() / 1000, (timeout.count() % 1000) * 1000);

    json body{{"model", request.model_id},
              {"prompt", request.prompt.text},
              {"max_tokens", request.max_new_tokens},
              {"temperature", request.temperature}};
    if (request.seed) body["seed"] = *request.seed;

    auto res = client.Post("/v1/completions", body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write)
            throw TimeoutError("backend timed out: " + httplib::to_string(err), seconds_since(t0));
        throw BackendError("backend transport failure: " + httplib::to_string(err), 0);
    }
    if (res->status != 200) {
        std::string excerpt = res->body.substr(0, 200);
        std::string lowered = excerpt;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (res->status == 400 && lowered.find("context") != std::string::npos)
            throw ContextOverflow("backend rejected prompt: " + excerpt);
        throw BackendError("backend returned HTTP " + std::to_string(res->status), res->status, excerpt);
    }

    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
        throw BackendError("malformed completion response", res->status, res->body.substr(0, 200));

    GenerationResult result;
    result.backend = BackendKind::http;
    result.text = j["choices"][0].value("text", "");
    if (j.contains("usage") && j["usage"].is_object()) {
        result.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        result.completion_tokens = j["usage"].value("completion_tokens", 0);
    } else {
        result.prompt_tokens = fallback_tokenizer_.count(request.prompt.text);
        result.completion_tokens = fallback_tokenizer_.count(result.text);
        result.token_counts_estimated = true;
    }
    result.latency_s = seconds_since(t0);
    return result;
}

GenerationResult generate(Backend& backend, const GenerationRequest& request) {
    const auto t0 = steady::now();
    GenerationResult result = backend.generate(request);
    result.latency_s = seconds_since(t0);
    return result;
}

}  // namespace ragwatt
