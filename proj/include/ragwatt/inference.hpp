#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "ragwatt/errors.hpp"
#include "ragwatt/promptbuilder.hpp"

namespace ragwatt {

enum class BackendKind { http, mock };
std::string to_string(BackendKind k);

struct GenerationRequest {
    AugmentedPrompt prompt;
    std::string model_id;
    int max_new_tokens = 256;
    double temperature = 0.0;
    std::optional<uint64_t> seed;
    std::chrono::milliseconds timeout{60000};
};

struct GenerationResult {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    double latency_s = 0.0;  // wall clock, monotonic, dispatch to last byte
    BackendKind backend = BackendKind::mock;
    bool token_counts_estimated = false;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
    virtual bool healthy() = 0;
    virtual BackendKind kind() const = 0;
};

struct MockBehavior {
    std::chrono::milliseconds base_delay{5};
    std::chrono::milliseconds per_token_delay{1};
    enum class EchoPolicy { first_example_code, fixed_stub } echo = EchoPolicy::first_example_code;
    std::string stub_text = "// TODO";
};

/// Deterministic function of the prompt: echoes the code block of the first
/// included example (or the stub for example-free prompts) and sleeps
/// base + per_token * completion_tokens so energy meters see a real window.
GenerationResult mock_generate(const GenerationRequest& request, const MockBehavior& behavior);

class MockBackend final : public Backend {
  public:
    explicit MockBackend(MockBehavior behavior = {}) : behavior_(std::move(behavior)) {}
    GenerationResult generate(const GenerationRequest& request) override;
    bool healthy() override { return true; }
    BackendKind kind() const override { return BackendKind::mock; }

  private:
    MockBehavior behavior_;
};

/// OpenAI-compatible completions client:
/// POST /v1/completions {"model","prompt","max_tokens","temperature","seed"}
///   -> {"choices":[{"text"}], "usage":{"prompt_tokens","completion_tokens"}}.
/// Missing usage falls back to heuristic counts, flagged in the result.
class HttpBackend final : public Backend {
  public:
    explicit HttpBackend(std::string endpoint);
    GenerationResult generate(const GenerationRequest& request) override;
    bool healthy() override;
    BackendKind kind() const override { return BackendKind::http; }

  private:
    std::string endpoint_;
    HeuristicTokenizer fallback_tokenizer_;
};

/// Dispatches to the backend with latency measured around the call.
GenerationResult generate(Backend& backend, const GenerationRequest& request);

}  // namespace ragwatt
