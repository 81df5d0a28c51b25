#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ragwatt/corpus.hpp"
#include "ragwatt/errors.hpp"
#include "ragwatt/retrieval.hpp"

namespace ragwatt {

/// Tokens available for prompt input after reserving room for generation.
struct TokenBudget {
    int context_window = 0;
    int reserved_output = 0;

    int available_input() const { return context_window - reserved_output; }
    void validate() const;
};

/// Shrinks available_input to floor(available * factor) by growing the
/// reservation. Applied when the token counter is a heuristic upper bound.
TokenBudget apply_safety_margin(TokenBudget budget, double factor = 0.9);

class Tokenizer {
  public:
    virtual ~Tokenizer() = default;
    virtual int count(std::string_view text) const = 0;
    /// Exact counters skip the safety margin.
    virtual bool exact() const { return false; }
};

/// ceil(bytes / 4); a safe upper-bound stand-in when no model tokenizer is wired.
class HeuristicTokenizer final : public Tokenizer {
  public:
    int count(std::string_view text) const override {
        return static_cast<int>((text.size() + 3) / 4);
    }
};

int count_tokens(std::string_view text, const Tokenizer& tokenizer);

enum class Condition { baseline, rag };
std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

inline constexpr const char* kTemplateVersion = "v1";

/// Rendered prompt plus the provenance of what went into it.
struct AugmentedPrompt {
    std::string text;
    long long query_id = 0;
    std::vector<long long> included_example_ids;  // descending similarity
    Condition condition = Condition::baseline;
    int input_token_count = 0;
    std::string template_version = kTemplateVersion;
};

/// Drops hits that point back at the query itself (replay-mode leakage guard).
std::vector<RetrievalHit> filter_self_hits(const std::vector<RetrievalHit>& hits, long long query_id);

std::string render_example_block(int position, const CorpusExample& example);

/// Greedy scan in hit order: an example is included iff the running total
/// (base_cost plus its rendered block's tokens) stays within the budget and
/// fewer than max_examples are already in. Never reorders, may skip.
std::vector<CorpusExample> select_examples(const std::vector<RetrievalHit>& hits, const Corpus& pool,
                                           TokenBudget budget, int base_cost, int max_examples,
                                           const Tokenizer& tokenizer);

AugmentedPrompt render_rag_prompt(const CorpusExample& query, const std::vector<CorpusExample>& examples,
                                  TokenBudget budget, const Tokenizer& tokenizer);

AugmentedPrompt render_baseline_prompt(const CorpusExample& query, TokenBudget budget,
                                       const Tokenizer& tokenizer);

/// Token count of the example-free prompt for this query (select_examples' base_cost).
int base_prompt_cost(const CorpusExample& query, const Tokenizer& tokenizer);

}  // namespace ragwatt
