#include "ragwatt/promptbuilder.hpp"

#include <cmath>

namespace ragwatt {

namespace {

constexpr const char* kHeader = "Generate the code described below.\n";

std::string render_task_block(const CorpusExample& query) {
    return "### Task\nDescription: " + query.nl + "\nCode:\n";
}

}  // namespace

void TokenBudget::validate() const {
    if (context_window <= 0) throw ConfigError("context_window must be positive");
    if (reserved_output <= 0) throw ConfigError("reserved_output must be positive");
    if (reserved_output >= context_window)
        throw ConfigError("reserved_output must be smaller than context_window");
}

TokenBudget apply_safety_margin(TokenBudget budget, double factor) {
    budget.validate();
    const int scaled = static_cast<int>(std::floor(budget.available_input() * factor));
    if (scaled <= 0) throw ConfigError("safety margin leaves no input budget");
    budget.reserved_output = budget.context_window - scaled;
    return budget;
}

int count_tokens(std::string_view text, const Tokenizer& tokenizer) { return tokenizer.count(text); }

std::string to_string(Condition c) { return c == Condition::baseline ? "baseline" : "rag"; }

Condition condition_from_string(const std::string& s) {
    if (s == "baseline") return Condition::baseline;
    if (s == "rag") return Condition::rag;
    throw ConfigError("unknown condition '" + s + "'");
}

std::vector<RetrievalHit> filter_self_hits(const std::vector<RetrievalHit>& hits, long long query_id) {
    std::vector<RetrievalHit> out;
    out.reserve(hits.size());
    for (const auto& h : hits)
        if (h.example_id != query_id) out.push_back(h);
    return out;
}

std::string render_example_block(int position, const CorpusExample& example) {
    return "### Example " + std::to_string(position) + "\nDescription: " + example.nl + "\nCode:\n" +
           example.code + "\n";
}

std::vector<CorpusExample> select_examples(const std::vector<RetrievalHit>& hits, const Corpus& pool,
                                           TokenBudget budget, int base_cost, int max_examples,
                                           const Tokenizer& tokenizer) {
    budget.validate();
    if (max_examples < 1) throw ConfigError("max_examples must be >= 1");
    const int available = budget.available_input();
    if (base_cost > available)
        throw QueryTooLarge("query needs " + std::to_string(base_cost) + " tokens, budget allows " +
                            std::to_string(available));

    std::vector<CorpusExample> selected;
    int total = base_cost;
    for (const auto& hit : hits) {
        if (static_cast<int>(selected.size()) >= max_examples) break;
        const CorpusExample* ex = pool.find(hit.example_id);
        if (!ex) continue;  // hit outside the pool: stale index, skip
        const int block_cost =
            tokenizer.count(render_example_block(static_cast<int>(selected.size()) + 1, *ex));
        if (total + block_cost > available) continue;
        total += block_cost;
        selected.push_back(*ex);
    }
    return selected;
}

namespace {

AugmentedPrompt render(const CorpusExample& query, const std::vector<CorpusExample>& examples,
                       Condition condition, TokenBudget budget, const Tokenizer& tokenizer) {
    budget.validate();
    std::string text = kHeader;
    AugmentedPrompt prompt;
    for (size_t i = 0; i < examples.size(); ++i) {
        text += render_example_block(static_cast<int>(i) + 1, examples[i]);
        prompt.included_example_ids.push_back(examples[i].id);
    }
    text += render_task_block(query);

    prompt.text = std::move(text);
    prompt.query_id = query.id;
    prompt.condition = condition;
    prompt.input_token_count = tokenizer.count(prompt.text);

    if (prompt.input_token_count > budget.available_input()) {
        if (examples.empty())
            throw QueryTooLarge("query needs " + std::to_string(prompt.input_token_count) +
                                " tokens, budget allows " + std::to_string(budget.available_input()));
        throw BudgetOverflow("rendered prompt exceeds budget after selection: " +
                             std::to_string(prompt.input_token_count) + " > " +
                             std::to_string(budget.available_input()));
    }
    return prompt;
}

}  // namespace

AugmentedPrompt render_rag_prompt(const CorpusExample& query, const std::vector<CorpusExample>& examples,
                                  TokenBudget budget, const Tokenizer& tokenizer) {
    return render(query, examples, Condition::rag, budget, tokenizer);
}

AugmentedPrompt render_baseline_prompt(const CorpusExample& query, TokenBudget budget,
                                       const Tokenizer& tokenizer) {
    return render(query, {}, Condition::baseline, budget, tokenizer);
}

int base_prompt_cost(const CorpusExample& query, const Tokenizer& tokenizer) {
    return tokenizer.count(std::string(kHeader) + render_task_block(query));
}

}  // namespace ragwatt
