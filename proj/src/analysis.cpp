#include "ragwatt/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace ragwatt {

namespace {

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    bool in_space = true;  // also trims leading whitespace
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_space = false;
        }
    }
    return out;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

}  // namespace

int exact_match(std::string_view candidate, std::string_view reference) {
    return normalize_whitespace(candidate) == normalize_whitespace(reference) ? 1 : 0;
}

std::vector<std::string> code_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string word;
    for (char c : text) {
        if (is_word_char(static_cast<unsigned char>(c))) {
            word.push_back(c);
        } else {
            if (!word.empty()) {
                tokens.push_back(std::move(word));
                word.clear();
            }
            if (!std::isspace(static_cast<unsigned char>(c))) tokens.push_back(std::string(1, c));
        }
    }
    if (!word.empty()) tokens.push_back(std::move(word));
    return tokens;
}

double token_f1(std::string_view candidate, std::string_view reference) {
    auto cand = code_tokens(candidate);
    auto ref = code_tokens(reference);
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty() || ref.empty()) return 0.0;

    std::map<std::string, int> ref_counts;
    for (const auto& t : ref) ++ref_counts[t];
    size_t overlap = 0;
    for (const auto& t : cand) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(cand.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

QualityScore score_quality(std::string_view candidate, std::string_view reference) {
    QualityScore q;
    q.exact_match = exact_match(candidate, reference);
    q.token_f1 = q.exact_match ? 1.0 : token_f1(candidate, reference);
    q.score = q.token_f1;
    return q;
}

double relative_change(double base, double treat) {
    if (!(base > 0)) throw DomainError("relative_change requires base > 0");
    return (treat - base) / base;
}

double energy_ratio(double a_mean, double b_mean) {
    if (!(a_mean > 0) || !(b_mean > 0)) throw DomainError("energy_ratio requires positive means");
    return a_mean / b_mean;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double mx = mean(xs), my = mean(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DomainError("spearman: length mismatch");
    if (xs.size() < 3) throw DomainError("spearman needs at least 3 pairs");
    return pearson(average_ranks(xs), average_ranks(ys));
}

std::string spearman_undefined_reason(const std::vector<double>& xs, const std::vector<double>& ys) {
    auto constant = [](const std::vector<double>& v) {
        return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
    };
    if (constant(xs) && constant(ys)) return "zero rank variance in both inputs";
    if (constant(xs)) return "zero rank variance in xs";
    if (constant(ys)) return "zero rank variance in ys";
    return "";
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double stddev(const std::vector<double>& values) {
    const size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double sq = 0.0;
    for (double v : values) sq += (v - m) * (v - m);
    return std::sqrt(sq / static_cast<double>(n - 1));
}

}  // namespace ragwatt
