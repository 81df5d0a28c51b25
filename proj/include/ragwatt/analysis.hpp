#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ragwatt/errors.hpp"

namespace ragwatt {

/// Proxy quality metrics for generated code. The headline score is token_f1;
/// exact_match is reported alongside it.
struct QualityScore {
    int exact_match = 0;
    double token_f1 = 0.0;
    double score = 0.0;
};

/// 1 iff the two texts are equal after collapsing whitespace runs and trimming.
int exact_match(std::string_view candidate, std::string_view reference);

/// Multiset F1 over code tokens (identifier/number runs plus single
/// punctuation tokens). Both empty -> 1, empty candidate alone -> 0.
double token_f1(std::string_view candidate, std::string_view reference);

QualityScore score_quality(std::string_view candidate, std::string_view reference);

std::vector<std::string> code_tokens(std::string_view text);

/// (treat - base) / base; negative means improvement for cost metrics.
double relative_change(double base, double treat);

double energy_ratio(double a_mean, double b_mean);

/// Spearman rank correlation with average ranks for ties. Returns NaN when a
/// side has zero rank variance (use spearman_undefined_reason to explain).
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);
std::string spearman_undefined_reason(const std::vector<double>& xs, const std::vector<double>& ys);

std::vector<double> average_ranks(const std::vector<double>& values);

double mean(const std::vector<double>& values);
double median(std::vector<double> values);
double stddev(const std::vector<double>& values);  // sample, n-1

}  // namespace ragwatt
