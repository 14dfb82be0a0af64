#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descadapt/lexical_index.hpp"

namespace descadapt {

/// query id -> (doc id -> non-negative grade)
using Qrels = std::map<std::string, std::map<std::string, int>>;
/// query id -> hits sorted by descending score
using RunList = std::map<std::string, std::vector<SearchHit>>;

struct MetricResult {
  std::map<std::string, double> per_query;
  double mean = 0.0;
  /// Run queries that had no qrels entry.
  std::vector<std::string> warnings;
};

/// Evaluated query set: every qrels query with at least one grade > 0.
/// Such a query missing from the run scores 0; run queries without qrels are
/// reported in warnings and excluded.
MetricResult ndcg_at_k(const RunList& run, const Qrels& qrels, std::size_t k = 10);
MetricResult recall_at_k(const RunList& run, const Qrels& qrels, std::size_t k = 100);
MetricResult mrr(const RunList& run, const Qrels& qrels);

/// Token-level longest-common-subsequence F-score.
double rouge_l(std::string_view reference, std::string_view hypothesis);
/// 1 when both strings match after lowercasing, trimming, whitespace
/// collapsing and stripping terminal punctuation.
int exact_match(std::string_view reference, std::string_view hypothesis);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
};

/// Two-tailed paired t-test on a - b. Throws ArgumentError on length
/// mismatch or fewer than two pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// min(1, p * m) elementwise. Throws ArgumentError if m < p_values.size().
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

}  // namespace descadapt
