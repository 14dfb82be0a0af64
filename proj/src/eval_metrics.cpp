#include "descadapt/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt {

namespace {

const std::vector<SearchHit> kEmptyHits;

template <typename PerQuery>
MetricResult evaluate(const RunList& run, const Qrels& qrels, PerQuery&& per_query) {
  MetricResult result;
  for (const auto& [qid, hits] : run) {
    if (!qrels.contains(qid)) result.warnings.push_back("query " + qid + " missing from qrels");
  }
  double sum = 0.0;
  for (const auto& [qid, judged] : qrels) {
    bool any_relevant = std::any_of(judged.begin(), judged.end(),
                                    [](const auto& kv) { return kv.second > 0; });
    if (!any_relevant) continue;
    auto it = run.find(qid);
    const auto& hits = it == run.end() ? kEmptyHits : it->second;
    double value = per_query(hits, judged);
    result.per_query.emplace(qid, value);
    sum += value;
  }
  if (!result.per_query.empty()) result.mean = sum / static_cast<double>(result.per_query.size());
  return result;
}

int grade_of(const std::map<std::string, int>& judged, const std::string& doc) {
  auto it = judged.find(doc);
  return it == judged.end() ? 0 : it->second;
}

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

std::string em_normalize(std::string_view text) {
  auto norm = normalize_whitespace_lower(text);
  while (!norm.empty() && std::ispunct(static_cast<unsigned char>(norm.back()))) norm.pop_back();
  return std::string(trim(norm));
}

}  // namespace

MetricResult ndcg_at_k(const RunList& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw ArgumentError("ndcg cutoff must be >= 1");
  return evaluate(run, qrels, [k](const std::vector<SearchHit>& hits, const auto& judged) {
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, hits.size()); ++i) {
      dcg += gain(grade_of(judged, hits[i].doc_id)) / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<int> grades;
    for (const auto& [doc, g] : judged) grades.push_back(g);
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double ideal = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
      ideal += gain(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return ideal > 0.0 ? dcg / ideal : 0.0;
  });
}

MetricResult recall_at_k(const RunList& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw ArgumentError("recall cutoff must be >= 1");
  return evaluate(run, qrels, [k](const std::vector<SearchHit>& hits, const auto& judged) {
    std::size_t relevant = 0;
    for (const auto& [doc, g] : judged) relevant += g > 0 ? 1 : 0;
    std::size_t found = 0;
    for (std::size_t i = 0; i < std::min(k, hits.size()); ++i) {
      found += grade_of(judged, hits[i].doc_id) > 0 ? 1 : 0;
    }
    return static_cast<double>(found) / static_cast<double>(relevant);
  });
}

MetricResult mrr(const RunList& run, const Qrels& qrels) {
  return evaluate(run, qrels, [](const std::vector<SearchHit>& hits, const auto& judged) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
      if (grade_of(judged, hits[i].doc_id) > 0) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
  });
}

double rouge_l(std::string_view reference, std::string_view hypothesis) {
  auto ref = tokenize(reference);
  auto hyp = tokenize(hypothesis);
  if (ref.empty() || hyp.empty()) return 0.0;
  std::vector<std::size_t> prev(hyp.size() + 1, 0);
  std::vector<std::size_t> cur(hyp.size() + 1, 0);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      cur[j] = ref[i - 1] == hyp[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[hyp.size()]);
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(hyp.size());
  const double recall = lcs / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

int exact_match(std::string_view reference, std::string_view hypothesis) {
  return em_normalize(reference) == em_normalize(hypothesis) ? 1 : 0;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw ArgumentError("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  if (sd == 0.0) {
    if (mean == 0.0) return {0.0, 1.0};
    return {std::copysign(std::numeric_limits<double>::infinity(), mean), 0.0};
  }
  TTestResult r;
  r.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  return r;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m < p_values.size()) throw ArgumentError("bonferroni: m smaller than number of p-values");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) out.push_back(std::min(1.0, p * static_cast<double>(m)));
  return out;
}

}  // namespace descadapt
