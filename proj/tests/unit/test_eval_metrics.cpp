#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "descadapt/error.hpp"
#include "descadapt/eval_metrics.hpp"

using namespace descadapt;

namespace {

RunList run_of(std::vector<std::string> docs, const std::string& qid = "q") {
  RunList run;
  double s = 100.0;
  for (auto& d : docs) run[qid].push_back({d, s--});
  return run;
}

}  // namespace

TEST_CASE("ndcg hand case") {
  Qrels qrels{{"q", {{"d1", 1}, {"d3", 1}}}};
  auto r = ndcg_at_k(run_of({"d1", "d2", "d3"}), qrels, 3);
  // (1 + 0 + 1/log2(4)) / (1 + 1/log2(3))
  const double expected = (1.0 + 0.5) / (1.0 + 1.0 / std::log2(3.0));
  CHECK(r.mean == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.mean == doctest::Approx(0.9197).epsilon(1e-4));

  CHECK(ndcg_at_k(run_of({"d1", "d3", "d2"}), qrels, 3).mean == doctest::Approx(1.0));
  CHECK(ndcg_at_k(run_of({"d2", "d4"}), qrels, 2).mean == 0.0);
  CHECK_THROWS_AS(ndcg_at_k(run_of({"d1"}), qrels, 0), ArgumentError);
}

TEST_CASE("recall hand cases") {
  Qrels qrels{{"q", {{"d1", 1}, {"d3", 1}}}};
  CHECK(recall_at_k(run_of({"d1", "d2", "d3"}), qrels, 2).mean == 0.5);
  CHECK(recall_at_k(run_of({"d1", "d2", "d3"}), qrels, 100).mean == 1.0);
  RunList empty;
  empty["q"] = {};
  CHECK(recall_at_k(empty, qrels, 10).mean == 0.0);
}

TEST_CASE("mrr hand cases") {
  Qrels qrels{{"q", {{"d2", 1}}}};
  CHECK(mrr(run_of({"d1", "d2"}), qrels).mean == 0.5);
  CHECK(mrr(run_of({"d2", "d1"}), qrels).mean == 1.0);
  CHECK(mrr(run_of({"d1", "d3"}), qrels).mean == 0.0);
}

TEST_CASE("query set: runs without qrels are warned about, missing runs score 0") {
  Qrels qrels{{"a", {{"d1", 1}}}, {"b", {{"d1", 2}}}, {"c", {{"d9", 0}}}};
  RunList run = run_of({"d1"}, "a");
  run["zzz"] = {{"d1", 1.0}};
  auto r = ndcg_at_k(run, qrels, 10);
  CHECK(r.per_query.size() == 2);  // "c" has no relevant documents
  CHECK(r.per_query.at("a") == 1.0);
  CHECK(r.per_query.at("b") == 0.0);
  CHECK(r.mean == 0.5);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("zzz") != std::string::npos);
}

TEST_CASE("moving a relevant document up never lowers a metric") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> docs;
    for (int i = 0; i < 10; ++i) docs.push_back("d" + std::to_string(i));
    std::shuffle(docs.begin(), docs.end(), rng);
    Qrels qrels;
    for (int i = 0; i < 10; ++i) qrels["q"]["d" + std::to_string(i)] = static_cast<int>(rng() % 3);
    qrels["q"]["d0"] = 2;
    auto pos = static_cast<std::size_t>(std::find(docs.begin(), docs.end(), "d0") - docs.begin());
    if (pos == 0) continue;
    auto before = run_of(docs);
    std::swap(docs[pos], docs[pos - 1]);
    auto after = run_of(docs);
    CHECK(ndcg_at_k(after, qrels, 5).mean >= ndcg_at_k(before, qrels, 5).mean - 1e-12);
    CHECK(recall_at_k(after, qrels, 5).mean >= recall_at_k(before, qrels, 5).mean);
    CHECK(mrr(after, qrels).mean >= mrr(before, qrels).mean);
  }
}

TEST_CASE("rouge_l") {
  CHECK(rouge_l("argument passage", "argument passage") == 1.0);
  CHECK(rouge_l("argument passage", "passage") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_l("informal", "informal english") == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(rouge_l("apple", "orange") == 0.0);
  CHECK(rouge_l("", "x") == 0.0);
  CHECK(rouge_l("a b c d", "a c") == doctest::Approx(2 * 1.0 * 0.5 / 1.5));
}

TEST_CASE("exact_match") {
  CHECK(exact_match("English", "english") == 1);
  CHECK(exact_match("english", "english.") == 1);
  CHECK(exact_match("  online   debate portals ", "online debate portals") == 1);
  CHECK(exact_match("english", "french") == 0);
}

TEST_CASE("paired t-test") {
  std::vector<double> a{0.3, 0.5, 0.7};
  auto same = paired_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  // d = [1, 2, 3]; for df = 2 the t CDF has the closed form 1/2 + t / (2 sqrt(2 + t^2)).
  std::vector<double> x{1, 2, 3};
  std::vector<double> zero{0, 0, 0};
  auto r = paired_t_test(x, zero);
  const double t = 2.0 / (1.0 / std::sqrt(3.0));
  const double cdf = 0.5 + t / (2.0 * std::sqrt(2.0 + t * t));
  CHECK(r.t == doctest::Approx(t).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(3.4641).epsilon(1e-4));
  CHECK(r.p == doctest::Approx(2.0 * (1.0 - cdf)).epsilon(1e-9));
  CHECK(std::fabs(r.p - 0.0742) < 1e-3);

  auto flipped = paired_t_test(zero, x);
  CHECK(flipped.t == doctest::Approx(-r.t));
  CHECK(flipped.p == doctest::Approx(r.p));

  CHECK_THROWS_AS(paired_t_test(x, std::vector<double>{1, 2}), ArgumentError);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), ArgumentError);
}

TEST_CASE("bonferroni") {
  CHECK(bonferroni(std::vector<double>{0.01}, 5)[0] == doctest::Approx(0.05));
  CHECK(bonferroni(std::vector<double>{0.5}, 3)[0] == 1.0);
  CHECK(bonferroni(std::vector<double>{0.2, 0.03}, 2) == std::vector<double>{0.4, 0.06});
  CHECK(bonferroni(std::vector<double>{0.2}, 1)[0] == 0.2);
  CHECK_THROWS_AS(bonferroni(std::vector<double>{0.1, 0.2}, 1), ArgumentError);
}
