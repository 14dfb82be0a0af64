#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "descadapt/error.hpp"
#include "descadapt/query_gen.hpp"

using namespace descadapt;

namespace {

std::vector<Document> corpus() {
  return {{"d1", "interest rates on a fixed mortgage loan rise with inflation", {}, {}},
          {"d2", "the mortgage broker explained the loan terms", {}, {}},
          {"d3", "birds build a nest from twigs and feathers", {}, {}}};
}

class Lines : public GeneratorClient {
 public:
  explicit Lines(std::string t) : t_(std::move(t)) {}
  GenResponse complete(const GenRequest& req) override {
    prompts.push_back(req.prompt);
    return {t_, "lines", 0.0};
  }
  std::vector<std::string> prompts;
  std::string t_;
};

class Broken : public GeneratorClient {
 public:
  GenResponse complete(const GenRequest&) override { throw ProtocolError("bad"); }
};

}  // namespace

TEST_CASE("query generation prompt is exact") {
  DomainAttributes q, r;
  q.set(AttributeKey::query_format, "question");
  q.set(AttributeKey::document_source, "ignored on the query side");
  r.set(AttributeKey::relevance_notion, "answers the question");
  Document d{"d", "  Some passage text  ", {}, {}};
  CHECK(build_qg_prompt(d, q, r) ==
        "Generate a query for the following Passage based on the given Attributes. "
        "Passage: Some passage text. Attributes: query format: question; "
        "relevance notion: answers the question.");
  CHECK(build_qg_prompt(d, {}, {}) ==
        "Generate a query for the following Passage based on the given Attributes. "
        "Passage: Some passage text. Attributes: .");
}

TEST_CASE("fallback ranks rare repeated terms first") {
  auto c = corpus();
  FallbackQueryGenerator gen(c, {}, {});
  auto ranked = gen.ranked_terms(c[0]);
  // "mortgage" and "loan" occur in two documents; the rest of d1 only once.
  auto pos = [&](const std::string& t) {
    return std::find(ranked.begin(), ranked.end(), t) - ranked.begin();
  };
  CHECK(pos("interest") < pos("mortgage"));
  CHECK(pos("inflation") < pos("loan"));
  CHECK(ranked.front() == "interest");  // first occurrence among the tied rare terms
}

TEST_CASE("fallback yields distinct queries built from document terms") {
  auto c = corpus();
  QueryGenConfig cfg;
  cfg.k_prime = 6;
  FallbackQueryGenerator gen(c, {}, cfg);
  auto qs = gen.generate(c[0], 6);
  CHECK(qs.size() == 6);
  std::set<std::string> uniq(qs.begin(), qs.end());
  CHECK(uniq.size() == qs.size());
  auto terms = gen.ranked_terms(c[0]);
  for (const auto& q : qs) {
    std::istringstream words(q);
    std::string w;
    int n = 0;
    while (words >> w) {
      CHECK(std::find(terms.begin(), terms.end(), w) != terms.end());
      ++n;
    }
    CHECK(n == 3);
  }
  CHECK(gen.generate(c[0], 6) == qs);  // seeded
  CHECK(gen.generate(Document{"e", "", {}, {}}, 3).empty());
}

TEST_CASE("question format adds a question prefix") {
  auto c = corpus();
  DomainAttributes q;
  q.set(AttributeKey::query_format, "natural language question");
  FallbackQueryGenerator gen(c, q, {});
  for (const auto& s : gen.generate(c[2], 3)) CHECK(s.rfind("what is ", 0) == 0);
}

TEST_CASE("generate_queries offline: k' per document with ids") {
  auto c = corpus();
  QueryGenConfig cfg;
  cfg.k_prime = 2;
  auto r = generate_queries(c, {}, {}, cfg, nullptr);
  REQUIRE(r.queries.size() == 6);
  CHECK(r.queries[0].id == "q-d1-0");
  CHECK(r.queries[1].id == "q-d1-1");
  CHECK(r.queries[5].source_doc_id == "d3");
  CHECK(r.warnings.empty());
}

TEST_CASE("generate_queries with a client: lines, dedup and refill") {
  auto c = corpus();
  QueryGenConfig cfg;
  cfg.k_prime = 3;
  Lines client("first query\n\n first query \nsecond query\n");
  auto r = generate_queries(c, {}, {}, cfg, &client);
  REQUIRE(r.queries.size() == 9);
  CHECK(r.queries[0].text == "first query");
  CHECK(r.queries[1].text == "second query");
  CHECK(r.queries[2].text != "first query");
  CHECK(client.prompts.size() == 3);
  CHECK(client.prompts[0].find("Write 3 different queries, one per line.") != std::string::npos);

  Broken broken;
  auto f = generate_queries(c, {}, {}, cfg, &broken);
  CHECK(f.queries.size() == 9);
  CHECK(f.warnings.size() == 3);

  cfg.k_prime = 0;
  CHECK_THROWS_AS(generate_queries(c, {}, {}, cfg, nullptr), ArgumentError);
}

TEST_CASE("short documents warn when k' cannot be met") {
  std::vector<Document> c{{"tiny", "word", {}, {}}};
  QueryGenConfig cfg;
  cfg.k_prime = 4;
  auto r = generate_queries(c, {}, {}, cfg, nullptr);
  CHECK(r.queries.size() == 1);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("fallback single query picks the salient repeated term") {
  std::vector<Document> c{{"cat", "the cat sat on the mat near the cat door", {}, {}},
                          {"o1", "the dog sat on the porch", {}, {}},
                          {"o2", "the house near the river", {}, {}}};
  QueryGenConfig cfg;
  cfg.k_prime = 1;
  auto r = generate_queries(std::span<const Document>(c.data(), 1), {}, {}, cfg, nullptr);
  REQUIRE(r.queries.size() == 1);
  CHECK(r.queries[0].text.find("cat") != std::string::npos);

  // Against the larger corpus "cat" is rare and repeated, so it ranks first.
  FallbackQueryGenerator gen(c, {}, cfg);
  CHECK(gen.ranked_terms(c[0]).front() == "cat");
  auto q = gen.generate(c[0], 1);
  REQUIRE(q.size() == 1);
  CHECK(q[0].rfind("cat ", 0) == 0);
}

TEST_CASE("canned client lines become the queries verbatim") {
  std::vector<Document> c{{"d", "some passage", {}, {}}};
  QueryGenConfig cfg;
  cfg.k_prime = 2;
  Lines client("How do passages work?\nwhere are passages\n");
  auto r = generate_queries(c, {}, {}, cfg, &client);
  REQUIRE(r.queries.size() == 2);
  CHECK(r.queries[0].text == "How do passages work?");
  CHECK(r.queries[1].text == "where are passages");
  CHECK(client.prompts[0].rfind(
            "Generate a query for the following Passage based on the given Attributes.", 0) == 0);
}
