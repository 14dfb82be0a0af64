#include "doctest.h"

#include <map>
#include <random>
#include <unordered_set>

#include "descadapt/corpus_builder.hpp"
#include "descadapt/error.hpp"

using namespace descadapt;

namespace {

// Scripted retrieval graph keyed by query text (= document id here).
struct Script {
  std::map<std::string, std::vector<std::string>, std::less<>> edges;
  std::map<std::string, Document, std::less<>> docs;
  std::vector<std::pair<std::string, std::size_t>> calls;

  void add(const std::string& from, std::vector<std::string> to) {
    edges[from] = std::move(to);
    for (const auto& id : edges[from]) docs.try_emplace(id, Document{id, id, {}, {}});
  }
  Retriever retriever() {
    return [this](std::string_view q, std::size_t k) {
      calls.emplace_back(std::string(q), k);
      std::vector<SearchHit> hits;
      auto it = edges.find(q);
      if (it == edges.end()) return hits;
      for (const auto& id : it->second) {
        if (hits.size() == k) break;
        hits.push_back({id, 1.0});
      }
      return hits;
    };
  }
  std::function<const Document&(std::string_view)> lookup() {
    return [this](std::string_view id) -> const Document& { return docs.find(id)->second; };
  }
};

Script graph() {
  Script s;
  s.add("seed", {"a", "b", "c"});
  s.add("a", {"b", "d"});
  s.add("b", {"e"});
  s.add("c", {"a", "f"});
  return s;
}

std::vector<std::string> ids(const SyntheticCorpus& c) {
  std::vector<std::string> out;
  for (const auto& d : c.docs) out.push_back(d.doc.id);
  return out;
}

}  // namespace

TEST_CASE("scripted retriever: hand simulation") {
  auto s = graph();
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 3;
  cfg.target_size = 5;
  auto c = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  CHECK(ids(c) == std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(c.iterations == 3);
  CHECK(c.warnings.empty());
  CHECK(c.docs[0].iteration == 1);
  CHECK(c.docs[0].parent == "seed");
  CHECK(c.docs[3].parent == "a");
  CHECK(c.docs[4].iteration == 3);
  REQUIRE(s.calls.size() == 3);
  CHECK(s.calls[1] == std::pair<std::string, std::size_t>{"a", 3});
}

TEST_CASE("six-document collection with k=2, N=4") {
  Script s;
  s.add("seed", {"a", "b"});
  s.add("a", {"b", "c"});
  s.add("b", {"d", "e"});
  s.docs.try_emplace("f", Document{"f", "f", {}, {}});
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 2;
  cfg.target_size = 4;

  cfg.max_iterations = 2;
  auto two = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  CHECK(ids(two) == std::vector<std::string>{"a", "b", "c"});

  cfg.max_iterations = 1'000'000;
  auto full = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  CHECK(full.iterations == 3);
  CHECK(full.docs.back().parent == "b");
  CHECK(ids(full) == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("overshoot is truncated to N in insertion order") {
  auto s = graph();
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 3;
  cfg.target_size = 2;
  auto c = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  CHECK(ids(c) == std::vector<std::string>{"a", "b"});
  CHECK(c.iterations == 1);
}

TEST_CASE("N=0 returns an empty corpus without retrieval") {
  auto s = graph();
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.target_size = 0;
  auto c = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  CHECK(c.docs.empty());
  CHECK(s.calls.empty());
}

TEST_CASE("exhausted queue warns and returns what was found") {
  auto s = graph();
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 3;
  cfg.target_size = 100;
  auto c = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  CHECK(ids(c) == std::vector<std::string>{"a", "b", "c", "d", "e", "f"});
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("exhausted") != std::string::npos);
}

TEST_CASE("k bounds each retrieval; max_iterations caps the loop") {
  auto s = graph();
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 1;
  cfg.target_size = 100;
  auto c = build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  // seed->a, a->b, b->e, e->nothing
  CHECK(ids(c) == std::vector<std::string>{"a", "b", "e"});

  auto s2 = graph();
  cfg.retrieval_depth = 3;
  cfg.max_iterations = 1;
  auto c2 = build_corpus(seeds, s2.retriever(), s2.lookup(), cfg);
  CHECK(c2.iterations == 1);
  CHECK(c2.warnings.at(0).find("max_iterations") != std::string::npos);

  cfg.retrieval_depth = 0;
  CHECK_THROWS_AS(build_corpus(seeds, s2.retriever(), s2.lookup(), cfg), ArgumentError);
}

TEST_CASE("reranker reorders top-k before insertion") {
  auto s = graph();
  std::vector<Document> seeds{{"seed", "seed", {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 3;
  cfg.target_size = 1;
  Reranker prefer_c = [](std::string_view, std::string_view doc) { return doc == "c" ? 1.0 : 0.0; };
  auto c = build_corpus(seeds, s.retriever(), s.lookup(), cfg, prefer_c);
  CHECK(ids(c) == std::vector<std::string>{"c"});
}

TEST_CASE("long queue documents are truncated when used as queries") {
  Script s;
  std::string long_text;
  for (int i = 0; i < 20; ++i) long_text += "w" + std::to_string(i) + " ";
  std::vector<Document> seeds{{"seed", long_text, {}, {}}};
  BuildConfig cfg;
  cfg.max_query_tokens = 3;
  cfg.target_size = 1;
  build_corpus(seeds, s.retriever(), s.lookup(), cfg);
  REQUIRE(s.calls.size() == 1);
  CHECK(s.calls[0].first == "w0 w1 w2");
}

TEST_CASE("seed prompt lists only specified document attributes") {
  DomainAttributes d;
  d.set(AttributeKey::document_source, "pubmed");
  d.set(AttributeKey::query_topic, "medical");
  auto prompt = build_seed_prompt(d);
  CHECK(prompt.find("document source: pubmed") != std::string::npos);
  CHECK(prompt.find("query topic") == std::string::npos);
  CHECK(prompt.find("document topic") == std::string::npos);
}

namespace {
class Constant : public GeneratorClient {
 public:
  explicit Constant(std::string t) : t_(std::move(t)) {}
  GenResponse complete(const GenRequest&) override { return {t_, "c", 0.0}; }
  std::string t_;
};
class Broken : public GeneratorClient {
 public:
  GenResponse complete(const GenRequest&) override { throw TransportError("x", 500); }
};
}  // namespace

TEST_CASE("seed generation and fallback") {
  DomainAttributes d;
  d.set(AttributeKey::document_source, "pubmed");
  d.set(AttributeKey::document_topic, "biomedical");

  Constant good("  a generated passage \n");
  auto r = generate_seed(d, &good);
  REQUIRE(r.seeds.size() == 1);
  CHECK(r.seeds[0].id == "seed-0");
  CHECK(r.seeds[0].text == "a generated passage");
  CHECK(r.seeds[0].source_tag == "generated");

  auto none = generate_seed(d, nullptr);
  CHECK(none.seeds[0].text == "biomedical pubmed");
  CHECK(none.seeds[0].source_tag == "fallback");
  CHECK(none.warnings.size() == 1);

  Broken broken;
  auto failed = generate_seed(d, &broken);
  CHECK(failed.seeds[0].text == "biomedical pubmed");
  CHECK_FALSE(failed.warnings.empty());

  auto empty = generate_seed(DomainAttributes{}, nullptr);
  CHECK(empty.seeds[0].text.empty());
  CHECK(empty.warnings.size() == 2);

  // A constant client yields one seed; the rest are duplicates.
  auto many = generate_seeds(d, &good, 3);
  CHECK(many.seeds.size() == 1);
  CHECK(many.warnings.size() == 2);
}

TEST_CASE("BM25 loop on two disjoint clusters stays in the seed's cluster") {
  std::mt19937 rng(5);
  std::vector<std::string> va, vb;
  for (int i = 0; i < 30; ++i) {
    va.push_back("alpha" + std::to_string(i));
    vb.push_back("beta" + std::to_string(i));
  }
  std::vector<Document> w;
  std::unordered_set<std::string> target;
  for (int i = 0; i < 80; ++i) {
    const auto& vocab = i % 2 == 0 ? va : vb;
    std::string text;
    for (int t = 0; t < 12; ++t) text += vocab[rng() % vocab.size()] + " ";
    Document d{"w" + std::to_string(i), text, {}, {}};
    if (i % 2 == 0) target.insert(d.id);
    w.push_back(std::move(d));
  }
  auto index = InvertedIndex::build(w);
  std::vector<Document> seeds{{"seed-0", va[0] + " " + va[1] + " " + va[2], {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 5;
  cfg.target_size = 30;
  auto c = build_corpus(seeds, w, index, cfg);
  CHECK(c.docs.size() == 30);
  CHECK(reconstruction_accuracy(c, target) == 1.0);

  cfg.target_size = 60;
  auto all = build_corpus(seeds, w, index, cfg);
  CHECK(all.docs.size() <= 40);
  CHECK(reconstruction_accuracy(all, target) == 1.0);
  CHECK_FALSE(all.warnings.empty());

  CHECK(reconstruction_accuracy(SyntheticCorpus{}, target) == 0.0);
}

TEST_CASE("reconstruction accuracy is the on-target fraction") {
  SyntheticCorpus c;
  std::unordered_set<std::string> target;
  for (int i = 0; i < 100; ++i) {
    c.docs.push_back({Document{"x" + std::to_string(i), "", {}, {}}, 1, "seed"});
    if (i < 48) target.insert("x" + std::to_string(i));
  }
  CHECK(reconstruction_accuracy(c, target) == doctest::Approx(0.48));
}

TEST_CASE("planted collection with disjoint vocabularies") {
  // 200 on-topic documents among 1800 distractors drawn from nine other
  // vocabularies; no word is shared across topics.
  std::mt19937 rng(2024);
  auto word = [](int topic, int i) { return "v" + std::to_string(topic) + "x" + std::to_string(i); };
  std::vector<Document> w;
  std::unordered_set<std::string> target;
  for (int i = 0; i < 2000; ++i) {
    const int topic = i < 200 ? 0 : 1 + (i - 200) % 9;
    std::string text;
    for (int t = 0; t < 25; ++t) text += word(topic, static_cast<int>(rng() % 80)) + " ";
    Document d{"w" + std::to_string(i), text, {}, {}};
    if (topic == 0) target.insert(d.id);
    w.push_back(std::move(d));
  }
  auto index = InvertedIndex::build(w);
  std::string seed_text;
  for (int t = 0; t < 25; ++t) seed_text += word(0, static_cast<int>(rng() % 80)) + " ";
  std::vector<Document> seeds{{"seed-0", seed_text, {}, {}}};
  BuildConfig cfg;
  cfg.retrieval_depth = 10;
  cfg.target_size = 100;
  auto c = build_corpus(seeds, w, index, cfg);
  REQUIRE(c.docs.size() == 100);
  std::size_t on_topic = 0;
  for (const auto& d : c.docs) on_topic += target.contains(d.doc.id) ? 1 : 0;
  CHECK(on_topic >= 90);
}
