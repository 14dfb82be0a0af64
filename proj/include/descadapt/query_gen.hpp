#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "descadapt/gen_client.hpp"
#include "descadapt/lexical_index.hpp"
#include "descadapt/taxonomy.hpp"

namespace descadapt {

struct Query {
  std::string id;
  std::string text;
  std::string source_doc_id;

  friend bool operator==(const Query&, const Query&) = default;
};

struct QueryGenConfig {
  std::size_t k_prime = 5;
  /// Terms per fallback keyword query.
  std::size_t window = 3;
  std::uint64_t rng_seed = 0;
  /// Sampling temperature sent to the client when asking for k' queries.
  double temperature = 0.7;
};

/// "Generate a query for the following Passage based on the given
/// Attributes. Passage: <text>. Attributes: <key: value; ...>." with only
/// the Specified query-side and relevance attributes listed.
std::string build_qg_prompt(const Document& doc, const DomainAttributes& q_attr,
                            const DomainAttributes& r_attr);

/// Offline query generator: terms ranked by tf-idf against the corpus,
/// sliding windows over the ranking, then seeded random term subsets until
/// k' distinct queries exist or the document runs out of combinations.
class FallbackQueryGenerator {
 public:
  FallbackQueryGenerator(std::span<const Document> corpus, const DomainAttributes& q_attr,
                         QueryGenConfig cfg);

  /// Up to `count` distinct queries not already in `exclude`.
  std::vector<std::string> generate(const Document& doc, std::size_t count,
                                    const std::vector<std::string>& exclude = {}) const;

  /// Document terms, highest tf-idf first; ties keep first occurrence.
  std::vector<std::string> ranked_terms(const Document& doc) const;

 private:
  std::unordered_map<std::string, std::size_t> df_;
  std::size_t num_docs_ = 0;
  bool question_format_ = false;
  QueryGenConfig cfg_;
};

struct QueryGenResult {
  std::vector<Query> queries;
  std::vector<std::string> warnings;
};

/// k' queries per corpus document, ids "q-<docid>-<j>", in corpus order.
/// With a client: one request per document asking for k' lines; failures,
/// empty lines and duplicates are refilled from the fallback generator.
QueryGenResult generate_queries(std::span<const Document> corpus, const DomainAttributes& q_attr,
                                const DomainAttributes& r_attr, const QueryGenConfig& cfg,
                                GeneratorClient* client);

}  // namespace descadapt
