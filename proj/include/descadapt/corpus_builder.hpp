#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "descadapt/gen_client.hpp"
#include "descadapt/lexical_index.hpp"
#include "descadapt/taxonomy.hpp"

namespace descadapt {

struct BuildConfig {
  std::size_t target_size = 10'000;   // N
  std::size_t retrieval_depth = 30;   // k
  std::size_t num_seeds = 1;
  std::size_t max_iterations = 1'000'000;
  /// Seed/queue documents are cut to this many tokens when used as a query.
  std::size_t max_query_tokens = 512;
  // The loop is deterministic and does not consume this; it is recorded with the run.
  std::uint64_t rng_seed = 0;
};

/// Throws ArgumentError unless k >= 1 and num_seeds >= 1.
void validate(const BuildConfig& cfg);

struct SeedResult {
  std::vector<Document> seeds;
  std::vector<std::string> warnings;
};

/// The prompt asking for one passage with the given document attributes.
std::string build_seed_prompt(const DomainAttributes& d_attr);

/// Generates one seed document ("seed-0"). Without a client, or when the
/// client fails, falls back to the Specified attribute values joined by
/// spaces and records a warning.
SeedResult generate_seed(const DomainAttributes& d_attr, GeneratorClient* client);
/// num_seeds seeds "seed-0", "seed-1", ...; duplicate texts are dropped.
SeedResult generate_seeds(const DomainAttributes& d_attr, GeneratorClient* client,
                          std::size_t num_seeds);

struct SyntheticDoc {
  Document doc;
  std::size_t iteration = 0;  // 1-based loop iteration that added it
  std::string parent;         // id of the queue document used as the query
};

struct SyntheticCorpus {
  std::vector<SyntheticDoc> docs;
  std::size_t iterations = 0;
  std::vector<std::string> warnings;

  std::vector<Document> documents() const;
};

/// Retrieval backend of the loop: (query text, k) -> ranked doc ids.
using Retriever = std::function<std::vector<SearchHit>(std::string_view, std::size_t)>;
/// Optional second-stage scorer over (query text, doc text).
using Reranker = std::function<double(std::string_view, std::string_view)>;

/// Iterative corpus growth: pop the front of a FIFO queue, retrieve k
/// documents for it, append unseen ones to both the corpus and the queue,
/// repeat while the corpus is smaller than N; then truncate to N.
/// `lookup` maps a retrieved id to its document.
SyntheticCorpus build_corpus(std::span<const Document> seeds, const Retriever& retrieve,
                             const std::function<const Document&(std::string_view)>& lookup,
                             const BuildConfig& cfg, const Reranker& reranker = {});

/// Same loop with BM25 over the collection W; `w_docs` is the indexed corpus
/// in index order.
SyntheticCorpus build_corpus(std::span<const Document> seeds, std::span<const Document> w_docs,
                             const InvertedIndex& w_index, const BuildConfig& cfg,
                             const Reranker& reranker = {});

/// Fraction of the corpus whose ids are in target_ids; 0 for an empty corpus.
double reconstruction_accuracy(const SyntheticCorpus& corpus,
                               const std::unordered_set<std::string>& target_ids);

}  // namespace descadapt
