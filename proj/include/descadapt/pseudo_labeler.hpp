#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descadapt/dense_model.hpp"
#include "descadapt/gen_client.hpp"
#include "descadapt/lexical_index.hpp"
#include "descadapt/query_gen.hpp"
#include "descadapt/taxonomy.hpp"

namespace descadapt {

/// Scores (query, relevance notion, document). Must be deterministic per triple.
class TeacherScorer {
 public:
  virtual ~TeacherScorer() = default;
  virtual double score(std::string_view query, std::string_view relevance_notion,
                       std::string_view doc_text) const = 0;
};

/// BM25 of the document text against the synthetic corpus statistics.
/// Ignores the relevance notion.
class Bm25Teacher final : public TeacherScorer {
 public:
  explicit Bm25Teacher(const InvertedIndex& index) : index_(&index) {}
  double score(std::string_view query, std::string_view relevance_notion,
               std::string_view doc_text) const override;

 private:
  const InvertedIndex* index_;
};

/// Teacher behind the generator wire protocol; the completion must be a number.
class RemoteTeacher final : public TeacherScorer {
 public:
  explicit RemoteTeacher(std::shared_ptr<GeneratorClient> client) : client_(std::move(client)) {}
  double score(std::string_view query, std::string_view relevance_notion,
               std::string_view doc_text) const override;

  static std::string build_prompt(std::string_view query, std::string_view relevance_notion,
                                  std::string_view doc_text);

 private:
  std::shared_ptr<GeneratorClient> client_;
};

enum class Provenance { source, bm25_sample, dense_sample };

std::string_view to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view name);

struct CandidateSet {
  std::string query_id;
  std::vector<std::string> doc_ids;
  std::vector<Provenance> provenance;  // aligned with doc_ids
};

struct CandidateConfig {
  std::size_t pool_depth = 100;
  std::size_t samples_per_pool = 25;
  std::uint64_t rng_seed = 0;
};

/// The query's source document, then `samples_per_pool` uniform draws
/// without replacement from the BM25 top-`pool_depth` and from the dense
/// top-`pool_depth`, deduplicated keeping the first provenance. The RNG is
/// seeded from (rng_seed, query id) so call order never changes samples.
/// Throws ArgumentError when the source document is not in the corpus.
CandidateSet build_candidates(const Query& q, const DocumentStore& corpus,
                              const InvertedIndex& bm25_index, DenseIndex<double>& dense_index,
                              const CandidateConfig& cfg);

/// Raw teacher scores keyed by document id.
struct LabeledQuery {
  std::string query_id;
  std::vector<std::string> doc_ids;
  std::vector<Provenance> provenance;
  std::vector<double> scores;
};

/// Thrown when the teacher fails for a (query, document) pair.
class LabelError : public std::runtime_error {
 public:
  LabelError(const std::string& what, std::string query_id)
      : std::runtime_error(what), query_id_(std::move(query_id)) {}
  const std::string& query_id() const noexcept { return query_id_; }

 private:
  std::string query_id_;
};

/// One teacher call per candidate; the relevance notion is the r_attr value
/// or "" when NA.
LabeledQuery label(const Query& q, const CandidateSet& cands, const DomainAttributes& r_attr,
                   const DocumentStore& corpus, const TeacherScorer& teacher);

}  // namespace descadapt
