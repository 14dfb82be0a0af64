#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "descadapt/text.hpp"

namespace descadapt {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> title;
  std::optional<std::string> source_tag;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Documents with id lookup. Throws ArgumentError on duplicate ids.
class DocumentStore {
 public:
  DocumentStore() = default;
  explicit DocumentStore(std::vector<Document> docs);

  std::span<const Document> docs() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool contains(std::string_view id) const { return positions_.contains(std::string(id)); }
  /// Throws ArgumentError for an unknown id.
  const Document& at(std::string_view id) const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> positions_;
};

/// One entry of a ranked result list.
struct SearchHit {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

struct Posting {
  std::uint32_t doc;  // position in the index's document table
  std::uint32_t tf;
};

/// BM25 inverted index. Immutable after construction.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Throws ArgumentError naming the first duplicated id.
  static InvertedIndex build(std::span<const Document> corpus, Bm25Params params = {});

  std::size_t num_docs() const noexcept { return doc_ids_.size(); }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  const Bm25Params& params() const noexcept { return params_; }

  const std::string& doc_id(std::size_t pos) const { return doc_ids_.at(pos); }
  std::uint32_t doc_length(std::size_t pos) const { return doc_lengths_.at(pos); }
  std::optional<std::size_t> doc_position(std::string_view id) const;

  /// Postings sorted by document position; empty span for unseen terms.
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }
  std::size_t vocabulary_size() const noexcept { return term_ids_.size(); }

  /// Lucene-style idf, ln(1 + (N - df + 0.5) / (df + 0.5)).
  double idf(std::size_t df) const;
  /// Saturated, length-normalized term weight times idf.
  double term_score(std::size_t df, std::uint32_t tf, std::uint32_t doc_length) const;

 private:
  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  std::unordered_map<std::string, std::size_t> doc_positions_;
  std::unordered_map<std::string, std::size_t> term_ids_;
  std::vector<std::vector<Posting>> postings_;
  double avg_doc_length_ = 0.0;
};

/// Distinct tokens in first-occurrence order.
std::vector<std::string> distinct_terms(std::span<const std::string> tokens);

/// BM25 of an indexed document. Throws ArgumentError for an unknown id.
double bm25_score(const InvertedIndex& index, std::span<const std::string> query_tokens,
                  std::string_view doc_id);

/// BM25 of arbitrary text against the index's collection statistics.
/// Equals bm25_score for documents that are in the index.
double bm25_score_text(const InvertedIndex& index, std::span<const std::string> query_tokens,
                       std::span<const std::string> doc_tokens);

/// Top-k documents containing at least one query term; score desc, id asc.
std::vector<SearchHit> search(const InvertedIndex& index, std::string_view query_text,
                              std::size_t top_k);
std::vector<SearchHit> search_tokens(const InvertedIndex& index,
                                     std::span<const std::string> query_tokens, std::size_t top_k);

/// Orders hits by descending score, ascending doc id, and keeps the first top_k.
void sort_and_truncate(std::vector<SearchHit>& hits, std::size_t top_k);

}  // namespace descadapt
