#include "descadapt/lexical_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "descadapt/error.hpp"

namespace descadapt {

DocumentStore::DocumentStore(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (!positions_.emplace(docs_[i].id, i).second) {
      throw ArgumentError("duplicate document id: " + docs_[i].id);
    }
  }
}

const Document& DocumentStore::at(std::string_view id) const {
  auto it = positions_.find(std::string(id));
  if (it == positions_.end()) throw ArgumentError("unknown document id: " + std::string(id));
  return docs_[it->second];
}

InvertedIndex InvertedIndex::build(std::span<const Document> corpus, Bm25Params params) {
  InvertedIndex index;
  index.params_ = params;
  index.doc_ids_.reserve(corpus.size());
  index.doc_lengths_.reserve(corpus.size());

  std::uint64_t total_length = 0;
  for (std::size_t pos = 0; pos < corpus.size(); ++pos) {
    const auto& doc = corpus[pos];
    if (!index.doc_positions_.emplace(doc.id, pos).second) {
      throw ArgumentError("duplicate document id: " + doc.id);
    }
    index.doc_ids_.push_back(doc.id);

    auto tokens = tokenize(doc.text);
    // Ordered so the per-document term order, and therefore the term id
    // assignment, does not depend on hash iteration order.
    std::map<std::string, std::uint32_t> counts;
    for (auto& t : tokens) ++counts[t];
    for (const auto& [term, tf] : counts) {
      auto [it, inserted] = index.term_ids_.emplace(term, index.postings_.size());
      if (inserted) index.postings_.emplace_back();
      index.postings_[it->second].push_back({static_cast<std::uint32_t>(pos), tf});
    }
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total_length += tokens.size();
  }
  index.avg_doc_length_ =
      corpus.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(corpus.size());
  return index;
}

std::optional<std::size_t> InvertedIndex::doc_position(std::string_view id) const {
  auto it = doc_positions_.find(std::string(id));
  if (it == doc_positions_.end()) return std::nullopt;
  return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return {};
  return postings_[it->second];
}

double InvertedIndex::idf(std::size_t df) const {
  auto n = static_cast<double>(num_docs());
  auto d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double InvertedIndex::term_score(std::size_t df, std::uint32_t tf, std::uint32_t doc_length) const {
  if (tf == 0) return 0.0;
  const double f = tf;
  // avgdl is 0 only for an empty collection; treat every length as average then.
  const double norm_len = avg_doc_length_ > 0.0 ? doc_length / avg_doc_length_ : 1.0;
  const double denom = f + params_.k1 * (1.0 - params_.b + params_.b * norm_len);
  return idf(df) * f * (params_.k1 + 1.0) / denom;
}

std::vector<std::string> distinct_terms(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

double bm25_score(const InvertedIndex& index, std::span<const std::string> query_tokens,
                  std::string_view doc_id) {
  auto pos = index.doc_position(doc_id);
  if (!pos) throw ArgumentError("unknown document id: " + std::string(doc_id));
  const auto doc = static_cast<std::uint32_t>(*pos);
  double score = 0.0;
  for (const auto& term : distinct_terms(query_tokens)) {
    auto plist = index.postings(term);
    auto it = std::lower_bound(plist.begin(), plist.end(), doc,
                               [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (it != plist.end() && it->doc == doc) {
      score += index.term_score(plist.size(), it->tf, index.doc_length(doc));
    }
  }
  return score;
}

double bm25_score_text(const InvertedIndex& index, std::span<const std::string> query_tokens,
                       std::span<const std::string> doc_tokens) {
  double score = 0.0;
  const auto length = static_cast<std::uint32_t>(doc_tokens.size());
  for (const auto& term : distinct_terms(query_tokens)) {
    auto tf = static_cast<std::uint32_t>(std::count(doc_tokens.begin(), doc_tokens.end(), term));
    if (tf == 0) continue;
    score += index.term_score(index.document_frequency(term), tf, length);
  }
  return score;
}

void sort_and_truncate(std::vector<SearchHit>& hits, std::size_t top_k) {
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  if (top_k < hits.size()) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(top_k), hits.end(),
                      better);
    hits.resize(top_k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
}

std::vector<SearchHit> search_tokens(const InvertedIndex& index,
                                     std::span<const std::string> query_tokens, std::size_t top_k) {
  if (top_k == 0) return {};
  // Term-at-a-time accumulation in the same term order bm25_score uses, so
  // the sums are bitwise identical to scoring each document directly.
  std::vector<double> acc(index.num_docs(), 0.0);
  std::vector<char> touched(index.num_docs(), 0);
  for (const auto& term : distinct_terms(query_tokens)) {
    auto plist = index.postings(term);
    for (const auto& p : plist) {
      acc[p.doc] += index.term_score(plist.size(), p.tf, index.doc_length(p.doc));
      touched[p.doc] = 1;
    }
  }
  std::vector<SearchHit> hits;
  for (std::size_t d = 0; d < acc.size(); ++d) {
    if (touched[d]) hits.push_back({index.doc_id(d), acc[d]});
  }
  sort_and_truncate(hits, top_k);
  return hits;
}

std::vector<SearchHit> search(const InvertedIndex& index, std::string_view query_text,
                              std::size_t top_k) {
  auto tokens = tokenize(query_text);
  return search_tokens(index, tokens, top_k);
}

}  // namespace descadapt
