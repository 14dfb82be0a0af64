#include "descadapt/pseudo_labeler.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <unordered_set>

#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt {

double Bm25Teacher::score(std::string_view query, std::string_view /*relevance_notion*/,
                          std::string_view doc_text) const {
  auto q = tokenize(query);
  auto d = tokenize(doc_text);
  return bm25_score_text(*index_, q, d);
}

std::string RemoteTeacher::build_prompt(std::string_view query, std::string_view relevance_notion,
                                        std::string_view doc_text) {
  std::string p =
      "Score how relevant the Document is to the Query under the given relevance notion. "
      "Answer with a single number.\nQuery: ";
  p += query;
  p += "\nRelevance notion: ";
  p += relevance_notion;
  p += "\nDocument: ";
  p += doc_text;
  p += "\nScore:";
  return p;
}

double RemoteTeacher::score(std::string_view query, std::string_view relevance_notion,
                            std::string_view doc_text) const {
  GenRequest req;
  req.prompt = build_prompt(query, relevance_notion, doc_text);
  req.max_tokens = 8;
  auto text = std::string(trim(client_->complete(req).text));
  char* end = nullptr;
  double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value)) {
    throw ProtocolError("teacher response is not a finite number: \"" + text + "\"");
  }
  return value;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::source:
      return "source";
    case Provenance::bm25_sample:
      return "bm25_sample";
    case Provenance::dense_sample:
      return "dense_sample";
  }
  return "source";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  if (name == "source") return Provenance::source;
  if (name == "bm25_sample") return Provenance::bm25_sample;
  if (name == "dense_sample") return Provenance::dense_sample;
  return std::nullopt;
}

namespace {

// Partial Fisher-Yates: the first `count` entries of a uniform shuffle.
std::vector<std::string> sample_without_replacement(const std::vector<SearchHit>& pool,
                                                    std::size_t count, std::mt19937_64& rng) {
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (const auto& h : pool) ids.push_back(h.doc_id);
  if (count >= ids.size()) return ids;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(count);
  return ids;
}

}  // namespace

CandidateSet build_candidates(const Query& q, const DocumentStore& corpus,
                              const InvertedIndex& bm25_index, DenseIndex<double>& dense_index,
                              const CandidateConfig& cfg) {
  if (!corpus.contains(q.source_doc_id)) {
    throw ArgumentError("query " + q.id + " has source document " + q.source_doc_id +
                        " which is not in the corpus");
  }
  CandidateSet set;
  set.query_id = q.id;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& id, Provenance p) {
    if (!seen.insert(id).second) return;
    set.doc_ids.push_back(id);
    set.provenance.push_back(p);
  };
  add(q.source_doc_id, Provenance::source);

  std::mt19937_64 rng(seeded_hash(q.id, cfg.rng_seed));
  auto bm25_pool = search(bm25_index, q.text, cfg.pool_depth);
  for (const auto& id : sample_without_replacement(bm25_pool, cfg.samples_per_pool, rng)) {
    add(id, Provenance::bm25_sample);
  }
  auto dense_pool = dense_index.search(q.text, cfg.pool_depth);
  for (const auto& id : sample_without_replacement(dense_pool, cfg.samples_per_pool, rng)) {
    add(id, Provenance::dense_sample);
  }
  return set;
}

LabeledQuery label(const Query& q, const CandidateSet& cands, const DomainAttributes& r_attr,
                   const DocumentStore& corpus, const TeacherScorer& teacher) {
  const auto& notion = r_attr[AttributeKey::relevance_notion];
  const std::string relevance = notion.is_na() ? std::string() : notion.text();

  LabeledQuery out;
  out.query_id = q.id;
  out.doc_ids = cands.doc_ids;
  out.provenance = cands.provenance;
  out.scores.reserve(cands.doc_ids.size());
  for (const auto& id : cands.doc_ids) {
    double s = 0.0;
    try {
      s = teacher.score(q.text, relevance, corpus.at(id).text);
    } catch (const std::exception& e) {
      throw LabelError("teacher failed on query " + q.id + ", document " + id + ": " + e.what(),
                       q.id);
    }
    if (!std::isfinite(s)) {
      throw LabelError("teacher returned a non-finite score on query " + q.id + ", document " + id,
                       q.id);
    }
    out.scores.push_back(s);
  }
  return out;
}

}  // namespace descadapt
