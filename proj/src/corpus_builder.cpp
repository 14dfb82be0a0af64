#include "descadapt/corpus_builder.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt {

void validate(const BuildConfig& cfg) {
  if (cfg.retrieval_depth < 1) throw ArgumentError("build config: k must be >= 1");
  if (cfg.num_seeds < 1) throw ArgumentError("build config: num_seeds must be >= 1");
}

std::string build_seed_prompt(const DomainAttributes& d_attr) {
  std::string prompt =
      "Write one passage that could belong to a document collection with the following "
      "document attributes.\nAttributes:\n";
  for (auto key : all_attribute_keys()) {
    if (side_of(key) != AttributeSide::document || d_attr[key].is_na()) continue;
    prompt += display_name(key);
    prompt += ": ";
    prompt += d_attr[key].text();
    prompt += '\n';
  }
  prompt += "Passage:";
  return prompt;
}

namespace {

std::string fallback_seed_text(const DomainAttributes& d_attr) {
  std::string text;
  for (auto key : all_attribute_keys()) {
    if (side_of(key) != AttributeSide::document || d_attr[key].is_na()) continue;
    if (!text.empty()) text += ' ';
    text += d_attr[key].text();
  }
  return text;
}

}  // namespace

SeedResult generate_seeds(const DomainAttributes& d_attr, GeneratorClient* client,
                          std::size_t num_seeds) {
  if (num_seeds < 1) throw ArgumentError("num_seeds must be >= 1");
  SeedResult result;
  const auto prompt = build_seed_prompt(d_attr);
  for (std::size_t i = 0; i < num_seeds; ++i) {
    std::string text;
    bool generated = false;
    if (client != nullptr) {
      try {
        GenRequest req;
        req.prompt = prompt;
        req.max_tokens = 512;
        // Extra seeds need diverse samples; the first is greedy.
        req.temperature = i == 0 ? 0.0 : 0.7;
        text = std::string(trim(client->complete(req).text));
        generated = true;
      } catch (const std::exception& e) {
        result.warnings.push_back(std::string("seed generation failed, using attribute fallback: ") +
                                  e.what());
      }
    } else {
      result.warnings.push_back("no generator client, using attribute fallback seed");
    }
    if (!generated) {
      text = fallback_seed_text(d_attr);
      if (text.empty()) result.warnings.push_back("fallback seed is empty: every document attribute is NA");
    }
    bool duplicate = std::any_of(result.seeds.begin(), result.seeds.end(),
                                 [&](const Document& d) { return d.text == text; });
    if (duplicate) {
      result.warnings.push_back("dropped duplicate seed text");
      continue;
    }
    Document doc;
    doc.id = "seed-" + std::to_string(result.seeds.size());
    doc.text = std::move(text);
    doc.source_tag = generated ? "generated" : "fallback";
    result.seeds.push_back(std::move(doc));
  }
  return result;
}

SeedResult generate_seed(const DomainAttributes& d_attr, GeneratorClient* client) {
  return generate_seeds(d_attr, client, 1);
}

std::vector<Document> SyntheticCorpus::documents() const {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.doc);
  return out;
}

namespace {

std::string query_prefix(std::string_view text, std::size_t max_tokens) {
  auto tokens = tokenize(text);
  if (tokens.size() > max_tokens) tokens.resize(max_tokens);
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

SyntheticCorpus build_corpus(std::span<const Document> seeds, const Retriever& retrieve,
                             const std::function<const Document&(std::string_view)>& lookup,
                             const BuildConfig& cfg, const Reranker& reranker) {
  validate(cfg);
  SyntheticCorpus corpus;
  if (cfg.target_size == 0) return corpus;
  if (seeds.empty()) throw ArgumentError("build_corpus needs at least one seed document");

  std::deque<Document> queue;
  std::unordered_set<std::string> enqueued;
  for (const auto& s : seeds) {
    if (enqueued.insert(s.id).second) queue.push_back(s);
  }
  std::unordered_set<std::string> in_corpus;

  while (corpus.docs.size() < cfg.target_size && !queue.empty() &&
         corpus.iterations < cfg.max_iterations) {
    Document current = std::move(queue.front());
    queue.pop_front();
    ++corpus.iterations;

    const auto query = query_prefix(current.text, cfg.max_query_tokens);
    auto hits = retrieve(query, cfg.retrieval_depth);
    if (reranker && hits.size() > 1) {
      std::vector<double> scores;
      scores.reserve(hits.size());
      for (const auto& h : hits) scores.push_back(reranker(query, lookup(h.doc_id).text));
      std::vector<std::size_t> order(hits.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      std::vector<SearchHit> reordered;
      for (auto i : order) reordered.push_back({hits[i].doc_id, scores[i]});
      hits = std::move(reordered);
    }

    for (const auto& hit : hits) {
      if (!in_corpus.insert(hit.doc_id).second) continue;
      const Document& doc = lookup(hit.doc_id);
      corpus.docs.push_back({doc, corpus.iterations, current.id});
      if (enqueued.insert(doc.id).second) queue.push_back(doc);
    }
  }

  if (corpus.docs.size() > cfg.target_size) corpus.docs.resize(cfg.target_size);
  if (corpus.docs.size() < cfg.target_size) {
    std::string reason = queue.empty() ? "seed queue exhausted" : "max_iterations reached";
    corpus.warnings.push_back(reason + ": built " + std::to_string(corpus.docs.size()) + " of " +
                              std::to_string(cfg.target_size) + " documents");
  }
  return corpus;
}

SyntheticCorpus build_corpus(std::span<const Document> seeds, std::span<const Document> w_docs,
                             const InvertedIndex& w_index, const BuildConfig& cfg,
                             const Reranker& reranker) {
  if (w_docs.size() != w_index.num_docs()) {
    throw ArgumentError("collection and index disagree on document count");
  }
  auto retrieve = [&](std::string_view q, std::size_t k) { return search(w_index, q, k); };
  auto lookup = [&](std::string_view id) -> const Document& {
    auto pos = w_index.doc_position(id);
    if (!pos) throw ArgumentError("retrieved id not in collection: " + std::string(id));
    return w_docs[*pos];
  };
  return build_corpus(seeds, retrieve, lookup, cfg, reranker);
}

double reconstruction_accuracy(const SyntheticCorpus& corpus,
                               const std::unordered_set<std::string>& target_ids) {
  if (corpus.docs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& d : corpus.docs) hits += target_ids.contains(d.doc.id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(corpus.docs.size());
}

}  // namespace descadapt
