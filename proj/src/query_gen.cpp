#include "descadapt/query_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "descadapt/dense_model.hpp"
#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt {

std::string build_qg_prompt(const Document& doc, const DomainAttributes& q_attr,
                            const DomainAttributes& r_attr) {
  std::string attrs;
  for (auto key : all_attribute_keys()) {
    const auto side = side_of(key);
    const AttributeValue* value = nullptr;
    if (side == AttributeSide::query) value = &q_attr[key];
    if (side == AttributeSide::relevance) value = &r_attr[key];
    if (value == nullptr || value->is_na()) continue;
    if (!attrs.empty()) attrs += "; ";
    attrs += display_name(key);
    attrs += ": ";
    attrs += value->text();
  }
  std::string prompt = "Generate a query for the following Passage based on the given Attributes.";
  prompt += " Passage: ";
  prompt += trim(doc.text);
  prompt += ". Attributes: ";
  prompt += attrs;
  prompt += '.';
  return prompt;
}

FallbackQueryGenerator::FallbackQueryGenerator(std::span<const Document> corpus,
                                               const DomainAttributes& q_attr, QueryGenConfig cfg)
    : num_docs_(corpus.size()), cfg_(cfg) {
  if (cfg_.window < 1) throw ArgumentError("fallback query window must be >= 1");
  for (const auto& doc : corpus) {
    for (const auto& t : distinct_terms(tokenize(doc.text))) ++df_[t];
  }
  const auto& fmt = q_attr[AttributeKey::query_format];
  question_format_ = fmt.is_specified() && fmt.text().find("question") != std::string::npos;
}

std::vector<std::string> FallbackQueryGenerator::ranked_terms(const Document& doc) const {
  auto tokens = tokenize(doc.text);
  auto terms = distinct_terms(tokens);
  const auto n = static_cast<double>(num_docs_);
  std::vector<double> weight(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto tf = static_cast<double>(std::count(tokens.begin(), tokens.end(), terms[i]));
    auto it = df_.find(terms[i]);
    double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    weight[i] = tf * (std::log((1.0 + n) / (1.0 + df)) + 1.0);
  }
  std::vector<std::size_t> order(terms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
  std::vector<std::string> ranked;
  ranked.reserve(terms.size());
  for (auto i : order) ranked.push_back(terms[i]);
  return ranked;
}

std::vector<std::string> FallbackQueryGenerator::generate(
    const Document& doc, std::size_t count, const std::vector<std::string>& exclude) const {
  std::vector<std::string> out;
  if (count == 0) return out;
  const auto terms = ranked_terms(doc);
  if (terms.empty()) return out;

  std::unordered_set<std::string> seen(exclude.begin(), exclude.end());
  auto offer = [&](const std::vector<std::string>& words) {
    std::string q = question_format_ ? "what is" : "";
    for (const auto& w : words) {
      if (!q.empty()) q += ' ';
      q += w;
    }
    if (seen.insert(q).second) out.push_back(std::move(q));
  };

  const std::size_t w = std::min(cfg_.window, terms.size());
  for (std::size_t start = 0; start + w <= terms.size() && out.size() < count; ++start) {
    offer({terms.begin() + static_cast<std::ptrdiff_t>(start),
           terms.begin() + static_cast<std::ptrdiff_t>(start + w)});
  }

  // Random subsets of the leading terms, kept in rank order.
  std::mt19937_64 rng(seeded_hash(doc.id, cfg_.rng_seed));
  const std::size_t pool = std::min(terms.size(), 2 * cfg_.window + count);
  std::vector<std::size_t> idx(pool);
  for (std::size_t attempt = 0; attempt < 20 * count && out.size() < count; ++attempt) {
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> pick(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(w));
    std::sort(pick.begin(), pick.end());
    std::vector<std::string> words;
    for (auto i : pick) words.push_back(terms[i]);
    offer(words);
  }
  return out;
}

namespace {

std::vector<std::string> parse_generated_lines(const std::string& text, std::size_t limit) {
  std::vector<std::string> out;
  for (auto line : split(text, "\n")) {
    auto q = std::string(trim(line));
    if (q.empty() || std::find(out.begin(), out.end(), q) != out.end()) continue;
    out.push_back(std::move(q));
    if (out.size() == limit) break;
  }
  return out;
}

}  // namespace

QueryGenResult generate_queries(std::span<const Document> corpus, const DomainAttributes& q_attr,
                                const DomainAttributes& r_attr, const QueryGenConfig& cfg,
                                GeneratorClient* client) {
  if (cfg.k_prime < 1) throw ArgumentError("k' must be >= 1");
  FallbackQueryGenerator fallback(corpus, q_attr, cfg);
  QueryGenResult result;

  for (const auto& doc : corpus) {
    std::vector<std::string> texts;
    if (client != nullptr) {
      GenRequest req;
      req.prompt = build_qg_prompt(doc, q_attr, r_attr) + "\nWrite " +
                   std::to_string(cfg.k_prime) + " different queries, one per line.";
      req.max_tokens = 64 * static_cast<int>(cfg.k_prime);
      req.temperature = cfg.temperature;
      try {
        texts = parse_generated_lines(client->complete(req).text, cfg.k_prime);
      } catch (const std::exception& e) {
        result.warnings.push_back("query generation failed for " + doc.id +
                                  ", using fallback: " + e.what());
      }
    }
    if (texts.size() < cfg.k_prime) {
      auto extra = fallback.generate(doc, cfg.k_prime - texts.size(), texts);
      texts.insert(texts.end(), extra.begin(), extra.end());
    }
    if (texts.size() < cfg.k_prime) {
      result.warnings.push_back("document " + doc.id + " yielded " + std::to_string(texts.size()) +
                                " of " + std::to_string(cfg.k_prime) + " queries");
    }
    for (std::size_t j = 0; j < texts.size(); ++j) {
      result.queries.push_back({"q-" + doc.id + "-" + std::to_string(j), texts[j], doc.id});
    }
  }
  return result;
}

}  // namespace descadapt
