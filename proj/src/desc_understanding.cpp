#include "descadapt/desc_understanding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "descadapt/error.hpp"
#include "descadapt/eval_metrics.hpp"
#include "descadapt/text.hpp"

namespace descadapt {

ExampleBank::ExampleBank(std::vector<DescriptionExample> examples) : examples_(std::move(examples)) {
  std::set<std::string> names;
  for (const auto& ex : examples_) {
    if (!names.insert(ex.name).second) throw ArgumentError("duplicate example name: " + ex.name);
    if (trim(ex.description).empty()) {
      throw ArgumentError("example " + ex.name + " has an empty description");
    }
  }
}

namespace {

using SparseVec = std::map<std::string, double>;

SparseVec term_counts(std::string_view text) {
  SparseVec tf;
  for (auto& t : tokenize(text)) tf[t] += 1.0;
  return tf;
}

double cosine(const SparseVec& a, const SparseVec& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [t, w] : a) {
    na += w * w;
    auto it = b.find(t);
    if (it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<double> TfidfSimilarity::similarities(std::string_view target,
                                                  std::span<const DescriptionExample> bank) const {
  std::vector<SparseVec> docs;
  std::map<std::string, double> df;
  for (const auto& ex : bank) {
    docs.push_back(term_counts(ex.description));
    for (const auto& [t, c] : docs.back()) df[t] += 1.0;
  }
  const auto n = static_cast<double>(bank.size());
  auto weigh = [&](SparseVec& v) {
    for (auto& [t, w] : v) {
      auto it = df.find(t);
      double d = it == df.end() ? 0.0 : it->second;
      w *= std::log((1.0 + n) / (1.0 + d)) + 1.0;
    }
  };
  auto target_vec = term_counts(target);
  weigh(target_vec);
  std::vector<double> out;
  out.reserve(docs.size());
  for (auto& d : docs) {
    weigh(d);
    out.push_back(cosine(target_vec, d));
  }
  return out;
}

std::vector<DescriptionExample> select_examples(std::string_view target, const ExampleBank& bank,
                                                std::size_t m, const DescriptionSimilarity& sim) {
  if (m == 0 || bank.size() == 0) return {};
  auto scores = sim.similarities(target, bank.examples());
  std::vector<std::size_t> order(bank.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(m, order.size()));
  std::vector<DescriptionExample> out;
  for (auto i : order) out.push_back(bank.examples()[i]);
  return out;
}

const std::string& default_instruction() {
  static const std::string text =
      "For each defined retrieval task in the Passage, find the values related to the relevance "
      "notion (e.g., topically relevant, contains the answer, references of a paper, paraphrase, "
      "evidence for the claim, etc.) as well as the following query and document attributes: "
      "query topic (e.g., medical, scientific, financial, mathematical, adult, etc.); query "
      "linguistic features (e.g., formal, informal, etc.); query language (e.g., english, french, "
      "etc.); query structure (e.g., unstructured, semi-structured, structured, etc.); query "
      "modality (e.g., text, image, video, etc.); query format (e.g., keyword query, tail query, "
      "question, claim, argument, passage, etc.); document topic (e.g., medical, scientific, "
      "financial, mathematical, adult, etc.); document linguistic features (e.g., formal, "
      "informal, etc.); document language (e.g., english, french, etc.); document structure "
      "(e.g., unstructured, semi-structured, structured, etc.); document modality (e.g., text, "
      "image, video, etc.); document format (e.g., passage, long document, question, etc.); "
      "document source (e.g., StackExchange, wikipedia, reddit, youtube, twitter, facebook, "
      "quora, etc.).\nIf the value of each attribute cannot be inferred, return NA";
  return text;
}

PromptBundle build_prompt(std::string_view target, std::vector<DescriptionExample> examples,
                          std::string_view instruction) {
  PromptBundle bundle;
  bundle.instruction = std::string(instruction);
  bundle.target_description = std::string(target);
  bundle.examples = std::move(examples);

  std::string r = bundle.instruction;
  r += "\n\n";
  for (const auto& ex : bundle.examples) {
    r += "Passage: ";
    r += ex.description;
    r += "\nAttributes:\n";
    r += serialize_attributes(ex.gold);
    r += '\n';
  }
  r += "Passage: ";
  r += bundle.target_description;
  r += "\nAttributes:\n";
  bundle.rendered = std::move(r);
  return bundle;
}

UnderstandResult understand(std::string_view target, const ExampleBank& bank,
                            GeneratorClient& client, std::size_t m,
                            const DescriptionSimilarity& sim) {
  auto bundle = build_prompt(target, select_examples(target, bank, m, sim));
  UnderstandResult result;
  result.prompt_hash = prompt_hash(bundle.rendered);

  GenRequest req;
  req.prompt = bundle.rendered;
  req.max_tokens = 512;
  GenResponse resp;
  try {
    resp = client.complete(req);
  } catch (const std::exception& e) {
    throw GenerationError("description understanding failed (prompt " + result.prompt_hash +
                              "): " + e.what(),
                          result.prompt_hash);
  }
  auto parsed = parse_attributes(resp.text);
  result.attributes = std::move(parsed.attributes);
  result.warnings = std::move(parsed.warnings);
  return result;
}

ExtractionReport evaluate_extraction(std::span<const DomainAttributes> preds,
                                     std::span<const DomainAttributes> golds) {
  if (preds.size() != golds.size()) {
    throw ArgumentError("evaluate_extraction: predictions and golds differ in length");
  }
  if (preds.empty()) throw ArgumentError("evaluate_extraction: empty dataset");

  ExtractionReport report;
  const auto n = static_cast<double>(preds.size());
  for (auto key : all_attribute_keys()) {
    auto& cell = report.per_attribute[static_cast<std::size_t>(key)];
    for (std::size_t i = 0; i < preds.size(); ++i) {
      auto ref = golds[i][key].render();
      auto hyp = preds[i][key].render();
      cell.rouge_l += rouge_l(ref, hyp);
      cell.exact_match += exact_match(ref, hyp);
    }
    cell.rouge_l /= n;
    cell.exact_match /= n;
    report.average.rouge_l += cell.rouge_l;
    report.average.exact_match += cell.exact_match;
  }
  report.average.rouge_l /= static_cast<double>(kNumAttributes);
  report.average.exact_match /= static_cast<double>(kNumAttributes);
  return report;
}

std::string format_extraction_report(const ExtractionReport& report) {
  std::string out = "attribute\trouge_l\texact_match\n";
  char buf[64];
  auto row = [&](std::string_view name, const ExtractionScores& s) {
    std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f\n", s.rouge_l, s.exact_match);
    out += name;
    out += buf;
  };
  for (auto key : all_attribute_keys()) {
    row(snake_name(key), report.per_attribute[static_cast<std::size_t>(key)]);
  }
  row("Average", report.average);
  return out;
}

}  // namespace descadapt
