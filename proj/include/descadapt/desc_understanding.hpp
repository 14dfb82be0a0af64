#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descadapt/gen_client.hpp"
#include "descadapt/taxonomy.hpp"

namespace descadapt {

struct DescriptionExample {
  std::string name;
  std::string description;
  DomainAttributes gold;
};

/// Annotated descriptions of known domains. Names are unique, descriptions non-empty.
class ExampleBank {
 public:
  ExampleBank() = default;
  /// Throws ArgumentError on a duplicate name or empty description.
  explicit ExampleBank(std::vector<DescriptionExample> examples);

  std::span<const DescriptionExample> examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }

 private:
  std::vector<DescriptionExample> examples_;
};

/// Scores a target description against every bank entry (higher is closer).
class DescriptionSimilarity {
 public:
  virtual ~DescriptionSimilarity() = default;
  virtual std::vector<double> similarities(std::string_view target,
                                           std::span<const DescriptionExample> bank) const = 0;
};

/// Cosine over raw-tf x smoothed-idf unigram vectors, idf = ln((1+n)/(1+df)) + 1
/// with document frequencies taken over the bank descriptions.
class TfidfSimilarity final : public DescriptionSimilarity {
 public:
  std::vector<double> similarities(std::string_view target,
                                   std::span<const DescriptionExample> bank) const override;
};

/// The m most similar bank entries, descending; ties keep bank order.
std::vector<DescriptionExample> select_examples(std::string_view target, const ExampleBank& bank,
                                                std::size_t m,
                                                const DescriptionSimilarity& sim = TfidfSimilarity{});

/// The instruction text that asks for every attribute value or NA.
const std::string& default_instruction();

struct PromptBundle {
  std::string instruction;
  std::vector<DescriptionExample> examples;
  std::string target_description;
  std::string rendered;
};

PromptBundle build_prompt(std::string_view target, std::vector<DescriptionExample> examples,
                          std::string_view instruction = default_instruction());

struct UnderstandResult {
  DomainAttributes attributes;
  std::vector<std::string> warnings;
  std::string prompt_hash;
};

/// Prompts the client with the retrieval-augmented prompt and parses the completion.
/// Client failures are rethrown as GenerationError carrying the prompt hash.
UnderstandResult understand(std::string_view target, const ExampleBank& bank,
                            GeneratorClient& client, std::size_t m = 3,
                            const DescriptionSimilarity& sim = TfidfSimilarity{});

struct ExtractionScores {
  double rouge_l = 0.0;
  double exact_match = 0.0;
};

struct ExtractionReport {
  std::array<ExtractionScores, kNumAttributes> per_attribute{};
  ExtractionScores average;
};

/// Mean ROUGE-L and EM per attribute over paired predictions and golds,
/// NA scored as the literal "na"; average is the mean over attributes.
ExtractionReport evaluate_extraction(std::span<const DomainAttributes> preds,
                                     std::span<const DomainAttributes> golds);

/// TSV: header then 15 attribute rows and an "Average" row.
std::string format_extraction_report(const ExtractionReport& report);

}  // namespace descadapt
