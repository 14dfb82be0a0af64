#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "descadapt/corpus_builder.hpp"
#include "descadapt/dense_model.hpp"
#include "descadapt/desc_understanding.hpp"
#include "descadapt/eval_metrics.hpp"
#include "descadapt/pseudo_labeler.hpp"
#include "descadapt/query_gen.hpp"
#include "descadapt/trainer.hpp"

namespace descadapt::cli {

namespace fs = std::filesystem;

void print_warnings(const std::vector<std::string>& warnings);

struct UnderstandArgs {
  fs::path description;
  fs::path bank;
  fs::path out;
  std::size_t examples = 3;
};
void run_understand(const UnderstandArgs& a, GeneratorClient* client);

struct SeedArgs {
  fs::path attributes;
  fs::path out;
  std::size_t num_seeds = 1;
};
void run_seed(const SeedArgs& a, GeneratorClient* client);

struct BuildArgs {
  fs::path collection;
  fs::path seeds;
  fs::path out;
  std::optional<fs::path> provenance;
  BuildConfig cfg;
};
void run_build_corpus(const BuildArgs& a);

struct GenqArgs {
  fs::path corpus;
  fs::path attributes;
  fs::path out;
  QueryGenConfig cfg;
};
void run_genq(const GenqArgs& a, GeneratorClient* client);

// Student used for dense candidates, search and as the training start:
// a checkpoint when given, otherwise a seeded random initialisation.
EncoderParams<double> load_or_init_student(const std::optional<fs::path>& checkpoint,
                                           const EncoderConfig& enc, std::uint64_t seed);

struct LabelArgs {
  fs::path corpus;
  fs::path queries;
  fs::path attributes;
  fs::path out;
  std::optional<fs::path> checkpoint;
  EncoderConfig encoder;
  std::uint64_t init_seed = 0;
  CandidateConfig cfg;
  std::string teacher = "bm25";
};
void run_label(const LabelArgs& a, std::shared_ptr<GeneratorClient> client);

struct TrainArgs {
  fs::path corpus;
  fs::path queries;
  fs::path labels;
  fs::path out;
  std::optional<fs::path> log;
  std::optional<fs::path> init;
  EncoderConfig encoder;
  TrainConfig cfg;
};
void run_train(const TrainArgs& a);

struct SearchArgs {
  fs::path corpus;
  fs::path queries;
  fs::path out;
  std::optional<fs::path> checkpoint;
  bool bm25 = false;
  EncoderConfig encoder;
  std::uint64_t init_seed = 0;
  std::size_t top_k = 100;
};
void run_search(const SearchArgs& a);

struct EvalArgs {
  fs::path run;
  fs::path qrels;
  std::optional<fs::path> compare;
  std::vector<std::string> metrics{"ndcg@10", "recall@100", "mrr"};
  std::optional<fs::path> out;
};
/// Returns the report text; also written to `out` when given.
std::string run_eval(const EvalArgs& a);

}  // namespace descadapt::cli
