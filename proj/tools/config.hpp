#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "descadapt/corpus_builder.hpp"
#include "descadapt/dense_model.hpp"
#include "descadapt/gen_client.hpp"
#include "descadapt/pseudo_labeler.hpp"
#include "descadapt/query_gen.hpp"
#include "descadapt/trainer.hpp"

namespace descadapt::cli {

// Sectioned "key = value" file. Relative paths resolve against the file's
// directory. DESCADAPT_<SECTION>_<KEY> in the environment overrides a key.
struct PipelineConfig {
  std::filesystem::path collection;
  std::filesystem::path bank;
  std::filesystem::path description;
  std::filesystem::path out_dir;
  std::size_t examples = 3;

  std::uint64_t rng_seed = 0;
  BuildConfig build;
  QueryGenConfig queries;
  CandidateConfig candidates;
  std::string teacher = "bm25";
  EncoderConfig encoder;
  TrainConfig train;

  ClientMode client_mode = ClientMode::none;
  std::optional<std::string> mock_dir;
  std::optional<std::string> endpoint;

  // Optional held-out evaluation after training.
  std::optional<std::filesystem::path> eval_queries;
  std::optional<std::filesystem::path> eval_qrels;
  std::size_t eval_top_k = 100;
};

/// Throws ArgumentError on unknown keys, bad numbers or missing inputs and
/// IoError when the file itself cannot be read.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace descadapt::cli
