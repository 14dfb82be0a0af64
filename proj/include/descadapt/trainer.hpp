#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "descadapt/dense_model.hpp"
#include "descadapt/pseudo_labeler.hpp"
#include "descadapt/query_gen.hpp"

namespace descadapt {

struct TrainConfig {
  double peak_lr = 1e-5;
  std::size_t warmup_steps = 100;
  std::size_t total_steps = 1'000;
  std::size_t batch_size = 8;
  double inbatch_weight = 1.0;  // lambda
  double temperature = 1.0;     // tau
  std::uint64_t rng_seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// Full-scale settings: warmup 4,000, batch 128.
TrainConfig full_scale_profile();
/// Desk-scale settings: warmup 100, batch 8.
TrainConfig desk_profile();

/// Throws ArgumentError on warmup > total, batch 0, tau <= 0, lambda < 0, lr < 0.
void validate(const TrainConfig& cfg);

/// 1-based ranks, 1 = highest score; ties go to the lower index.
std::vector<std::size_t> rank_in_list(std::span<const double> scores);

/// Sum over pairs with y_t(d) > y_t(d') of |1/pi(d) - 1/pi(d')| * ln(1 + e^(y_s(d') - y_s(d))),
/// pi = rank_in_list(y_s). Ranks are treated as constants.
double listwise_loss(std::span<const double> y_t, std::span<const double> y_s);
/// d listwise_loss / d y_s with the same constant-rank convention.
std::vector<double> listwise_loss_grad(std::span<const double> y_t, std::span<const double> y_s);

/// A query with its labeled candidates and pre-extracted n-gram features.
struct TrainingGroup {
  std::string query_id;
  NgramFeatures query;
  std::vector<std::string> doc_ids;
  std::vector<NgramFeatures> docs;
  std::vector<double> teacher_scores;
  /// Index of the teacher-top document (first on ties).
  std::size_t positive = 0;
};

/// Joins queries, labels and the corpus into training groups. Throws
/// ArgumentError when a query has no labels or a label names an unknown doc.
std::vector<TrainingGroup> make_training_groups(std::span<const Query> queries,
                                                std::span<const LabeledQuery> labels,
                                                const DocumentStore& corpus,
                                                const EncoderConfig& cfg);

/// Mean over queries of the softmax cross-entropy of the query's own
/// positive among all positives in the batch, scores divided by tau.
double inbatch_loss(std::span<const TrainingGroup> batch, const EncoderParams<double>& params,
                    double temperature = 1.0);

/// Linear warmup to peak_lr at warmup_steps, then linear decay to 0 at total_steps.
double lr_schedule(std::size_t step, const TrainConfig& cfg);

struct TrainStepLog {
  std::size_t step = 0;
  double lr = 0.0;
  double listwise = 0.0;
  double inbatch = 0.0;
  double total = 0.0;
};

struct TrainResult {
  EncoderParams<double> params;
  std::vector<TrainStepLog> log;
  bool stopped_early = false;
};

class TrainError : public std::runtime_error {
 public:
  TrainError(const std::string& what, std::size_t step, std::string query_id)
      : std::runtime_error(what), step_(step), query_id_(std::move(query_id)) {}
  std::size_t step() const noexcept { return step_; }
  const std::string& query_id() const noexcept { return query_id_; }

 private:
  std::size_t step_;
  std::string query_id_;
};

/// Called every `every` steps with the current parameters; returning true stops training.
struct EarlyStopHook {
  std::size_t every = 0;
  std::function<bool(std::size_t step, const EncoderParams<double>&)> should_stop;
};

/// total_steps Adam steps over seeded-shuffled batches of groups. Loss per
/// step = mean group listwise loss + lambda * in-batch loss, both measured
/// before the update.
TrainResult train(EncoderParams<double> student, std::span<const TrainingGroup> groups,
                  const TrainConfig& cfg, const EarlyStopHook& hook = {});

/// "step\tlr\tlistwise_loss\tinbatch_loss\ttotal" plus one row per step.
std::string format_train_log(std::span<const TrainStepLog> log);

}  // namespace descadapt
