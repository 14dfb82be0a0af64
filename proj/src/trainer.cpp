#include "descadapt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_map>

#include "descadapt/error.hpp"

namespace descadapt {

TrainConfig full_scale_profile() {
  TrainConfig cfg;
  cfg.warmup_steps = 4'000;
  cfg.total_steps = 40'000;
  cfg.batch_size = 128;
  return cfg;
}

TrainConfig desk_profile() { return TrainConfig{}; }

void validate(const TrainConfig& cfg) {
  if (cfg.warmup_steps > cfg.total_steps) throw ArgumentError("warmup_steps exceeds total_steps");
  if (cfg.batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(cfg.temperature > 0.0)) throw ArgumentError("temperature must be > 0");
  if (!(cfg.inbatch_weight >= 0.0)) throw ArgumentError("inbatch_weight must be >= 0");
  if (!(cfg.peak_lr >= 0.0)) throw ArgumentError("peak_lr must be >= 0");
  if (!(cfg.adam_eps > 0.0)) throw ArgumentError("adam_eps must be > 0");
}

std::vector<std::size_t> rank_in_list(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> ranks(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
  return ranks;
}

namespace {

void check_lengths(std::span<const double> y_t, std::span<const double> y_s) {
  if (y_t.size() != y_s.size()) throw ArgumentError("teacher and student score lists differ in length");
  if (y_t.empty()) throw ArgumentError("listwise loss needs at least one document");
}

// ln(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double listwise_loss(std::span<const double> y_t, std::span<const double> y_s) {
  check_lengths(y_t, y_s);
  const auto ranks = rank_in_list(y_s);
  double loss = 0.0;
  for (std::size_t i = 0; i < y_t.size(); ++i) {
    for (std::size_t j = 0; j < y_t.size(); ++j) {
      if (!(y_t[i] > y_t[j])) continue;
      const double w = std::fabs(1.0 / static_cast<double>(ranks[i]) -
                                 1.0 / static_cast<double>(ranks[j]));
      loss += w * softplus(y_s[j] - y_s[i]);
    }
  }
  return loss;
}

std::vector<double> listwise_loss_grad(std::span<const double> y_t, std::span<const double> y_s) {
  check_lengths(y_t, y_s);
  const auto ranks = rank_in_list(y_s);
  std::vector<double> grad(y_s.size(), 0.0);
  for (std::size_t i = 0; i < y_t.size(); ++i) {
    for (std::size_t j = 0; j < y_t.size(); ++j) {
      if (!(y_t[i] > y_t[j])) continue;
      const double w = std::fabs(1.0 / static_cast<double>(ranks[i]) -
                                 1.0 / static_cast<double>(ranks[j]));
      const double g = w * sigmoid(y_s[j] - y_s[i]);
      grad[i] -= g;
      grad[j] += g;
    }
  }
  return grad;
}

std::vector<TrainingGroup> make_training_groups(std::span<const Query> queries,
                                                std::span<const LabeledQuery> labels,
                                                const DocumentStore& corpus,
                                                const EncoderConfig& cfg) {
  std::unordered_map<std::string, const LabeledQuery*> by_query;
  for (const auto& l : labels) by_query.emplace(l.query_id, &l);

  std::vector<TrainingGroup> groups;
  groups.reserve(queries.size());
  for (const auto& q : queries) {
    auto it = by_query.find(q.id);
    if (it == by_query.end() || it->second->doc_ids.empty()) {
      throw ArgumentError("query " + q.id + " has no labels");
    }
    const auto& l = *it->second;
    if (l.scores.size() != l.doc_ids.size()) {
      throw ArgumentError("labels for query " + q.id + " are misaligned");
    }
    TrainingGroup g;
    g.query_id = q.id;
    g.query = extract_features(q.text, cfg);
    g.doc_ids = l.doc_ids;
    g.teacher_scores = l.scores;
    for (const auto& id : l.doc_ids) g.docs.push_back(extract_features(corpus.at(id).text, cfg));
    g.positive = static_cast<std::size_t>(
        std::max_element(g.teacher_scores.begin(), g.teacher_scores.end()) -
        g.teacher_scores.begin());
    groups.push_back(std::move(g));
  }
  return groups;
}

namespace {

using Vec = Embedding<double>;
using Table = EncoderParams<double>::Table;

// One encoded text within a step, with the gradient w.r.t. its unit embedding.
struct Node {
  const NgramFeatures* features = nullptr;
  Vec pooled;
  double norm = 0.0;
  Vec unit;
  Vec grad_unit;
};

Node make_node(const EncoderParams<double>& params, const NgramFeatures& f) {
  Node n;
  n.features = &f;
  n.pooled = pool(params, f);
  n.norm = n.pooled.norm();
  n.unit = n.norm > 0.0 ? Vec(n.pooled / n.norm) : Vec(Vec::Zero(n.pooled.size()));
  n.grad_unit = Vec::Zero(n.pooled.size());
  return n;
}

void scatter(const Node& n, Table& grad) {
  if (!(n.norm > 0.0) || n.grad_unit.isZero(0.0)) return;
  const Vec grad_v = (n.grad_unit - n.unit.dot(n.grad_unit) * n.unit) / n.norm;
  const auto& f = *n.features;
  for (std::size_t i = 0; i < f.buckets.size(); ++i) {
    grad.row(f.buckets[i]).noalias() += f.weights[i] * grad_v.transpose();
  }
}

struct EncodedGroup {
  Node query;
  std::vector<Node> docs;
};

EncodedGroup encode_group(const EncoderParams<double>& params, const TrainingGroup& g) {
  EncodedGroup eg;
  eg.query = make_node(params, g.query);
  eg.docs.reserve(g.docs.size());
  for (const auto& d : g.docs) eg.docs.push_back(make_node(params, d));
  return eg;
}

struct InBatch {
  double loss = 0.0;
  Eigen::MatrixXd grad_scores;  // d loss / d s_ij
};

// s_ij = score(query i, positive of group j).
InBatch inbatch_term(const Eigen::MatrixXd& s, double temperature) {
  const auto b = s.rows();
  InBatch out;
  out.grad_scores = Eigen::MatrixXd::Zero(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const Eigen::RowVectorXd logits = s.row(i) / temperature;
    const double m = logits.maxCoeff();
    const Eigen::RowVectorXd ex = (logits.array() - m).exp().matrix();
    const double z = ex.sum();
    out.loss += -logits(i) + m + std::log(z);
    const Eigen::RowVectorXd p = ex / z;
    for (Eigen::Index j = 0; j < b; ++j) {
      out.grad_scores(i, j) = (p(j) - (i == j ? 1.0 : 0.0)) / (temperature * static_cast<double>(b));
    }
  }
  out.loss /= static_cast<double>(b);
  return out;
}

Eigen::MatrixXd positive_scores(const std::vector<EncodedGroup>& enc,
                                std::span<const TrainingGroup* const> batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd s(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      s(i, j) = enc[i].query.unit.dot(enc[j].docs[batch[j]->positive].unit);
    }
  }
  return s;
}

}  // namespace

double inbatch_loss(std::span<const TrainingGroup> batch, const EncoderParams<double>& params,
                    double temperature) {
  if (batch.empty()) throw ArgumentError("in-batch loss needs a non-empty batch");
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be > 0");
  std::vector<EncodedGroup> enc;
  std::vector<const TrainingGroup*> ptrs;
  for (const auto& g : batch) {
    enc.push_back(encode_group(params, g));
    ptrs.push_back(&g);
  }
  return inbatch_term(positive_scores(enc, ptrs), temperature).loss;
}

double lr_schedule(std::size_t step, const TrainConfig& cfg) {
  if (step > cfg.total_steps) throw ArgumentError("step beyond total_steps");
  const auto s = static_cast<double>(step);
  if (step <= cfg.warmup_steps) {
    if (cfg.warmup_steps == 0) return cfg.peak_lr;
    return cfg.peak_lr * s / static_cast<double>(cfg.warmup_steps);
  }
  const auto decay_len = static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.peak_lr * (static_cast<double>(cfg.total_steps) - s) / decay_len;
}

TrainResult train(EncoderParams<double> student, std::span<const TrainingGroup> groups,
                  const TrainConfig& cfg, const EarlyStopHook& hook) {
  validate(cfg);
  if (groups.empty()) throw ArgumentError("training needs at least one group");

  TrainResult result{std::move(student), {}, false};
  auto& params = result.params;
  const auto rows = params.table().rows();
  const auto cols = params.table().cols();
  Table grad(rows, cols);
  Table adam_m = Table::Zero(rows, cols);
  Table adam_v = Table::Zero(rows, cols);

  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  const bool use_inbatch = cfg.inbatch_weight > 0.0;
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    std::vector<const TrainingGroup*> batch;
    while (batch.size() < std::min(cfg.batch_size, groups.size())) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&groups[order[cursor++]]);
    }
    const double bsz = static_cast<double>(batch.size());

    std::vector<EncodedGroup> enc;
    enc.reserve(batch.size());
    double listwise = 0.0;
    for (const auto* g : batch) {
      enc.push_back(encode_group(params, *g));
      auto& eg = enc.back();
      std::vector<double> y_s(eg.docs.size());
      for (std::size_t i = 0; i < eg.docs.size(); ++i) y_s[i] = eg.query.unit.dot(eg.docs[i].unit);
      const double loss = listwise_loss(g->teacher_scores, y_s);
      if (!std::isfinite(loss)) {
        throw TrainError("non-finite listwise loss at step " + std::to_string(step) + " on query " +
                             g->query_id,
                         step, g->query_id);
      }
      listwise += loss / bsz;
      const auto dy = listwise_loss_grad(g->teacher_scores, y_s);
      for (std::size_t i = 0; i < eg.docs.size(); ++i) {
        if (dy[i] == 0.0) continue;
        const double u = dy[i] / bsz;
        eg.query.grad_unit.noalias() += u * eg.docs[i].unit;
        eg.docs[i].grad_unit.noalias() += u * eg.query.unit;
      }
    }

    double inbatch = 0.0;
    if (use_inbatch) {
      auto term = inbatch_term(positive_scores(enc, batch), cfg.temperature);
      inbatch = term.loss;
      if (!std::isfinite(inbatch)) {
        throw TrainError("non-finite in-batch loss at step " + std::to_string(step) +
                             " on query " + batch.front()->query_id,
                         step, batch.front()->query_id);
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < batch.size(); ++j) {
          const double u = cfg.inbatch_weight *
                           term.grad_scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          if (u == 0.0) continue;
          auto& pos = enc[j].docs[batch[j]->positive];
          enc[i].query.grad_unit.noalias() += u * pos.unit;
          pos.grad_unit.noalias() += u * enc[i].query.unit;
        }
      }
    }

    const double lr = lr_schedule(step, cfg);
    result.log.push_back({step, lr, listwise, inbatch, listwise + cfg.inbatch_weight * inbatch});

    grad.setZero();
    for (const auto& eg : enc) {
      scatter(eg.query, grad);
      for (const auto& d : eg.docs) scatter(d, grad);
    }

    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
    adam_m = cfg.adam_beta1 * adam_m + (1.0 - cfg.adam_beta1) * grad;
    adam_v = cfg.adam_beta2 * adam_v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
    if (lr != 0.0) {
      params.mutable_table().array() -=
          lr * (adam_m.array() / bc1) / ((adam_v.array() / bc2).sqrt() + cfg.adam_eps);
    }

    if (hook.every > 0 && hook.should_stop && step % hook.every == 0 &&
        hook.should_stop(step, params)) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

std::string format_train_log(std::span<const TrainStepLog> log) {
  std::string out = "step\tlr\tlistwise_loss\tinbatch_loss\ttotal\n";
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%.9g\t%.9g\n", e.step, e.lr, e.listwise,
                  e.inbatch, e.total);
    out += buf;
  }
  return out;
}

}  // namespace descadapt
