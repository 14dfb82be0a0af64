#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "descadapt/error.hpp"
#include "descadapt/lexical_index.hpp"

namespace descadapt {

struct EncoderConfig {
  std::size_t num_buckets = std::size_t{1} << 15;
  std::size_t dim = 64;
  int ngram_min = 3;
  int ngram_max = 5;
  std::uint64_t hash_seed = 0;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Throws ArgumentError unless dim >= 1, num_buckets >= 1 and 1 <= ngram_min <= ngram_max.
void validate(const EncoderConfig& cfg);

/// Hashed character n-gram bag of a text: distinct buckets in ascending
/// order, each weighted by its share of all extracted n-grams.
struct NgramFeatures {
  std::vector<std::uint32_t> buckets;
  std::vector<double> weights;

  bool empty() const noexcept { return buckets.empty(); }
};

/// Seeded 64-bit hash of a byte string (FNV-1a with a splitmix64 finish).
std::uint64_t seeded_hash(std::string_view bytes, std::uint64_t seed);

/// Lowercased words wrapped in '<' '>' markers, cut into n-grams of every
/// length in [ngram_min, ngram_max], hashed into num_buckets.
NgramFeatures extract_features(std::string_view text, const EncoderConfig& cfg);

/// Embedding table of the dual encoder. Query and document towers share it.
template <typename Scalar>
class EncoderParams {
 public:
  using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EncoderParams() : EncoderParams(EncoderConfig{}) {}
  explicit EncoderParams(const EncoderConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    table_ = Table::Zero(static_cast<Eigen::Index>(cfg_.num_buckets),
                         static_cast<Eigen::Index>(cfg_.dim));
  }
  EncoderParams(const EncoderConfig& cfg, Table table) : cfg_(cfg), table_(std::move(table)) {
    validate(cfg_);
    if (table_.rows() != static_cast<Eigen::Index>(cfg_.num_buckets) ||
        table_.cols() != static_cast<Eigen::Index>(cfg_.dim)) {
      throw ArgumentError("embedding table shape does not match encoder config");
    }
  }

  /// Entries uniform in [-1/sqrt(dim), 1/sqrt(dim)].
  static EncoderParams random(const EncoderConfig& cfg, std::uint64_t seed) {
    EncoderParams p(cfg);
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < p.table_.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.table_.cols(); ++c) {
        p.table_(r, c) = static_cast<Scalar>(dist(rng));
      }
    }
    return p;
  }

  const EncoderConfig& config() const noexcept { return cfg_; }
  const Table& table() const noexcept { return table_; }
  /// Bumps the generation so cached corpus embeddings are recomputed.
  Table& mutable_table() noexcept {
    ++generation_;
    return table_;
  }
  std::uint64_t generation() const noexcept { return generation_; }

  bool all_finite() const { return table_.allFinite(); }

  template <typename Other>
  EncoderParams<Other> cast() const {
    return EncoderParams<Other>(cfg_, table_.template cast<Other>());
  }

 private:
  EncoderConfig cfg_;
  Table table_;
  std::uint64_t generation_ = 0;
};

template <typename Scalar>
using Embedding = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Mean of the bucket rows (before normalization).
template <typename Scalar>
Embedding<Scalar> pool(const EncoderParams<Scalar>& params, const NgramFeatures& f) {
  Embedding<Scalar> v = Embedding<Scalar>::Zero(static_cast<Eigen::Index>(params.config().dim));
  for (std::size_t i = 0; i < f.buckets.size(); ++i) {
    v.noalias() += static_cast<Scalar>(f.weights[i]) * params.table().row(f.buckets[i]).transpose();
  }
  return v;
}

/// Unit-norm embedding, or all zeros when the text has no features.
template <typename Scalar>
Embedding<Scalar> encode(const EncoderParams<Scalar>& params, const NgramFeatures& f) {
  Embedding<Scalar> v = pool(params, f);
  const Scalar n = v.norm();
  if (n > Scalar(0)) v /= n;
  return v;
}

template <typename Scalar>
Embedding<Scalar> encode(const EncoderParams<Scalar>& params, std::string_view text) {
  return encode(params, extract_features(text, params.config()));
}

template <typename Scalar>
Scalar score(const EncoderParams<Scalar>& params, const NgramFeatures& q, const NgramFeatures& d) {
  return encode(params, q).dot(encode(params, d));
}

template <typename Scalar>
Scalar score(const EncoderParams<Scalar>& params, std::string_view query_text,
             std::string_view doc_text) {
  const auto& cfg = params.config();
  return score(params, extract_features(query_text, cfg), extract_features(doc_text, cfg));
}

namespace detail {

// d e / d v = (I - e e^T) / |v|, then d v / d row_b = w_b I.
template <typename Scalar, typename Grad>
void backprop_side(const NgramFeatures& f, const Embedding<Scalar>& pooled,
                   const Embedding<Scalar>& grad_e, Scalar upstream, Grad& grad) {
  const Scalar n = pooled.norm();
  if (!(n > Scalar(0))) return;
  const Embedding<Scalar> e = pooled / n;
  const Embedding<Scalar> grad_v = (grad_e - e.dot(grad_e) * e) / n;
  for (std::size_t i = 0; i < f.buckets.size(); ++i) {
    grad.row(f.buckets[i]).noalias() +=
        (upstream * static_cast<Scalar>(f.weights[i])) * grad_v.transpose();
  }
}

}  // namespace detail

/// grad += upstream * d score(q, d) / d table, through pooling and normalization.
template <typename Scalar>
void backprop_score(const EncoderParams<Scalar>& params, const NgramFeatures& q,
                    const NgramFeatures& d, Scalar upstream,
                    typename EncoderParams<Scalar>::Table& grad) {
  if (grad.rows() != params.table().rows() || grad.cols() != params.table().cols()) {
    throw ArgumentError("gradient accumulator shape does not match the embedding table");
  }
  if (upstream == Scalar(0)) return;
  const Embedding<Scalar> vq = pool(params, q);
  const Embedding<Scalar> vd = pool(params, d);
  const Scalar nq = vq.norm();
  const Scalar nd = vd.norm();
  if (!(nq > Scalar(0)) || !(nd > Scalar(0))) return;
  const Embedding<Scalar> eq = vq / nq;
  const Embedding<Scalar> ed = vd / nd;
  detail::backprop_side<Scalar>(q, vq, ed, upstream, grad);
  detail::backprop_side<Scalar>(d, vd, eq, upstream, grad);
}

template <typename Scalar>
void backprop_score(const EncoderParams<Scalar>& params, std::string_view query_text,
                    std::string_view doc_text, Scalar upstream,
                    typename EncoderParams<Scalar>::Table& grad) {
  const auto& cfg = params.config();
  backprop_score(params, extract_features(query_text, cfg), extract_features(doc_text, cfg),
                 upstream, grad);
}

/// Exhaustive top-k by embedding dot product; ties by ascending doc id.
template <typename Scalar>
std::vector<SearchHit> dense_search(const EncoderParams<Scalar>& params,
                                    std::span<const Document> corpus, std::string_view query_text,
                                    std::size_t top_k) {
  if (top_k == 0) return {};
  const auto q = encode(params, query_text);
  std::vector<SearchHit> hits;
  hits.reserve(corpus.size());
  for (const auto& doc : corpus) {
    hits.push_back({doc.id, static_cast<double>(q.dot(encode(params, doc.text)))});
  }
  sort_and_truncate(hits, top_k);
  return hits;
}

/// Corpus embeddings cached against one parameter object; re-encodes when
/// the parameters' generation changes.
template <typename Scalar>
class DenseIndex {
 public:
  DenseIndex(const EncoderParams<Scalar>& params, std::span<const Document> corpus)
      : params_(&params), corpus_(corpus.begin(), corpus.end()) {
    refresh();
  }

  std::vector<SearchHit> search(std::string_view query_text, std::size_t top_k) {
    if (top_k == 0) return {};
    if (params_->generation() != generation_) refresh();
    const Embedding<Scalar> q = encode(*params_, query_text);
    const Embedding<Scalar> scores = embeddings_ * q;
    std::vector<SearchHit> hits;
    hits.reserve(corpus_.size());
    for (std::size_t i = 0; i < corpus_.size(); ++i) {
      hits.push_back({corpus_[i].id, static_cast<double>(scores(static_cast<Eigen::Index>(i)))});
    }
    sort_and_truncate(hits, top_k);
    return hits;
  }

  std::size_t size() const noexcept { return corpus_.size(); }

 private:
  void refresh() {
    const auto dim = static_cast<Eigen::Index>(params_->config().dim);
    embeddings_.resize(static_cast<Eigen::Index>(corpus_.size()), dim);
    for (std::size_t i = 0; i < corpus_.size(); ++i) {
      embeddings_.row(static_cast<Eigen::Index>(i)) = encode(*params_, corpus_[i].text).transpose();
    }
    generation_ = params_->generation();
  }

  const EncoderParams<Scalar>* params_;
  std::vector<Document> corpus_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> embeddings_;
  std::uint64_t generation_ = 0;
};

// Checkpoint: 8-byte magic, u32 version, u64 num_buckets, u64 dim,
// u32 ngram_min, u32 ngram_max, u64 hash_seed, then the row-major table as
// little-endian float32.
inline constexpr char kCheckpointMagic[8] = {'D', 'A', 'D', 'E', 'N', 'S', 'E', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const EncoderConfig& cfg,
                      std::span<const float> table);
struct RawCheckpoint {
  EncoderConfig config;
  std::vector<float> table;
};
RawCheckpoint read_checkpoint(const std::filesystem::path& path);

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const EncoderParams<Scalar>& params) {
  const auto& t = params.table();
  std::vector<float> flat(static_cast<std::size_t>(t.size()));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      flat[static_cast<std::size_t>(r * t.cols() + c)] = static_cast<float>(t(r, c));
    }
  }
  write_checkpoint(path, params.config(), flat);
}

template <typename Scalar>
EncoderParams<Scalar> load_checkpoint(const std::filesystem::path& path) {
  auto raw = read_checkpoint(path);
  typename EncoderParams<Scalar>::Table t(static_cast<Eigen::Index>(raw.config.num_buckets),
                                          static_cast<Eigen::Index>(raw.config.dim));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      t(r, c) = static_cast<Scalar>(raw.table[static_cast<std::size_t>(r * t.cols() + c)]);
    }
  }
  return EncoderParams<Scalar>(raw.config, std::move(t));
}

}  // namespace descadapt
