#include "descadapt/dense_model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "descadapt/text.hpp"

namespace descadapt {

void validate(const EncoderConfig& cfg) {
  if (cfg.dim < 1) throw ArgumentError("encoder dim must be >= 1");
  if (cfg.num_buckets < 1) throw ArgumentError("encoder num_buckets must be >= 1");
  if (cfg.num_buckets > 0xFFFFFFFFull) throw ArgumentError("encoder num_buckets exceeds 2^32");
  if (cfg.ngram_min < 1 || cfg.ngram_min > cfg.ngram_max) {
    throw ArgumentError("encoder n-gram range must satisfy 1 <= min <= max");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t seeded_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ splitmix64(seed);
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return splitmix64(h);
}

NgramFeatures extract_features(std::string_view text, const EncoderConfig& cfg) {
  std::map<std::uint32_t, std::uint32_t> counts;
  std::uint64_t total = 0;
  for (const auto& word : tokenize(text)) {
    const std::string marked = "<" + word + ">";
    const auto len = static_cast<int>(marked.size());
    for (int n = cfg.ngram_min; n <= cfg.ngram_max && n <= len; ++n) {
      for (int i = 0; i + n <= len; ++i) {
        auto gram = std::string_view(marked).substr(static_cast<std::size_t>(i),
                                                    static_cast<std::size_t>(n));
        auto bucket = static_cast<std::uint32_t>(seeded_hash(gram, cfg.hash_seed) % cfg.num_buckets);
        ++counts[bucket];
        ++total;
      }
    }
  }
  NgramFeatures f;
  f.buckets.reserve(counts.size());
  f.weights.reserve(counts.size());
  for (const auto& [bucket, count] : counts) {
    f.buckets.push_back(bucket);
    f.weights.push_back(static_cast<double>(count) / static_cast<double>(total));
  }
  return f;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const EncoderConfig& cfg,
                      std::span<const float> table) {
  validate(cfg);
  if (table.size() != cfg.num_buckets * cfg.dim) {
    throw ArgumentError("checkpoint table size does not match encoder config");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, cfg.num_buckets);
  put_le<std::uint64_t>(out, cfg.dim);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.ngram_min));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.ngram_max));
  put_le<std::uint64_t>(out, cfg.hash_seed);
  for (float x : table) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

RawCheckpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[sizeof kCheckpointMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw IoError("not an encoder checkpoint: " + path.string());
  }
  auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  RawCheckpoint raw;
  raw.config.num_buckets = get_le<std::uint64_t>(in);
  raw.config.dim = get_le<std::uint64_t>(in);
  raw.config.ngram_min = static_cast<int>(get_le<std::uint32_t>(in));
  raw.config.ngram_max = static_cast<int>(get_le<std::uint32_t>(in));
  raw.config.hash_seed = get_le<std::uint64_t>(in);
  if (!in) throw IoError("truncated checkpoint header: " + path.string());
  try {
    validate(raw.config);
  } catch (const ArgumentError& e) {
    throw IoError("invalid checkpoint header in " + path.string() + ": " + e.what());
  }
  raw.table.resize(raw.config.num_buckets * raw.config.dim);
  for (auto& x : raw.table) x = std::bit_cast<float>(get_le<std::uint32_t>(in));
  if (!in) throw IoError("truncated checkpoint table: " + path.string());
  return raw;
}

}  // namespace descadapt
