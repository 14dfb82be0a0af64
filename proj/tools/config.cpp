#include "config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    auto n = std::stoull(v, &used, 0);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw ArgumentError("config key " + key + " expects a non-negative integer, got \"" + v + "\"");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    auto x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ArgumentError("config key " + key + " expects a number, got \"" + v + "\"");
  }
}

std::string env_name(const std::string& dotted) {
  std::string out = "DESCADAPT_";
  for (char c : dotted) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw IoError("cannot read config " + path.string() + ": " + e.message() + " (line " +
                  std::to_string(e.line()) + ")");
  }

  PipelineConfig cfg;
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& v) {
    fs::path p(v);
    return p.is_absolute() ? p : base / p;
  };
  auto sz = [](std::size_t& dst) {
    return [&dst](const std::string& k, const std::string& v) { dst = to_u64(k, v); };
  };
  auto small_int = [](int& dst) {
    return [&dst](const std::string& k, const std::string& v) {
      auto n = to_u64(k, v);
      if (n > 64) throw ArgumentError("config key " + k + " is out of range");
      dst = static_cast<int>(n);
    };
  };
  auto u64 = [](std::uint64_t& dst) {
    return [&dst](const std::string& k, const std::string& v) { dst = to_u64(k, v); };
  };
  auto dbl = [](double& dst) {
    return [&dst](const std::string& k, const std::string& v) { dst = to_double(k, v); };
  };
  auto file = [&](fs::path& dst) {
    return [&dst, &resolve](const std::string&, const std::string& v) { dst = resolve(v); };
  };
  auto opt_file = [&](std::optional<fs::path>& dst) {
    return [&dst, &resolve](const std::string&, const std::string& v) { dst = resolve(v); };
  };

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> keys{
      {"paths.collection", file(cfg.collection)},
      {"paths.bank", file(cfg.bank)},
      {"paths.description", file(cfg.description)},
      {"paths.out_dir", file(cfg.out_dir)},
      {"run.rng_seed", u64(cfg.rng_seed)},
      {"understand.examples", sz(cfg.examples)},
      {"build.target_size", sz(cfg.build.target_size)},
      {"build.retrieval_depth", sz(cfg.build.retrieval_depth)},
      {"build.num_seeds", sz(cfg.build.num_seeds)},
      {"build.max_iterations", sz(cfg.build.max_iterations)},
      {"build.max_query_tokens", sz(cfg.build.max_query_tokens)},
      {"queries.k_prime", sz(cfg.queries.k_prime)},
      {"queries.window", sz(cfg.queries.window)},
      {"queries.temperature", dbl(cfg.queries.temperature)},
      {"label.pool_depth", sz(cfg.candidates.pool_depth)},
      {"label.samples_per_pool", sz(cfg.candidates.samples_per_pool)},
      {"label.teacher", [&](const std::string& k, const std::string& v) {
         if (v != "bm25" && v != "remote") throw ArgumentError("config key " + k + " must be bm25 or remote");
         cfg.teacher = v;
       }},
      {"model.num_buckets", sz(cfg.encoder.num_buckets)},
      {"model.dim", sz(cfg.encoder.dim)},
      {"model.ngram_min", small_int(cfg.encoder.ngram_min)},
      {"model.ngram_max", small_int(cfg.encoder.ngram_max)},
      {"model.hash_seed", u64(cfg.encoder.hash_seed)},
      {"train.peak_lr", dbl(cfg.train.peak_lr)},
      {"train.warmup_steps", sz(cfg.train.warmup_steps)},
      {"train.total_steps", sz(cfg.train.total_steps)},
      {"train.batch_size", sz(cfg.train.batch_size)},
      {"train.inbatch_weight", dbl(cfg.train.inbatch_weight)},
      {"train.temperature", dbl(cfg.train.temperature)},
      {"client.mode", [&](const std::string& k, const std::string& v) {
         auto m = parse_client_mode(v);
         if (!m) throw ArgumentError("config key " + k + " must be none, mock, http or record");
         cfg.client_mode = *m;
       }},
      {"client.mock_dir", [&](const std::string&, const std::string& v) { cfg.mock_dir = resolve(v).string(); }},
      {"client.endpoint", [&](const std::string&, const std::string& v) { cfg.endpoint = v; }},
      {"eval.queries", opt_file(cfg.eval_queries)},
      {"eval.qrels", opt_file(cfg.eval_qrels)},
      {"eval.top_k", sz(cfg.eval_top_k)},
  };

  std::map<std::string, std::string> values;
  for (const auto& [section, children] : tree) {
    if (children.empty()) throw ArgumentError("config key " + section + " is outside any section");
    for (const auto& [key, node] : children) {
      const auto dotted = section + "." + key;
      if (!keys.contains(dotted)) throw ArgumentError("unknown config key " + dotted);
      values[dotted] = std::string(trim(node.data()));
    }
  }
  for (const auto& [dotted, setter] : keys) {
    if (const char* env = std::getenv(env_name(dotted).c_str())) values[dotted] = env;
  }
  for (const auto& [dotted, value] : values) keys.at(dotted)(dotted, value);

  cfg.build.rng_seed = cfg.rng_seed;
  cfg.queries.rng_seed = cfg.rng_seed;
  cfg.candidates.rng_seed = cfg.rng_seed;
  cfg.train.rng_seed = cfg.rng_seed;

  if (cfg.out_dir.empty()) throw ArgumentError("config needs paths.out_dir");
  for (const auto& [name, p] : {std::pair<const char*, const fs::path*>{"paths.collection", &cfg.collection},
                                {"paths.bank", &cfg.bank},
                                {"paths.description", &cfg.description}}) {
    if (p->empty()) throw ArgumentError(std::string("config needs ") + name);
    if (!fs::exists(*p)) throw IoError(std::string(name) + " does not exist: " + p->string());
  }
  if (cfg.eval_queries.has_value() != cfg.eval_qrels.has_value()) {
    throw ArgumentError("eval.queries and eval.qrels must be given together");
  }
  for (const auto& p : {cfg.eval_queries, cfg.eval_qrels}) {
    if (p && !fs::exists(*p)) throw IoError("eval input does not exist: " + p->string());
  }
  validate(cfg.build);
  validate(cfg.encoder);
  validate(cfg.train);
  return cfg;
}

}  // namespace descadapt::cli
