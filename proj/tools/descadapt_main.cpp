// descadapt: domain-description driven adaptation of a dense retriever.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "descadapt/error.hpp"
#include "descadapt/io.hpp"
#include "stages.hpp"

namespace fs = std::filesystem;
using namespace descadapt;
using namespace descadapt::cli;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kService = 2;

struct ClientOpts {
  std::string mode = "none";
  std::optional<std::string> mock_dir;
  std::optional<std::string> endpoint;

  void add_to(CLI::App* app) {
    app->add_option("--client", mode, "generator client: none, mock, http, record")
        ->check(CLI::IsMember({"none", "mock", "http", "record"}));
    app->add_option("--mock-dir", mock_dir, "canned/recorded responses (default $GEN_MOCK_DIR)");
    app->add_option("--endpoint", endpoint, "completion endpoint (default $GEN_ENDPOINT)");
  }
  std::shared_ptr<GeneratorClient> make() const {
    return make_client(*parse_client_mode(mode), mock_dir, endpoint);
  }
};

void add_encoder_options(CLI::App* app, EncoderConfig& enc) {
  app->add_option("--buckets", enc.num_buckets, "hashed n-gram buckets")->capture_default_str();
  app->add_option("--dim", enc.dim, "embedding dimension")->capture_default_str();
  app->add_option("--hash-seed", enc.hash_seed, "n-gram hash seed")->capture_default_str();
}

// Maps library exceptions onto exit codes.
int guarded(const std::string& what, const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const ServiceError& e) {
    std::cerr << what << ": generator failure: " << e.what() << '\n';
    return kService;
  } catch (const LabelError& e) {
    std::cerr << what << ": teacher failure: " << e.what() << '\n';
    return kService;
  } catch (const std::exception& e) {
    std::cerr << what << ": " << e.what() << '\n';
    return kUsage;
  }
}

struct Stage {
  std::string name;
  std::vector<fs::path> outputs;
  std::function<void()> run;
};

int run_pipeline(const fs::path& config_path, bool resume) {
  PipelineConfig cfg;
  if (int rc = guarded("pipeline", [&] { cfg = load_pipeline_config(config_path); }); rc != kOk) {
    return rc;
  }
  std::shared_ptr<GeneratorClient> client;
  if (int rc = guarded("pipeline", [&] { client = make_client(cfg.client_mode, cfg.mock_dir, cfg.endpoint); });
      rc != kOk) {
    return rc;
  }

  const auto& o = cfg.out_dir;
  const auto attributes = o / "attributes.json";
  const auto seeds = o / "seed.jsonl";
  const auto corpus = o / "corpus.jsonl";
  const auto provenance = o / "provenance.jsonl";
  const auto queries = o / "queries.jsonl";
  const auto labels = o / "labels.jsonl";
  const auto checkpoint = o / "checkpoint.bin";
  const auto train_log = o / "train_log.tsv";

  std::vector<Stage> stages{
      {"understand", {attributes},
       [&] { run_understand({cfg.description, cfg.bank, attributes, cfg.examples}, client.get()); }},
      {"seed", {seeds}, [&] { run_seed({attributes, seeds, cfg.build.num_seeds}, client.get()); }},
      {"build-corpus", {corpus, provenance},
       [&] { run_build_corpus({cfg.collection, seeds, corpus, provenance, cfg.build}); }},
      {"genq", {queries}, [&] { run_genq({corpus, attributes, queries, cfg.queries}, client.get()); }},
      {"label", {labels},
       [&] {
         LabelArgs a;
         a.corpus = corpus;
         a.queries = queries;
         a.attributes = attributes;
         a.out = labels;
         a.encoder = cfg.encoder;
         a.init_seed = cfg.rng_seed;
         a.cfg = cfg.candidates;
         a.teacher = cfg.teacher;
         run_label(a, client);
       }},
      {"train", {checkpoint, train_log},
       [&] {
         TrainArgs a;
         a.corpus = corpus;
         a.queries = queries;
         a.labels = labels;
         a.out = checkpoint;
         a.log = train_log;
         a.encoder = cfg.encoder;
         a.cfg = cfg.train;
         run_train(a);
       }},
  };
  if (cfg.eval_queries) {
    const auto run_adapted = o / "run.txt";
    const auto run_initial = o / "run_initial.txt";
    const auto metrics = o / "metrics.tsv";
    stages.push_back({"eval", {run_adapted, run_initial, metrics}, [&, run_adapted, run_initial, metrics] {
                        SearchArgs s;
                        s.corpus = cfg.collection;
                        s.queries = *cfg.eval_queries;
                        s.top_k = cfg.eval_top_k;
                        s.out = run_adapted;
                        s.checkpoint = checkpoint;
                        run_search(s);
                        s.out = run_initial;
                        s.checkpoint.reset();
                        s.encoder = cfg.encoder;
                        s.init_seed = cfg.rng_seed;
                        run_search(s);
                        EvalArgs e;
                        e.run = run_adapted;
                        e.qrels = *cfg.eval_qrels;
                        e.compare = run_initial;
                        e.out = metrics;
                        std::cout << run_eval(e);
                      }});
  }

  std::error_code ec;
  fs::create_directories(o, ec);
  for (const auto& stage : stages) {
    bool done = resume && std::all_of(stage.outputs.begin(), stage.outputs.end(),
                                      [](const fs::path& p) { return fs::exists(p); });
    if (done) {
      std::cerr << "[" << stage.name << "] outputs present, skipped\n";
      continue;
    }
    std::cerr << "[" << stage.name << "] running\n";
    if (int rc = guarded("stage " + stage.name + " failed", stage.run); rc != kOk) return rc;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adapt a dense retriever to a domain described in plain text"};
  app.require_subcommand(1);
  int rc = kOk;

  // understand
  UnderstandArgs ua;
  ClientOpts uc;
  auto* understand_cmd = app.add_subcommand("understand", "extract domain attributes from a description");
  understand_cmd->add_option("--description", ua.description, "description text file")->required();
  understand_cmd->add_option("--bank", ua.bank, "annotated example bank (JSON)")->required();
  understand_cmd->add_option("--out", ua.out, "attributes JSON to write")->required();
  understand_cmd->add_option("--examples", ua.examples, "in-context examples")->capture_default_str();
  uc.add_to(understand_cmd);
  understand_cmd->callback([&] {
    rc = guarded("understand", [&] { run_understand(ua, uc.make().get()); });
  });

  // seed
  SeedArgs sa;
  ClientOpts sc;
  auto* seed_cmd = app.add_subcommand("seed", "generate seed documents from document attributes");
  seed_cmd->add_option("--attributes", sa.attributes, "attributes JSON")->required();
  seed_cmd->add_option("--out", sa.out, "seed JSONL to write")->required();
  seed_cmd->add_option("--num-seeds", sa.num_seeds)->capture_default_str();
  sc.add_to(seed_cmd);
  seed_cmd->callback([&] { rc = guarded("seed", [&] { run_seed(sa, sc.make().get()); }); });

  // build-corpus
  BuildArgs ba;
  auto* build_cmd = app.add_subcommand("build-corpus", "grow a synthetic corpus from seeds by BM25 retrieval");
  build_cmd->add_option("--collection", ba.collection, "heterogeneous collection W (JSONL)")->required();
  build_cmd->add_option("--seeds", ba.seeds, "seed JSONL")->required();
  build_cmd->add_option("--out", ba.out, "corpus JSONL to write")->required();
  build_cmd->add_option("--provenance", ba.provenance, "per-document iteration/parent JSONL");
  build_cmd->add_option("--N", ba.cfg.target_size, "target corpus size")->capture_default_str();
  build_cmd->add_option("--k", ba.cfg.retrieval_depth, "documents retrieved per query")->capture_default_str();
  build_cmd->add_option("--max-iterations", ba.cfg.max_iterations)->capture_default_str();
  build_cmd->callback([&] { rc = guarded("build-corpus", [&] { run_build_corpus(ba); }); });

  // genq
  GenqArgs ga;
  ClientOpts gc;
  auto* genq_cmd = app.add_subcommand("genq", "generate queries for every corpus document");
  genq_cmd->add_option("--corpus", ga.corpus)->required();
  genq_cmd->add_option("--attributes", ga.attributes)->required();
  genq_cmd->add_option("--out", ga.out)->required();
  genq_cmd->add_option("--k-prime", ga.cfg.k_prime, "queries per document")->capture_default_str();
  genq_cmd->add_option("--seed", ga.cfg.rng_seed)->capture_default_str();
  gc.add_to(genq_cmd);
  genq_cmd->callback([&] { rc = guarded("genq", [&] { run_genq(ga, gc.make().get()); }); });

  // label
  LabelArgs la;
  ClientOpts lc;
  auto* label_cmd = app.add_subcommand("label", "pseudo-label candidate documents with a teacher");
  label_cmd->add_option("--corpus", la.corpus)->required();
  label_cmd->add_option("--queries", la.queries)->required();
  label_cmd->add_option("--attributes", la.attributes)->required();
  label_cmd->add_option("--out", la.out)->required();
  label_cmd->add_option("--checkpoint", la.checkpoint, "student for dense candidates (default: random init)");
  label_cmd->add_option("--teacher", la.teacher)->check(CLI::IsMember({"bm25", "remote"}))->capture_default_str();
  label_cmd->add_option("--seed", la.cfg.rng_seed, "sampling and random-init seed")->capture_default_str();
  label_cmd->add_option("--pool-depth", la.cfg.pool_depth)->capture_default_str();
  label_cmd->add_option("--samples", la.cfg.samples_per_pool)->capture_default_str();
  add_encoder_options(label_cmd, la.encoder);
  lc.add_to(label_cmd);
  label_cmd->callback([&] {
    la.init_seed = la.cfg.rng_seed;
    rc = guarded("label", [&] { run_label(la, lc.mode == "none" ? nullptr : lc.make()); });
  });

  // train
  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "distil teacher labels into the dense student");
  train_cmd->add_option("--corpus", ta.corpus)->required();
  train_cmd->add_option("--queries", ta.queries)->required();
  train_cmd->add_option("--labels", ta.labels)->required();
  train_cmd->add_option("--out", ta.out, "checkpoint to write")->required();
  train_cmd->add_option("--log", ta.log, "per-step loss TSV");
  train_cmd->add_option("--init", ta.init, "starting checkpoint (default: random init)");
  train_cmd->add_option("--lr", ta.cfg.peak_lr)->capture_default_str();
  train_cmd->add_option("--warmup", ta.cfg.warmup_steps)->capture_default_str();
  train_cmd->add_option("--steps", ta.cfg.total_steps)->capture_default_str();
  train_cmd->add_option("--batch", ta.cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--lambda", ta.cfg.inbatch_weight, "in-batch loss weight")->capture_default_str();
  train_cmd->add_option("--seed", ta.cfg.rng_seed)->capture_default_str();
  add_encoder_options(train_cmd, ta.encoder);
  train_cmd->callback([&] { rc = guarded("train", [&] { run_train(ta); }); });

  // search
  SearchArgs qa;
  auto* search_cmd = app.add_subcommand("search", "rank a corpus for a query set, TREC run output");
  search_cmd->add_option("--corpus", qa.corpus)->required();
  search_cmd->add_option("--queries", qa.queries)->required();
  search_cmd->add_option("--out", qa.out)->required();
  auto* ck = search_cmd->add_option("--checkpoint", qa.checkpoint, "dense student (default: random init)");
  search_cmd->add_flag("--bm25", qa.bm25, "rank with BM25 instead")->excludes(ck);
  search_cmd->add_option("--top-k", qa.top_k)->capture_default_str();
  search_cmd->add_option("--seed", qa.init_seed, "random-init seed")->capture_default_str();
  add_encoder_options(search_cmd, qa.encoder);
  search_cmd->callback([&] { rc = guarded("search", [&] { run_search(qa); }); });

  // eval
  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "score a run against qrels");
  eval_cmd->add_option("--run", ea.run)->required();
  eval_cmd->add_option("--qrels", ea.qrels)->required();
  eval_cmd->add_option("--compare", ea.compare, "second run: adds paired t-test columns");
  eval_cmd->add_option("--metrics", ea.metrics, "ndcg@K, recall@K, mrr")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--out", ea.out);
  eval_cmd->callback([&] { rc = guarded("eval", [&] { std::cout << run_eval(ea); }); });

  // pipeline
  fs::path config_path;
  bool resume = false;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage from a config file");
  pipeline_cmd->add_option("--config", config_path)->required();
  pipeline_cmd->add_flag("--resume", resume, "skip stages whose outputs already exist");
  pipeline_cmd->callback([&] { rc = run_pipeline(config_path, resume); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  return rc;
}
