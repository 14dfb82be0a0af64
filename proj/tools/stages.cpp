#include "stages.hpp"

#include <cstdio>
#include <iostream>

#include "descadapt/error.hpp"
#include "descadapt/io.hpp"
#include "descadapt/text.hpp"

namespace descadapt::cli {

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void run_understand(const UnderstandArgs& a, GeneratorClient* client) {
  if (client == nullptr) {
    throw ArgumentError("understand needs a generator client (--client mock|http|record)");
  }
  const std::string description(trim(io::read_text(a.description)));
  const auto bank = io::read_example_bank(a.bank);
  auto result = understand(description, bank, *client, a.examples);
  print_warnings(result.warnings);
  io::write_text(a.out, io::format_attributes(result.attributes));
}

void run_seed(const SeedArgs& a, GeneratorClient* client) {
  const auto attrs = io::read_attributes(a.attributes);
  auto result = generate_seeds(attrs.restricted_to(AttributeSide::document), client, a.num_seeds);
  print_warnings(result.warnings);
  io::write_text(a.out, io::format_corpus(result.seeds));
}

void run_build_corpus(const BuildArgs& a) {
  const auto w = io::read_corpus(a.collection);
  const auto seeds = io::read_corpus(a.seeds);
  const auto index = InvertedIndex::build(w);
  auto corpus = build_corpus(seeds, w, index, a.cfg);
  print_warnings(corpus.warnings);
  io::write_text(a.out, io::format_corpus(corpus.documents()));
  if (a.provenance) io::write_text(*a.provenance, io::format_provenance(corpus));
}

void run_genq(const GenqArgs& a, GeneratorClient* client) {
  const auto corpus = io::read_corpus(a.corpus);
  const auto attrs = io::read_attributes(a.attributes);
  auto result = generate_queries(corpus, attrs.restricted_to(AttributeSide::query),
                                 attrs.restricted_to(AttributeSide::relevance), a.cfg, client);
  print_warnings(result.warnings);
  io::write_text(a.out, io::format_queries(result.queries));
}

EncoderParams<double> load_or_init_student(const std::optional<fs::path>& checkpoint,
                                           const EncoderConfig& enc, std::uint64_t seed) {
  if (checkpoint) return load_checkpoint<double>(*checkpoint);
  return EncoderParams<double>::random(enc, seed);
}

void run_label(const LabelArgs& a, std::shared_ptr<GeneratorClient> client) {
  auto docs = io::read_corpus(a.corpus);
  const auto queries = io::read_queries(a.queries);
  const auto attrs = io::read_attributes(a.attributes);
  const auto index = InvertedIndex::build(docs);
  const DocumentStore store(docs);
  const auto student = load_or_init_student(a.checkpoint, a.encoder, a.init_seed);
  DenseIndex<double> dense(student, store.docs());

  std::unique_ptr<TeacherScorer> teacher;
  if (a.teacher == "bm25") {
    teacher = std::make_unique<Bm25Teacher>(index);
  } else if (a.teacher == "remote") {
    if (!client) throw ArgumentError("the remote teacher needs a generator client");
    teacher = std::make_unique<RemoteTeacher>(client);
  } else {
    throw ArgumentError("unknown teacher " + a.teacher + " (expected bm25 or remote)");
  }

  const auto r_attr = attrs.restricted_to(AttributeSide::relevance);
  std::vector<LabeledQuery> labels;
  labels.reserve(queries.size());
  for (const auto& q : queries) {
    auto cands = build_candidates(q, store, index, dense, a.cfg);
    labels.push_back(label(q, cands, r_attr, store, *teacher));
  }
  io::write_text(a.out, io::format_labels(labels));
}

void run_train(const TrainArgs& a) {
  const DocumentStore store(io::read_corpus(a.corpus));
  const auto queries = io::read_queries(a.queries);
  const auto labels = io::read_labels(a.labels);
  auto student = load_or_init_student(a.init, a.encoder, a.cfg.rng_seed);
  const auto groups = make_training_groups(queries, labels, store, student.config());
  if (groups.empty()) throw ArgumentError("no training queries in " + a.queries.string());
  auto result = train(std::move(student), groups, a.cfg);
  save_checkpoint(a.out, result.params);
  if (a.log) io::write_text(*a.log, format_train_log(result.log));
}

void run_search(const SearchArgs& a) {
  const auto docs = io::read_corpus(a.corpus);
  const auto queries = io::read_queries(a.queries);
  RunList run;
  if (a.bm25) {
    const auto index = InvertedIndex::build(docs);
    for (const auto& q : queries) run[q.id] = search(index, q.text, a.top_k);
  } else {
    const auto student = load_or_init_student(a.checkpoint, a.encoder, a.init_seed);
    DenseIndex<double> dense(student, docs);
    for (const auto& q : queries) run[q.id] = dense.search(q.text, a.top_k);
  }
  io::write_text(a.out, io::format_run(run, a.bm25 ? "bm25" : "dense"));
}

namespace {

MetricResult compute_metric(const std::string& name, const RunList& run, const Qrels& qrels) {
  auto at_k = [&](std::string_view prefix) -> std::optional<std::size_t> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const auto digits = name.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ArgumentError("bad metric " + name);
    }
    return std::stoul(digits);
  };
  if (name == "mrr") return mrr(run, qrels);
  if (auto k = at_k("ndcg@")) return ndcg_at_k(run, qrels, *k);
  if (auto k = at_k("recall@")) return recall_at_k(run, qrels, *k);
  throw ArgumentError("unknown metric " + name + " (ndcg@K, recall@K, mrr)");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string run_eval(const EvalArgs& a) {
  const auto qrels = io::read_qrels(a.qrels);
  const auto run = io::read_run(a.run);
  std::optional<RunList> other;
  if (a.compare) other = io::read_run(*a.compare);
  if (a.metrics.empty()) throw ArgumentError("no metrics requested");

  std::string out;
  if (!other) {
    out = "metric\tvalue\n";
    for (const auto& m : a.metrics) {
      auto r = compute_metric(m, run, qrels);
      print_warnings(r.warnings);
      out += m + "\t" + fmt(r.mean) + "\n";
    }
  } else {
    struct Row {
      std::string name;
      double a, b, t, p;
    };
    std::vector<Row> rows;
    std::vector<double> ps;
    for (const auto& m : a.metrics) {
      auto ra = compute_metric(m, run, qrels);
      auto rb = compute_metric(m, *other, qrels);
      print_warnings(ra.warnings);
      std::vector<double> va, vb;
      for (const auto& [qid, v] : ra.per_query) {
        va.push_back(v);
        vb.push_back(rb.per_query.at(qid));
      }
      auto tt = paired_t_test(va, vb);
      rows.push_back({m, ra.mean, rb.mean, tt.t, tt.p});
      ps.push_back(tt.p);
    }
    auto adjusted = bonferroni(ps, ps.size());
    out = "metric\trun\tcompare\tt\tp\tp_bonferroni\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out += rows[i].name + "\t" + fmt(rows[i].a) + "\t" + fmt(rows[i].b) + "\t" + fmt(rows[i].t) +
             "\t" + fmt(rows[i].p) + "\t" + fmt(adjusted[i]) + "\n";
    }
  }
  if (a.out) io::write_text(*a.out, out);
  return out;
}

}  // namespace descadapt::cli
