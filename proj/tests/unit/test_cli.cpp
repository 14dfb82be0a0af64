#include "doctest.h"

#include <chrono>

#include "descadapt/io.hpp"
#include "support/toy_world.hpp"

using namespace descadapt;
using toy::run_cli;

namespace fs = std::filesystem;

TEST_CASE("usage errors exit 1") {
  auto dir = toy::scratch("cli_usage");
  CHECK(run_cli("", dir).code == 1);
  CHECK(run_cli("bogus", dir).code == 1);
  CHECK(run_cli("eval --run x", dir).code == 1);
  CHECK(run_cli("--help", dir).code == 0);
  fs::remove_all(dir);
}

TEST_CASE("understand: canned completion becomes the attributes file") {
  auto dir = toy::scratch("cli_understand");
  toy::write_understand_inputs(dir);
  auto r = run_cli("understand --description description.txt --bank bank.json --out attrs.json "
                   "--client mock --mock-dir mock",
                   dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto attrs = io::read_attributes(dir / "attrs.json");
  CHECK(attrs == parse_attributes(toy::kCannedAttributes).attributes);

  // Instruction-only prompting asks a different prompt, which has no canned answer.
  auto zero = run_cli("understand --description description.txt --bank bank.json --out z.json "
                      "--client mock --mock-dir mock --examples 0",
                      dir);
  CHECK(zero.code == 2);
  toy::write_understand_inputs(dir, 0);
  zero = run_cli("understand --description description.txt --bank bank.json --out z.json "
                 "--client mock --mock-dir mock --examples 0",
                 dir);
  CHECK(zero.code == 0);

  auto missing = run_cli("understand --description nope.txt --bank bank.json --out a.json "
                         "--client mock --mock-dir mock",
                         dir);
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nope.txt") != std::string::npos);

  auto no_client = run_cli("understand --description description.txt --bank bank.json --out a.json", dir);
  CHECK(no_client.code == 1);
  fs::remove_all(dir);
}

TEST_CASE("understand: argument-retrieval description and its annotation") {
  auto dir = toy::scratch("cli_table4");
  const std::string description =
      "Given an argument passage as a query, the task is to retrieve passages from online debate "
      "portals that contain its counterarguments";
  const std::string annotation =
      "relevance notion: counterargument \xE2\x96\xA0 query topic: NA \xE2\x96\xA0 query linguistic "
      "features: NA \xE2\x96\xA0 query language: NA \xE2\x96\xA0 query structure: unstructured "
      "\xE2\x96\xA0 query modality: unimodal \xE2\x96\xA0 query format: argument passage \xE2\x96\xA0 "
      "document topic: NA \xE2\x96\xA0 document linguistic features: NA \xE2\x96\xA0 document "
      "language: NA \xE2\x96\xA0 document structure: unstructured \xE2\x96\xA0 document modality: "
      "unimodal \xE2\x96\xA0 document format: argument passage \xE2\x96\xA0 document source: online "
      "debate portals";
  toy::write_understand_inputs(dir, 3, description, annotation);
  auto r = run_cli("understand --description description.txt --bank bank.json --out attrs.json "
                   "--client mock --mock-dir mock",
                   dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  DomainAttributes expected;
  expected.set(AttributeKey::relevance_notion, "counterargument");
  expected.set(AttributeKey::query_structure, "unstructured");
  expected.set(AttributeKey::query_modality, "unimodal");
  expected.set(AttributeKey::query_format, "argument passage");
  expected.set(AttributeKey::document_structure, "unstructured");
  expected.set(AttributeKey::document_modality, "unimodal");
  expected.set(AttributeKey::document_format, "argument passage");
  expected.set(AttributeKey::document_source, "online debate portals");
  CHECK(io::read_attributes(dir / "attrs.json") == expected);
  CHECK(toy::slurp(dir / "attrs.json") == io::format_attributes(expected));
  fs::remove_all(dir);
}

TEST_CASE("understand: unreachable endpoint is a service failure") {
  auto dir = toy::scratch("cli_http");
  toy::write_understand_inputs(dir);
  auto r = run_cli("understand --description description.txt --bank bank.json --out a.json "
                   "--client http --endpoint http://127.0.0.1:9",
                   dir);
  CHECK(r.code == 2);
  fs::remove_all(dir);
}

TEST_CASE("eval: hand run, compare and malformed qrels") {
  auto dir = toy::scratch("cli_eval");
  io::write_text(dir / "run.txt", "q1 Q0 a 1 3 t\nq1 Q0 b 2 2 t\nq1 Q0 c 3 1 t\n");
  io::write_text(dir / "qrels.txt", "q1 0 a 1\nq1 0 b 0\nq1 0 c 1\n");
  auto r = run_cli("eval --run run.txt --qrels qrels.txt --metrics ndcg@3,recall@2,mrr", dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "metric\tvalue\nndcg@3\t0.9197\nrecall@2\t0.5000\nmrr\t1.0000\n");

  io::write_text(dir / "qrels2.txt", "q1 0 a 1\nq1 0 c 1\nq2 0 b 2\n");
  io::write_text(dir / "run2.txt", "q1 Q0 a 1 3 t\nq1 Q0 c 2 2 t\nq2 Q0 b 1 1 t\n");
  auto cmp = run_cli("eval --run run2.txt --qrels qrels2.txt --compare run2.txt --metrics ndcg@10", dir);
  REQUIRE_MESSAGE(cmp.code == 0, cmp.err);
  CHECK(cmp.out == "metric\trun\tcompare\tt\tp\tp_bonferroni\nndcg@10\t1.0000\t1.0000\t0.0000\t1.0000\t1.0000\n");

  io::write_text(dir / "bad.txt", "q1 0 a 1\nq1 0 b\n");
  auto bad = run_cli("eval --run run.txt --qrels bad.txt", dir);
  CHECK(bad.code == 1);
  CHECK(bad.err.find("bad.txt:2") != std::string::npos);
  CHECK(run_cli("eval --run run.txt --qrels qrels.txt --metrics map", dir).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("subcommands chain by hand") {
  auto dir = toy::scratch("cli_chain");
  toy::write_understand_inputs(dir);
  io::write_text(dir / "w.jsonl", io::format_corpus(toy::make_collection(120, 4, 3)));
  auto step = [&](const std::string& args) {
    auto r = run_cli(args, dir);
    INFO(args);
    INFO(r.err);
    REQUIRE(r.code == 0);
    return r;
  };
  step("understand --description description.txt --bank bank.json --out a.json --client mock --mock-dir mock");
  step("seed --attributes a.json --out s.jsonl");
  CHECK(toy::slurp(dir / "s.jsonl").find("t0w1 t0w2 t0w3") != std::string::npos);
  step("build-corpus --collection w.jsonl --seeds s.jsonl --out c.jsonl --provenance p.jsonl --N 20 --k 5");
  CHECK(io::read_corpus(dir / "c.jsonl").size() == 20);
  step("genq --corpus c.jsonl --attributes a.json --out q.jsonl --k-prime 2");
  CHECK(io::read_queries(dir / "q.jsonl").size() == 40);
  step("label --corpus c.jsonl --queries q.jsonl --attributes a.json --out l.jsonl --buckets 1024 --dim 8 "
       "--pool-depth 10 --samples 3");
  CHECK(io::read_labels(dir / "l.jsonl").size() == 40);
  step("train --corpus c.jsonl --queries q.jsonl --labels l.jsonl --out m.bin --log log.tsv "
       "--buckets 1024 --dim 8 --steps 10 --warmup 2 --batch 4 --lr 0.01");
  CHECK(fs::file_size(dir / "m.bin") == 44 + 1024 * 8 * 4);
  CHECK(toy::slurp(dir / "log.tsv").rfind("step\tlr\tlistwise_loss\tinbatch_loss\ttotal\n", 0) == 0);
  step("search --corpus w.jsonl --queries q.jsonl --checkpoint m.bin --out run.txt --top-k 7");
  auto run = io::read_run(dir / "run.txt");
  CHECK(run.size() == 40);
  CHECK(run.begin()->second.size() == 7);
  step("search --corpus w.jsonl --queries q.jsonl --bm25 --out bm25.txt");
  CHECK(run_cli("search --corpus w.jsonl --queries q.jsonl --bm25 --checkpoint m.bin --out x.txt", dir).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("pipeline: toy run, resume and determinism") {
  auto dir = toy::scratch("cli_pipeline");
  toy::write_pipeline_config(dir);
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_cli("pipeline --config pipeline.ini", dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(secs < 60.0);
  const auto out = dir / "out";
  for (const char* f : {"attributes.json", "seed.jsonl", "corpus.jsonl", "provenance.jsonl",
                        "queries.jsonl", "labels.jsonl", "checkpoint.bin", "train_log.tsv"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  CHECK(io::read_corpus(out / "corpus.jsonl").size() == 50);
  CHECK(io::read_queries(out / "queries.jsonl").size() == 100);

  const auto first_checkpoint = toy::slurp(out / "checkpoint.bin");
  fs::remove(out / "checkpoint.bin");
  auto resumed = run_cli("pipeline --config pipeline.ini --resume", dir);
  REQUIRE(resumed.code == 0);
  CHECK(resumed.err.find("[train] running") != std::string::npos);
  for (const char* stage : {"understand", "seed", "build-corpus", "genq", "label"}) {
    CHECK(resumed.err.find(std::string("[") + stage + "] outputs present, skipped") != std::string::npos);
  }
  CHECK(toy::slurp(out / "checkpoint.bin") == first_checkpoint);

  // Stage failures carry the stage name.
  fs::remove_all(dir / "mock");
  fs::remove(out / "attributes.json");
  auto failed = run_cli("pipeline --config pipeline.ini --resume", dir);
  CHECK(failed.code == 2);
  CHECK(failed.err.find("stage understand failed") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("pipeline config errors") {
  auto dir = toy::scratch("cli_config");
  auto ini = toy::write_pipeline_config(dir);
  auto text = toy::slurp(ini);
  text.replace(text.find("warmup_steps"), 12, "warmpu_steps");
  io::write_text(dir / "typo.ini", text);
  auto typo = run_cli("pipeline --config typo.ini", dir);
  CHECK(typo.code == 1);
  CHECK(typo.err.find("train.warmpu_steps") != std::string::npos);
  fs::remove(dir / "collection.jsonl");
  auto missing = run_cli("pipeline --config pipeline.ini", dir);
  CHECK(missing.code == 1);
  CHECK(missing.err.find("collection.jsonl") != std::string::npos);
  CHECK(run_cli("pipeline --config none.ini", dir).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("environment overrides config keys") {
  auto dir = toy::scratch("cli_env");
  toy::write_pipeline_config(dir);
  const std::string cmd = "cd '" + dir.string() +
                          "' && DESCADAPT_PATHS_OUT_DIR=out30 DESCADAPT_BUILD_TARGET_SIZE=30 '" DESCADAPT_CLI_PATH
                          "' pipeline --config pipeline.ini >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(io::read_corpus(dir / "out30" / "corpus.jsonl").size() == 30);
  CHECK_FALSE(fs::exists(dir / "out"));
  fs::remove_all(dir);
}
