#include "descadapt/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& why) {
  throw IoError(path.string() + ":" + std::to_string(line) + ": " + why);
}

// Calls fn(json, line_number) for every non-blank line.
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail(path, lineno, "not a JSON object");
    try {
      fn(j, lineno);
    } catch (const json::exception& e) {
      fail(path, lineno, e.what());
    } catch (const ArgumentError& e) {
      fail(path, lineno, e.what());
    }
  }
}

std::string required_string(const json& j, const char* key, const fs::path& path,
                            std::size_t lineno) {
  if (!j.contains(key) || !j[key].is_string()) {
    fail(path, lineno, std::string("missing string field \"") + key + "\"");
  }
  return j[key].get<std::string>();
}

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::vector<Document> read_corpus(const fs::path& path) {
  std::vector<Document> docs;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    Document d;
    d.id = required_string(j, "id", path, lineno);
    d.text = required_string(j, "text", path, lineno);
    if (j.contains("title") && j["title"].is_string()) d.title = j["title"].get<std::string>();
    if (j.contains("source_tag") && j["source_tag"].is_string()) {
      d.source_tag = j["source_tag"].get<std::string>();
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

std::string format_corpus(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) {
    json j = {{"id", d.id}, {"text", d.text}};
    if (d.title) j["title"] = *d.title;
    if (d.source_tag) j["source_tag"] = *d.source_tag;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string format_provenance(const SyntheticCorpus& corpus) {
  std::string out;
  for (const auto& d : corpus.docs) {
    json j = {{"id", d.doc.id}, {"iteration", d.iteration}, {"parent", d.parent}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Query> read_queries(const fs::path& path) {
  std::vector<Query> queries;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    Query q;
    q.id = required_string(j, "id", path, lineno);
    q.text = required_string(j, "text", path, lineno);
    q.source_doc_id = j.contains("source_doc_id") ? required_string(j, "source_doc_id", path, lineno)
                                                  : std::string();
    queries.push_back(std::move(q));
  });
  return queries;
}

std::string format_queries(std::span<const Query> queries) {
  std::string out;
  for (const auto& q : queries) {
    json j = {{"id", q.id}, {"text", q.text}, {"source_doc_id", q.source_doc_id}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<LabeledQuery> read_labels(const fs::path& path) {
  std::vector<LabeledQuery> labels;
  std::map<std::string, std::size_t> index;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    auto qid = required_string(j, "qid", path, lineno);
    auto docid = required_string(j, "docid", path, lineno);
    if (!j.contains("score") || !j["score"].is_number()) fail(path, lineno, "missing numeric score");
    auto prov_name = j.value("provenance", std::string("source"));
    auto prov = parse_provenance(prov_name);
    if (!prov) fail(path, lineno, "unknown provenance " + prov_name);
    auto [it, inserted] = index.emplace(qid, labels.size());
    if (inserted) labels.push_back({qid, {}, {}, {}});
    auto& l = labels[it->second];
    l.doc_ids.push_back(docid);
    l.provenance.push_back(*prov);
    l.scores.push_back(j["score"].get<double>());
  });
  return labels;
}

std::string format_labels(std::span<const LabeledQuery> labels) {
  std::string out;
  for (const auto& l : labels) {
    for (std::size_t i = 0; i < l.doc_ids.size(); ++i) {
      json j = {{"qid", l.query_id},
                {"docid", l.doc_ids[i]},
                {"score", l.scores[i]},
                {"provenance", std::string(to_string(l.provenance[i]))}};
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

ExampleBank read_example_bank(const fs::path& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw IoError(path.string() + ": expected a JSON array");
  std::vector<DescriptionExample> examples;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    try {
      DescriptionExample ex;
      ex.name = e.at("name").get<std::string>();
      ex.description = e.at("description").get<std::string>();
      ex.gold = e.at("attributes").get<DomainAttributes>();
      examples.push_back(std::move(ex));
    } catch (const std::exception& err) {
      throw IoError(path.string() + ": entry " + std::to_string(i) + ": " + err.what());
    }
  }
  try {
    return ExampleBank(std::move(examples));
  } catch (const ArgumentError& err) {
    throw IoError(path.string() + ": " + err.what());
  }
}

DomainAttributes read_attributes(const fs::path& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded()) throw IoError(path.string() + ": invalid JSON");
  try {
    return j.get<DomainAttributes>();
  } catch (const std::exception& err) {
    throw IoError(path.string() + ": " + err.what());
  }
}

std::string format_attributes(const DomainAttributes& attrs) {
  // Canonical key order rather than the alphabetical order of json objects.
  std::string out = "{\n";
  const auto& keys = all_attribute_keys();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& v = attrs[keys[i]];
    out += "  " + json(std::string(snake_name(keys[i]))).dump() + ": " +
           (v.is_na() ? std::string("null") : json(v.text()).dump());
    out += i + 1 < keys.size() ? ",\n" : "\n";
  }
  out += "}\n";
  return out;
}

std::string format_run(const RunList& run, std::string_view tag) {
  std::string out;
  for (const auto& [qid, hits] : run) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
      out += qid + " Q0 " + hits[i].doc_id + " " + std::to_string(i + 1) + " " +
             format_score(hits[i].score) + " " + std::string(tag) + "\n";
    }
  }
  return out;
}

namespace {

std::vector<std::string> fields(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(line)};
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

}  // namespace

RunList read_run(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::vector<std::pair<std::size_t, SearchHit>>> ranked;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = fields(line);
    if (f.size() != 6) fail(path, lineno, "expected 6 fields: qid Q0 docid rank score tag");
    std::size_t rank = 0;
    double score = 0.0;
    try {
      rank = std::stoul(f[3]);
      score = std::stod(f[4]);
    } catch (const std::exception&) {
      fail(path, lineno, "rank or score is not a number");
    }
    auto& list = ranked[f[0]];
    for (const auto& [r, h] : list) {
      if (h.doc_id == f[2]) fail(path, lineno, "duplicate document " + f[2] + " for query " + f[0]);
    }
    list.push_back({rank, {f[2], score}});
  }
  RunList run;
  for (auto& [qid, list] : ranked) {
    // Order by score as trec_eval does; file rank breaks ties.
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      if (a.second.score != b.second.score) return a.second.score > b.second.score;
      return a.first < b.first;
    });
    auto& hits = run[qid];
    for (auto& [r, h] : list) hits.push_back(std::move(h));
  }
  return run;
}

Qrels read_qrels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = fields(line);
    if (f.size() != 4) fail(path, lineno, "expected 4 fields: qid 0 docid rel");
    int rel = 0;
    try {
      std::size_t used = 0;
      rel = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail(path, lineno, "relevance is not an integer");
    }
    if (rel < 0) fail(path, lineno, "negative relevance grade");
    qrels[f[0]][f[2]] = rel;
  }
  return qrels;
}

std::string format_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [qid, docs] : qrels) {
    for (const auto& [doc, rel] : docs) out += qid + "\t0\t" + doc + "\t" + std::to_string(rel) + "\n";
  }
  return out;
}

}  // namespace descadapt::io
