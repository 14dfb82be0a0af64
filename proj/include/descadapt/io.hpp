#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "descadapt/corpus_builder.hpp"
#include "descadapt/desc_understanding.hpp"
#include "descadapt/eval_metrics.hpp"
#include "descadapt/lexical_index.hpp"
#include "descadapt/pseudo_labeler.hpp"
#include "descadapt/query_gen.hpp"
#include "descadapt/taxonomy.hpp"

namespace descadapt::io {

// Every reader throws IoError naming the file and the 1-based line number
// of the first malformed record.

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for resume checks: a temp file renamed into place.
void write_text(const std::filesystem::path& path, std::string_view content);

/// JSONL {"id","text","title"?,"source_tag"?}
std::vector<Document> read_corpus(const std::filesystem::path& path);
std::string format_corpus(std::span<const Document> docs);

/// JSONL {"id","iteration","parent"}
std::string format_provenance(const SyntheticCorpus& corpus);

/// JSONL {"id","text","source_doc_id"}
std::vector<Query> read_queries(const std::filesystem::path& path);
std::string format_queries(std::span<const Query> queries);

/// JSONL {"qid","docid","score","provenance"}, grouped back per query in file order.
std::vector<LabeledQuery> read_labels(const std::filesystem::path& path);
std::string format_labels(std::span<const LabeledQuery> labels);

/// JSON array of {name, description, attributes}
ExampleBank read_example_bank(const std::filesystem::path& path);

DomainAttributes read_attributes(const std::filesystem::path& path);
std::string format_attributes(const DomainAttributes& attrs);

/// TREC run lines "qid Q0 docid rank score tag", rank from 1.
std::string format_run(const RunList& run, std::string_view tag);
RunList read_run(const std::filesystem::path& path);

/// "qid<TAB>0<TAB>docid<TAB>rel"; any whitespace separates fields.
Qrels read_qrels(const std::filesystem::path& path);
std::string format_qrels(const Qrels& qrels);

}  // namespace descadapt::io
