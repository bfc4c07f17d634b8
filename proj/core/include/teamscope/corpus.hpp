#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace teamscope {

struct DocumentRecord {
  std::string doc_id;
  int year = 0;
  std::string title;
  std::string abstract;  // may be empty
  std::string journal_issn;
  std::vector<std::string> mesh_terms;
  std::vector<std::string> author_ids;
  // aligned lists; an entry's doc id is empty when the cited work could not be
  // resolved, its issn is empty when the venue has none
  std::vector<std::string> ref_doc_ids;
  std::vector<std::string> ref_journal_issns;
};

struct JournalRecord {
  std::string issn;
  double sjr = 0.0;
  std::string category;
};

struct FilterConfig {
  int min_refs = 2;
  int min_mesh = 2;
  int min_authors = 2;
  bool require_issn = true;
  std::optional<int> year_min;
  std::optional<int> year_max;
};

struct IngestReport {
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::size_t rejected_refs = 0;
  std::size_t rejected_mesh = 0;
  std::size_t rejected_authors = 0;
  std::size_t rejected_issn = 0;
  std::size_t rejected_year = 0;
  std::size_t unknown_journal_docs = 0;  // kept but no journals.csv row
  std::size_t refs_without_issn = 0;     // reference entries lacking a venue, kept docs
  std::size_t empty_ref_entries = 0;     // entries with neither doc id nor issn, dropped
};

struct IngestInputs {
  std::filesystem::path corpus;
  std::filesystem::path journals;
  std::optional<std::filesystem::path> labels;
};

class CorpusIndex {
 public:
  const std::map<std::string, DocumentRecord>& docs() const { return docs_; }
  const std::map<std::string, JournalRecord>& journals() const { return journals_; }
  // categories are sorted and deduplicated
  const std::map<std::string, std::vector<std::string>>& labels() const { return labels_; }
  // author id -> doc ids sorted by (year, doc_id)
  const std::map<std::string, std::vector<std::string>>& authors() const { return authors_; }

  bool contains(const std::string& doc_id) const { return docs_.count(doc_id) > 0; }
  const DocumentRecord& doc(const std::string& doc_id) const;  // NotFoundError
  const DocumentRecord* find_doc(const std::string& doc_id) const;
  const JournalRecord* journal(const std::string& issn) const;

  // distinct docs whose reference list resolves to doc_id, sorted
  const std::vector<std::string>& citing_papers(const std::string& doc_id) const;

  // docs by author_id with year in [t-b, t-1], (year, id)-sorted;
  // unknown author gives an empty list
  std::vector<std::string> author_past_pubs(const std::string& author_id, int t, int b) const;

  // focal's distinct resolved references, sorted
  std::vector<std::string> resolved_refs(const std::string& doc_id) const;

  std::size_t resolved_edge_count() const { return edge_count_; }
  const FilterConfig& filter() const { return filter_; }
  const IngestReport& report() const { return report_; }

  friend CorpusIndex ingest_corpus(const IngestInputs&, const FilterConfig&);

 private:
  std::map<std::string, DocumentRecord> docs_;
  std::map<std::string, JournalRecord> journals_;
  std::map<std::string, std::vector<std::string>> labels_;
  std::map<std::string, std::vector<std::string>> authors_;
  std::map<std::string, std::vector<std::string>> citing_;
  std::size_t edge_count_ = 0;
  FilterConfig filter_;
  IngestReport report_;
};

// Streams corpus.jsonl, validates each record, applies filters, builds the
// reverse-citation and author indices. ParseError on malformed/duplicate
// records (message names the line).
CorpusIndex ingest_corpus(const IngestInputs& inputs, const FilterConfig& filter);

// Canonical on-disk form: sorted corpus.jsonl / journals.csv / labels.jsonl
// plus index_meta.json (filter + report). Two exports of equal indices are
// byte-identical.
void export_index(const CorpusIndex& index, const std::filesystem::path& dir);

// Reload an exported directory (uses the filter recorded in index_meta.json).
CorpusIndex load_index(const std::filesystem::path& dir);

struct NoveltySample {
  std::map<std::string, bool> novel;
  std::map<std::string, std::int64_t> category_counts;  // over kept docs
  std::size_t dropped_exclude_only = 0;
};

// Docs labelled solely with `exclude_only` are dropped; the rest are novel
// iff they carry at least one of novel_categories.
NoveltySample perceived_novelty_sample(
    const std::map<std::string, std::vector<std::string>>& labels,
    const std::set<std::string>& novel_categories, const std::string& exclude_only);

}  // namespace teamscope
