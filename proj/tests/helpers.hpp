#pragma once

// small fixture helpers shared by the test suites

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "teamscope/corpus.hpp"
#include "teamscope/io.hpp"

namespace testutil {

// unique scratch directory, removed on destruction
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("teamscope_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline nlohmann::ordered_json doc_json(const teamscope::DocumentRecord& d) {
  nlohmann::ordered_json obj;
  obj["doc_id"] = d.doc_id;
  obj["year"] = d.year;
  obj["title"] = d.title;
  obj["abstract"] = d.abstract;
  obj["journal_issn"] = d.journal_issn;
  obj["mesh_terms"] = d.mesh_terms;
  obj["author_ids"] = d.author_ids;
  obj["ref_doc_ids"] = d.ref_doc_ids;
  obj["ref_journal_issns"] = d.ref_journal_issns;
  return obj;
}

inline void write_corpus(const std::filesystem::path& file,
                         const std::vector<teamscope::DocumentRecord>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += doc_json(d).dump();
    out += '\n';
  }
  teamscope::atomic_write_file(file, out);
}

inline void write_journals(const std::filesystem::path& file,
                           const std::vector<teamscope::JournalRecord>& journals) {
  std::string out = "issn,sjr,category\n";
  for (const auto& j : journals)
    out += teamscope::csv_row({j.issn, teamscope::format_double(j.sjr), j.category});
  teamscope::atomic_write_file(file, out);
}

// a doc that clears the default filters; tweak fields per test
inline teamscope::DocumentRecord base_doc(const std::string& id, int year) {
  teamscope::DocumentRecord d;
  d.doc_id = id;
  d.year = year;
  d.title = "title " + id;
  d.journal_issn = "J1";
  d.mesh_terms = {"m1", "m2"};
  d.author_ids = {"A1", "A2"};
  d.ref_doc_ids = {"", ""};
  d.ref_journal_issns = {"J1", "J2"};
  return d;
}

inline teamscope::CorpusIndex ingest_dir(const std::filesystem::path& dir,
                                         const teamscope::FilterConfig& filter = {}) {
  teamscope::IngestInputs in;
  in.corpus = dir / "corpus.jsonl";
  in.journals = dir / "journals.csv";
  if (std::filesystem::exists(dir / "labels.jsonl")) in.labels = dir / "labels.jsonl";
  return teamscope::ingest_corpus(in, filter);
}

inline std::vector<teamscope::JournalRecord> default_journals() {
  return {{"J1", 1.5, "catA"}, {"J2", 0.7, "catA"}, {"J3", 2.0, "catB"}};
}

}  // namespace testutil
