#include "teamscope/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/log.hpp"

namespace teamscope {

namespace {

using nlohmann::json;

std::string loc(const std::filesystem::path& p, std::size_t line) {
  return p.string() + ":" + std::to_string(line);
}

std::string require_string(const json& obj, const char* key, const std::string& where,
                           bool allow_missing_empty = false) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (allow_missing_empty) return {};
    throw ParseError(where + ": missing field '" + std::string(key) + "'");
  }
  if (!it->is_string())
    throw ParseError(where + ": field '" + std::string(key) + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> require_string_list(const json& obj, const char* key,
                                             const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(where + ": missing field '" + std::string(key) + "'");
  if (!it->is_array())
    throw ParseError(where + ": field '" + std::string(key) + "' must be an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string())
      throw ParseError(where + ": field '" + std::string(key) + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

DocumentRecord parse_document(const json& obj, const std::string& where) {
  DocumentRecord d;
  d.doc_id = require_string(obj, "doc_id", where);
  if (d.doc_id.empty()) throw ParseError(where + ": empty doc_id");
  auto yit = obj.find("year");
  if (yit == obj.end() || !yit->is_number_integer())
    throw ParseError(where + ": field 'year' must be an integer");
  d.year = yit->get<int>();
  d.title = require_string(obj, "title", where, true);
  d.abstract = require_string(obj, "abstract", where, true);
  d.journal_issn = require_string(obj, "journal_issn", where, true);
  d.mesh_terms = require_string_list(obj, "mesh_terms", where);
  d.author_ids = require_string_list(obj, "author_ids", where);
  d.ref_doc_ids = require_string_list(obj, "ref_doc_ids", where);
  d.ref_journal_issns = require_string_list(obj, "ref_journal_issns", where);

  if (d.ref_doc_ids.size() != d.ref_journal_issns.size())
    throw ParseError(where + ": ref_doc_ids and ref_journal_issns lengths differ");
  std::set<std::string> seen_authors(d.author_ids.begin(), d.author_ids.end());
  if (seen_authors.size() != d.author_ids.size())
    throw ParseError(where + ": duplicate entries in author_ids");
  for (const auto& r : d.ref_doc_ids)
    if (!r.empty() && r == d.doc_id)
      throw ParseError(where + ": document references itself");
  return d;
}

}  // namespace

const DocumentRecord& CorpusIndex::doc(const std::string& doc_id) const {
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) throw NotFoundError("unknown doc_id: " + doc_id);
  return it->second;
}

const DocumentRecord* CorpusIndex::find_doc(const std::string& doc_id) const {
  auto it = docs_.find(doc_id);
  return it == docs_.end() ? nullptr : &it->second;
}

const JournalRecord* CorpusIndex::journal(const std::string& issn) const {
  auto it = journals_.find(issn);
  return it == journals_.end() ? nullptr : &it->second;
}

const std::vector<std::string>& CorpusIndex::citing_papers(const std::string& doc_id) const {
  if (!contains(doc_id)) throw NotFoundError("unknown doc_id: " + doc_id);
  static const std::vector<std::string> empty;
  auto it = citing_.find(doc_id);
  return it == citing_.end() ? empty : it->second;
}

std::vector<std::string> CorpusIndex::author_past_pubs(const std::string& author_id, int t,
                                                       int b) const {
  if (b < 1) throw ConfigError("author_past_pubs: window must be >= 1");
  std::vector<std::string> out;
  auto it = authors_.find(author_id);
  if (it == authors_.end()) return out;
  for (const auto& id : it->second) {
    int y = docs_.at(id).year;
    if (y >= t - b && y <= t - 1) out.push_back(id);
  }
  return out;  // source list already (year, id)-sorted
}

std::vector<std::string> CorpusIndex::resolved_refs(const std::string& doc_id) const {
  const auto& d = doc(doc_id);
  std::set<std::string> refs;
  for (const auto& r : d.ref_doc_ids)
    if (!r.empty() && docs_.count(r)) refs.insert(r);
  return {refs.begin(), refs.end()};
}

CorpusIndex ingest_corpus(const IngestInputs& inputs, const FilterConfig& filter) {
  CorpusIndex index;
  index.filter_ = filter;
  IngestReport& rep = index.report_;

  // journals first so unknown-issn flagging can happen during the doc pass
  CsvFile jf = read_csv(inputs.journals);
  if (jf.header != std::vector<std::string>{"issn", "sjr", "category"})
    throw ParseError(inputs.journals.string() + ": header must be issn,sjr,category");
  for (std::size_t i = 0; i < jf.rows.size(); ++i) {
    const auto& row = jf.rows[i];
    JournalRecord j;
    j.issn = row[0];
    const std::string& s = row[1];
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), j.sjr);
    if (ec != std::errc() || p != s.data() + s.size() || j.sjr < 0.0)
      throw ParseError(inputs.journals.string() + ":" + std::to_string(i + 2) +
                       ": sjr must be a nonnegative number");
    j.category = row[2];
    if (j.issn.empty() || j.category.empty())
      throw ParseError(inputs.journals.string() + ":" + std::to_string(i + 2) +
                       ": issn and category must be nonempty");
    if (!index.journals_.emplace(j.issn, j).second)
      throw ParseError(inputs.journals.string() + ":" + std::to_string(i + 2) +
                       ": duplicate issn " + j.issn);
  }

  for_each_jsonl(inputs.corpus, [&](const json& obj, std::size_t lineno) {
    std::string where = loc(inputs.corpus, lineno);
    DocumentRecord d = parse_document(obj, where);
    if (index.docs_.count(d.doc_id))
      throw ParseError(where + ": duplicate doc_id " + d.doc_id);

    // drop entries that identify nothing at all
    std::vector<std::string> rid, rissn;
    for (std::size_t i = 0; i < d.ref_doc_ids.size(); ++i) {
      if (d.ref_doc_ids[i].empty() && d.ref_journal_issns[i].empty()) {
        ++rep.empty_ref_entries;
        continue;
      }
      rid.push_back(d.ref_doc_ids[i]);
      rissn.push_back(d.ref_journal_issns[i]);
    }
    d.ref_doc_ids = std::move(rid);
    d.ref_journal_issns = std::move(rissn);

    bool pass = true;
    if (static_cast<int>(d.ref_doc_ids.size()) < filter.min_refs) {
      ++rep.rejected_refs;
      pass = false;
    }
    if (static_cast<int>(d.mesh_terms.size()) < filter.min_mesh) {
      ++rep.rejected_mesh;
      pass = false;
    }
    if (static_cast<int>(d.author_ids.size()) < filter.min_authors) {
      ++rep.rejected_authors;
      pass = false;
    }
    if (filter.require_issn && d.journal_issn.empty()) {
      ++rep.rejected_issn;
      pass = false;
    }
    if ((filter.year_min && d.year < *filter.year_min) ||
        (filter.year_max && d.year > *filter.year_max)) {
      ++rep.rejected_year;
      pass = false;
    }
    if (!pass) {
      ++rep.rejected;
      return;
    }

    ++rep.kept;
    if (!d.journal_issn.empty() && !index.journals_.count(d.journal_issn)) {
      ++rep.unknown_journal_docs;
      log_debug("doc ", d.doc_id, ": journal ", d.journal_issn, " not in journals file");
    }
    for (const auto& s : d.ref_journal_issns)
      if (s.empty()) ++rep.refs_without_issn;
    index.docs_.emplace(d.doc_id, std::move(d));
  });

  // author map, (year, id)-sorted per author
  for (const auto& [id, d] : index.docs_)
    for (const auto& a : d.author_ids) index.authors_[a].push_back(id);
  for (auto& [a, ids] : index.authors_) {
    std::sort(ids.begin(), ids.end(), [&](const std::string& x, const std::string& y) {
      int yx = index.docs_.at(x).year, yy = index.docs_.at(y).year;
      return yx != yy ? yx < yy : x < y;
    });
  }

  // reverse citation map over distinct resolved edges
  for (const auto& [id, d] : index.docs_) {
    std::set<std::string> targets;
    for (const auto& r : d.ref_doc_ids)
      if (!r.empty() && index.docs_.count(r)) targets.insert(r);
    for (const auto& r : targets) index.citing_[r].push_back(id);
    index.edge_count_ += targets.size();
  }
  // std::map iteration already gives sorted citers, but keep this explicit
  for (auto& [id, citers] : index.citing_) std::sort(citers.begin(), citers.end());

  if (inputs.labels) {
    for_each_jsonl(*inputs.labels, [&](const json& obj, std::size_t lineno) {
      std::string where = loc(*inputs.labels, lineno);
      std::string id = require_string(obj, "doc_id", where);
      auto cats = require_string_list(obj, "categories", where);
      if (cats.empty()) throw ParseError(where + ": categories must be nonempty");
      std::sort(cats.begin(), cats.end());
      cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
      if (index.labels_.count(id))
        throw ParseError(where + ": duplicate label record for " + id);
      index.labels_.emplace(std::move(id), std::move(cats));
    });
  }

  return index;
}

void export_index(const CorpusIndex& index, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::string corpus_out;
  for (const auto& [id, d] : index.docs()) {
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
    corpus_out += obj.dump();
    corpus_out += '\n';
  }
  atomic_write_file(dir / "corpus.jsonl", corpus_out);

  std::string journals_out = "issn,sjr,category\n";
  for (const auto& [issn, j] : index.journals())
    journals_out += csv_row({j.issn, format_double(j.sjr), j.category});
  atomic_write_file(dir / "journals.csv", journals_out);

  if (!index.labels().empty()) {
    std::string labels_out;
    for (const auto& [id, cats] : index.labels()) {
      nlohmann::ordered_json obj;
      obj["doc_id"] = id;
      obj["categories"] = cats;
      labels_out += obj.dump();
      labels_out += '\n';
    }
    atomic_write_file(dir / "labels.jsonl", labels_out);
  }

  nlohmann::ordered_json meta;
  const FilterConfig& f = index.filter();
  meta["filter"] = {{"min_refs", f.min_refs},
                    {"min_mesh", f.min_mesh},
                    {"min_authors", f.min_authors},
                    {"require_issn", f.require_issn}};
  if (f.year_min) meta["filter"]["year_min"] = *f.year_min;
  if (f.year_max) meta["filter"]["year_max"] = *f.year_max;
  const IngestReport& r = index.report();
  meta["report"] = {{"kept", r.kept},
                    {"rejected", r.rejected},
                    {"rejected_refs", r.rejected_refs},
                    {"rejected_mesh", r.rejected_mesh},
                    {"rejected_authors", r.rejected_authors},
                    {"rejected_issn", r.rejected_issn},
                    {"rejected_year", r.rejected_year},
                    {"unknown_journal_docs", r.unknown_journal_docs},
                    {"refs_without_issn", r.refs_without_issn},
                    {"empty_ref_entries", r.empty_ref_entries}};
  atomic_write_file(dir / "index_meta.json", meta.dump(2) + "\n");
}

CorpusIndex load_index(const std::filesystem::path& dir) {
  auto meta = nlohmann::json::parse(read_text_file(dir / "index_meta.json"));
  FilterConfig f;
  const auto& jf = meta.at("filter");
  f.min_refs = jf.at("min_refs").get<int>();
  f.min_mesh = jf.at("min_mesh").get<int>();
  f.min_authors = jf.at("min_authors").get<int>();
  f.require_issn = jf.at("require_issn").get<bool>();
  if (jf.contains("year_min")) f.year_min = jf.at("year_min").get<int>();
  if (jf.contains("year_max")) f.year_max = jf.at("year_max").get<int>();
  IngestInputs inputs;
  inputs.corpus = dir / "corpus.jsonl";
  inputs.journals = dir / "journals.csv";
  if (std::filesystem::exists(dir / "labels.jsonl")) inputs.labels = dir / "labels.jsonl";
  return ingest_corpus(inputs, f);
}

NoveltySample perceived_novelty_sample(
    const std::map<std::string, std::vector<std::string>>& labels,
    const std::set<std::string>& novel_categories, const std::string& exclude_only) {
  if (novel_categories.empty())
    throw ConfigError("perceived_novelty_sample: novel_categories must be nonempty");
  NoveltySample out;
  for (const auto& [id, cats] : labels) {
    if (cats.size() == 1 && cats[0] == exclude_only) {
      ++out.dropped_exclude_only;
      continue;
    }
    bool novel = false;
    for (const auto& c : cats) {
      ++out.category_counts[c];
      if (novel_categories.count(c)) novel = true;
    }
    out.novel.emplace(id, novel);
  }
  return out;
}

}  // namespace teamscope
