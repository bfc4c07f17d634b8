#include "teamscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/rng.hpp"

namespace teamscope {

namespace {

std::string pad_id(const char* prefix, int i, int width) {
  std::ostringstream os;
  os << prefix;
  std::string digits = std::to_string(i);
  for (int k = static_cast<int>(digits.size()); k < width; ++k) os << '0';
  os << digits;
  return os.str();
}

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("synth config: " + what); };
  if (c.n_clusters < 2) fail("n_clusters must be at least 2");
  if (c.n_docs < 1) fail("n_docs must be positive");
  if (c.year_max < c.year_min) fail("year range is empty");
  if (c.n_docs < c.year_max - c.year_min + 1) fail("fewer docs than years");
  if (c.dim < 8) fail("dim must be at least 8");
  if (c.n_journals < c.n_clusters) fail("need at least one journal per cluster");
  if (c.team_min < 2 || c.team_max < c.team_min) fail("team size range must start at 2");
  if (c.n_authors < c.n_clusters * c.team_max * 2)
    fail("too few authors to staff teams in every cluster");
  if (c.refs_min < 2 || c.refs_max < c.refs_min) fail("reference count range must start at 2");
  if (c.mesh_min < 2 || c.mesh_max < c.mesh_min) fail("mesh count range must start at 2");
  if (c.mesh_pool < c.mesh_max) fail("mesh pool smaller than mesh_max");
  if (c.frac_diffuse < 0.0 || c.frac_diffuse > 1.0) fail("frac_diffuse must be in [0,1]");
  if (c.p_in < 0.0 || c.p_out < 0.0 || c.p_in + c.p_out <= 0.0)
    fail("p_in/p_out must be nonnegative and not both zero");
  if (c.citation_rate < 0.0 || c.citation_rate > 1.0) fail("citation_rate must be in [0,1]");
  if (c.noise < 0.0) fail("noise must be nonnegative");
  if (c.label_frac < 0.0 || c.label_frac > 1.0) fail("label_frac must be in [0,1]");
}

// picks the block a reference points at: own block with weight p_in, each
// other block with weight p_out
int pick_block(Rng& rng, int own, int n_clusters, double p_in, double p_out) {
  double total = p_in + p_out * (n_clusters - 1);
  double u = rng.next_unit() * total;
  if (u < p_in) return own;
  int step = 1 + static_cast<int>((u - p_in) / p_out);
  if (step > n_clusters - 1) step = n_clusters - 1;
  return (own + step) % n_clusters;
}

}  // namespace

SynthConfig load_synth_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  SynthConfig c;
  auto get_int = [&](const char* key, int& slot) {
    if (j.contains(key)) slot = j.at(key).get<int>();
  };
  auto get_double = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  try {
    get_int("n_docs", c.n_docs);
    get_int("n_authors", c.n_authors);
    get_int("n_journals", c.n_journals);
    get_int("year_min", c.year_min);
    get_int("year_max", c.year_max);
    get_int("dim", c.dim);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    get_double("frac_diffuse", c.frac_diffuse);
    get_int("n_clusters", c.n_clusters);
    get_double("p_in", c.p_in);
    get_double("p_out", c.p_out);
    get_double("citation_rate", c.citation_rate);
    get_int("team_min", c.team_min);
    get_int("team_max", c.team_max);
    get_int("refs_min", c.refs_min);
    get_int("refs_max", c.refs_max);
    get_int("mesh_min", c.mesh_min);
    get_int("mesh_max", c.mesh_max);
    get_int("mesh_pool", c.mesh_pool);
    get_double("noise", c.noise);
    get_double("label_frac", c.label_frac);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return c;
}

void generate_corpus(const SynthConfig& config, const std::filesystem::path& out_dir) {
  validate(config);
  std::filesystem::create_directories(out_dir);
  Rng rng(config.seed);

  const int nc = config.n_clusters;
  const int block_width = config.dim / nc;
  if (block_width < 1) throw ConfigError("synth config: dim smaller than n_clusters");

  // journals round-robin over blocks so every block gets some
  std::vector<std::string> journal_issn(config.n_journals);
  std::vector<int> journal_block(config.n_journals);
  std::vector<double> journal_sjr(config.n_journals);
  std::vector<std::vector<int>> block_journals(nc);
  for (int i = 0; i < config.n_journals; ++i) {
    journal_issn[i] = pad_id("9", i, 7);  // issn-shaped digit string
    journal_block[i] = i % nc;
    journal_sjr[i] = 0.1 + std::abs(rng.next_normal()) * 1.5;
    block_journals[i % nc].push_back(i);
  }

  // authors in round-robin home clusters; archetype drawn per author
  std::vector<std::string> author_id(config.n_authors);
  std::vector<int> author_home(config.n_authors);
  std::vector<bool> author_diffuse(config.n_authors);
  std::vector<int> author_last_cluster(config.n_authors);
  std::vector<std::vector<int>> cluster_authors(nc);
  for (int i = 0; i < config.n_authors; ++i) {
    author_id[i] = pad_id("A", i, 5);
    author_home[i] = i % nc;
    author_diffuse[i] = rng.next_unit() < config.frac_diffuse;
    author_last_cluster[i] = author_home[i];
    cluster_authors[i % nc].push_back(i);
  }

  // per-cluster vocab for titles/abstracts and mesh pools
  std::vector<std::vector<std::string>> cluster_words(nc);
  std::vector<std::vector<std::string>> cluster_mesh(nc);
  for (int cl = 0; cl < nc; ++cl) {
    for (int w = 0; w < 40; ++w)
      cluster_words[cl].push_back("w" + std::to_string(cl) + "x" + std::to_string(w));
    for (int m = 0; m < config.mesh_pool; ++m)
      cluster_mesh[cl].push_back("M" + std::to_string(cl) + "-" + std::to_string(m));
  }

  const int n_years = config.year_max - config.year_min + 1;
  const int per_year = config.n_docs / n_years;
  const int extra = config.n_docs % n_years;

  struct DocOut {
    std::string id;
    int year = 0;
    int cluster = 0;
    int journal = 0;
    std::vector<std::string> mesh;
    std::vector<int> team;
    std::vector<std::string> ref_ids;
    std::vector<std::string> ref_issns;
    std::string title, abstract;
    std::vector<double> vec;
  };
  std::vector<DocOut> docs;
  docs.reserve(config.n_docs);
  std::vector<std::vector<int>> cluster_docs(nc);  // indices of earlier docs per cluster

  auto sample_words = [&](int cl, int count) {
    std::string text;
    for (int w = 0; w < count; ++w) {
      if (!text.empty()) text += ' ';
      text += cluster_words[cl][rng.next_below(cluster_words[cl].size())];
    }
    return text;
  };

  int doc_counter = 0;
  for (int yi = 0; yi < n_years; ++yi) {
    int year = config.year_min + yi;
    int count = per_year + (yi < extra ? 1 : 0);
    for (int d = 0; d < count; ++d) {
      DocOut doc;
      doc.id = pad_id("D", doc_counter, 6);
      doc.year = year;

      // lead picks the cluster; diffuse leads hop away from their last one
      int lead = static_cast<int>(rng.next_below(config.n_authors));
      if (author_diffuse[lead]) {
        int hop = 1 + static_cast<int>(rng.next_below(nc - 1));
        doc.cluster = (author_last_cluster[lead] + hop) % nc;
      } else {
        doc.cluster = author_home[lead];
      }
      author_last_cluster[lead] = doc.cluster;

      // team: lead plus distinct co-authors drawn from the doc's cluster pool
      int team_size =
          config.team_min + static_cast<int>(rng.next_below(config.team_max - config.team_min + 1));
      std::set<int> team{lead};
      const auto& pool = cluster_authors[doc.cluster];
      int guard = 0;
      while (static_cast<int>(team.size()) < team_size && guard < 200) {
        ++guard;
        int cand = pool[rng.next_below(pool.size())];
        team.insert(cand);
      }
      while (static_cast<int>(team.size()) < team_size) {
        // tiny pools: fall back to the global author list
        team.insert(static_cast<int>(rng.next_below(config.n_authors)));
      }
      doc.team.assign(team.begin(), team.end());
      for (int a : doc.team) author_last_cluster[a] = doc.cluster;

      doc.journal = block_journals[doc.cluster][rng.next_below(block_journals[doc.cluster].size())];

      int mesh_count =
          config.mesh_min + static_cast<int>(rng.next_below(config.mesh_max - config.mesh_min + 1));
      std::set<std::string> mesh;
      while (static_cast<int>(mesh.size()) < mesh_count) {
        int cl = doc.cluster;
        if (rng.next_unit() < 0.15) cl = static_cast<int>(rng.next_below(nc));
        mesh.insert(cluster_mesh[cl][rng.next_below(cluster_mesh[cl].size())]);
      }
      doc.mesh.assign(mesh.begin(), mesh.end());

      int ref_count =
          config.refs_min + static_cast<int>(rng.next_below(config.refs_max - config.refs_min + 1));
      std::set<int> cited;
      for (int r = 0; r < ref_count; ++r) {
        int block = pick_block(rng, doc.cluster, nc, config.p_in, config.p_out);
        const auto& candidates = cluster_docs[block];
        bool resolve = !candidates.empty() && rng.next_unit() < config.citation_rate;
        if (resolve) {
          int pick = candidates[rng.next_below(candidates.size())];
          if (cited.insert(pick).second) {
            doc.ref_ids.push_back(docs[pick].id);
            doc.ref_issns.push_back(journal_issn[docs[pick].journal]);
            continue;
          }
        }
        doc.ref_ids.push_back("");
        doc.ref_issns.push_back(journal_issn[block_journals[block][rng.next_below(block_journals[block].size())]]);
      }

      doc.title = sample_words(doc.cluster, 4 + static_cast<int>(rng.next_below(5)));
      doc.abstract = sample_words(doc.cluster, 10 + static_cast<int>(rng.next_below(11)));

      // cluster center occupies one coordinate block; jitter then normalize
      doc.vec.assign(config.dim, 0.0);
      double base = 1.0 / std::sqrt(static_cast<double>(block_width));
      for (int k = 0; k < block_width; ++k) doc.vec[doc.cluster * block_width + k] = base;
      if (config.noise > 0.0)
        for (int k = 0; k < config.dim; ++k) doc.vec[k] += config.noise * rng.next_normal();
      double norm = 0.0;
      for (double v : doc.vec) norm += v * v;
      norm = std::sqrt(norm);
      for (double& v : doc.vec) v /= norm;

      cluster_docs[doc.cluster].push_back(doc_counter);
      docs.push_back(std::move(doc));
      ++doc_counter;
    }
  }

  // labels: a slice of docs gets perception categories
  const std::vector<std::string> extra_categories{
      "Technical Advance", "Interesting Hypothesis", "Novel Drug Target", "Controversial",
      "Confirmation"};
  std::vector<std::pair<std::string, std::vector<std::string>>> labels;
  for (const auto& doc : docs) {
    if (rng.next_unit() >= config.label_frac) continue;
    std::set<std::string> cats;
    if (rng.next_unit() < 0.75) cats.insert("New Finding");
    for (const auto& cat : extra_categories)
      if (rng.next_unit() < 0.2) cats.insert(cat);
    if (cats.empty()) cats.insert("New Finding");
    labels.emplace_back(doc.id, std::vector<std::string>(cats.begin(), cats.end()));
  }

  // emit all artifacts with canonical field order
  std::string corpus_out;
  for (const auto& doc : docs) {
    nlohmann::ordered_json j;
    j["doc_id"] = doc.id;
    j["year"] = doc.year;
    j["title"] = doc.title;
    j["abstract"] = doc.abstract;
    j["journal_issn"] = journal_issn[doc.journal];
    j["mesh_terms"] = doc.mesh;
    nlohmann::ordered_json authors = nlohmann::ordered_json::array();
    for (int a : doc.team) authors.push_back(author_id[a]);
    j["author_ids"] = std::move(authors);
    j["ref_doc_ids"] = doc.ref_ids;
    j["ref_journal_issns"] = doc.ref_issns;
    corpus_out += j.dump();
    corpus_out += '\n';
  }
  atomic_write_file(out_dir / "corpus.jsonl", corpus_out);

  std::string journals_out = "issn,sjr,category\n";
  for (int i = 0; i < config.n_journals; ++i) {
    journals_out += csv_row({journal_issn[i], format_double(journal_sjr[i]),
                                 "cat" + std::to_string(journal_block[i])});
    journals_out += '\n';
  }
  atomic_write_file(out_dir / "journals.csv", journals_out);

  std::string labels_out;
  for (const auto& [id, cats] : labels) {
    nlohmann::ordered_json j;
    j["doc_id"] = id;
    j["categories"] = cats;
    labels_out += j.dump();
    labels_out += '\n';
  }
  atomic_write_file(out_dir / "labels.jsonl", labels_out);

  std::string vectors_out;
  for (const auto& doc : docs) {
    nlohmann::ordered_json j;
    j["doc_id"] = doc.id;
    j["values"] = doc.vec;
    vectors_out += j.dump();
    vectors_out += '\n';
  }
  atomic_write_file(out_dir / "vectors.jsonl", vectors_out);

  std::string truth_out;
  for (int i = 0; i < config.n_authors; ++i) {
    nlohmann::ordered_json j;
    j["type"] = "author";
    j["author_id"] = author_id[i];
    j["archetype"] = author_diffuse[i] ? "diffuse" : "concentrated";
    j["home_cluster"] = author_home[i];
    truth_out += j.dump();
    truth_out += '\n';
  }
  for (int i = 0; i < config.n_journals; ++i) {
    nlohmann::ordered_json j;
    j["type"] = "journal";
    j["issn"] = journal_issn[i];
    j["block"] = journal_block[i];
    truth_out += j.dump();
    truth_out += '\n';
  }
  for (const auto& doc : docs) {
    nlohmann::ordered_json j;
    j["type"] = "doc";
    j["doc_id"] = doc.id;
    j["cluster"] = doc.cluster;
    truth_out += j.dump();
    truth_out += '\n';
  }
  atomic_write_file(out_dir / "truth.jsonl", truth_out);
}

SynthTruth load_truth(const std::filesystem::path& truth_jsonl) {
  SynthTruth truth;
  for_each_jsonl(truth_jsonl, [&](const nlohmann::json& j, std::size_t line) {
    std::string type = j.value("type", "");
    if (type == "author") {
      truth.author_diffuse[j.at("author_id").get<std::string>()] =
          j.at("archetype").get<std::string>() == "diffuse";
      truth.author_home[j.at("author_id").get<std::string>()] = j.at("home_cluster").get<int>();
    } else if (type == "journal") {
      truth.journal_block[j.at("issn").get<std::string>()] = j.at("block").get<int>();
    } else if (type == "doc") {
      truth.doc_cluster[j.at("doc_id").get<std::string>()] = j.at("cluster").get<int>();
    } else {
      throw ParseError(truth_jsonl.string() + ":" + std::to_string(line) +
                       ": unknown truth record type");
    }
  });
  return truth;
}

}  // namespace teamscope
