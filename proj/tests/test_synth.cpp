#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "teamscope/corpus.hpp"
#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/synth.hpp"
#include "teamscope/vectors.hpp"

using namespace teamscope;
using testutil::TempDir;

namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.n_docs = 200;
  c.n_authors = 48;
  c.n_journals = 8;
  c.year_min = 2000;
  c.year_max = 2004;
  c.dim = 16;
  c.frac_diffuse = 0.25;
  return c;
}

const std::vector<std::string> kArtifacts{"corpus.jsonl", "journals.csv", "labels.jsonl",
                                          "vectors.jsonl", "truth.jsonl"};

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("generation is reproducible and seed sensitive") {
  TempDir a("synth_det_a"), b("synth_det_b"), c("synth_det_c");
  SynthConfig cfg = small_config();
  generate_corpus(cfg, a.path);
  generate_corpus(cfg, b.path);
  for (const auto& f : kArtifacts)
    CHECK(read_text_file(a / f) == read_text_file(b / f));
  cfg.seed = 43;
  generate_corpus(cfg, c.path);
  CHECK(read_text_file(a / "corpus.jsonl") != read_text_file(c / "corpus.jsonl"));
}

TEST_CASE("generated corpora pass the default ingest filter untouched") {
  TempDir dir("synth_ingest");
  generate_corpus(small_config(), dir.path);
  CorpusIndex idx = testutil::ingest_dir(dir.path);
  const IngestReport& r = idx.report();
  CHECK(r.kept == 200);
  CHECK(r.rejected == 0);
  CHECK(r.empty_ref_entries == 0);
  CHECK(r.refs_without_issn == 0);
  CHECK(r.unknown_journal_docs == 0);
  CHECK(idx.resolved_edge_count() > 0);
  // year layout covers the whole configured range
  std::set<int> years;
  for (const auto& [id, d] : idx.docs()) years.insert(d.year);
  CHECK(years == std::set<int>{2000, 2001, 2002, 2003, 2004});
}

TEST_CASE("the truth file describes every author, journal and document") {
  TempDir dir("synth_truth");
  SynthConfig cfg = small_config();
  generate_corpus(cfg, dir.path);
  SynthTruth truth = load_truth(dir / "truth.jsonl");
  CHECK(truth.author_diffuse.size() == 48);
  CHECK(truth.author_home.size() == 48);
  CHECK(truth.journal_block.size() == 8);
  CHECK(truth.doc_cluster.size() == 200);
  for (const auto& [a, home] : truth.author_home) {
    CHECK(home >= 0);
    CHECK(home < cfg.n_clusters);
  }
  // homes are assigned round-robin over the numbered author ids
  CHECK(truth.author_home.at("A00000") == 0);
  CHECK(truth.author_home.at("A00001") == 1);
  CHECK(truth.author_home.at("A00005") == 1);
  for (const auto& [j, block] : truth.journal_block) {
    CHECK(block >= 0);
    CHECK(block < cfg.n_clusters);
  }
  std::size_t diffuse = 0;
  for (const auto& [a, d] : truth.author_diffuse) diffuse += d ? 1 : 0;
  CHECK(diffuse >= 3);   // binomial(48, 0.25) stays far from the edges
  CHECK(diffuse <= 24);
}

TEST_CASE("concentrated authors publish only inside their home cluster") {
  TempDir dir("synth_home");
  generate_corpus(small_config(), dir.path);
  SynthTruth truth = load_truth(dir / "truth.jsonl");
  CorpusIndex idx = testutil::ingest_dir(dir.path);
  std::size_t checked = 0;
  for (const auto& [author, doc_ids] : idx.authors()) {
    if (truth.author_diffuse.at(author)) continue;
    for (const auto& d : doc_ids) {
      CHECK(truth.doc_cluster.at(d) == truth.author_home.at(author));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("diffuse authors with several papers roam across clusters") {
  TempDir dir("synth_roam");
  generate_corpus(small_config(), dir.path);
  SynthTruth truth = load_truth(dir / "truth.jsonl");
  CorpusIndex idx = testutil::ingest_dir(dir.path);
  std::size_t eligible = 0, roaming = 0;
  for (const auto& [author, doc_ids] : idx.authors()) {
    if (!truth.author_diffuse.at(author) || doc_ids.size() < 2) continue;
    ++eligible;
    std::set<int> clusters;
    for (const auto& d : doc_ids) clusters.insert(truth.doc_cluster.at(d));
    if (clusters.size() >= 2) ++roaming;
  }
  REQUIRE(eligible > 0);
  CHECK(static_cast<double>(roaming) >= 0.8 * static_cast<double>(eligible));
}

TEST_CASE("labels attach to real documents with non-empty categories") {
  TempDir dir("synth_labels");
  generate_corpus(small_config(), dir.path);
  CorpusIndex idx = testutil::ingest_dir(dir.path);
  const auto& labels = idx.labels();
  CHECK(labels.size() >= 10);  // around 15% of 200
  CHECK(labels.size() <= 60);
  bool saw_new_finding = false, saw_multi = false;
  for (const auto& [doc, cats] : labels) {
    CHECK(idx.contains(doc));
    CHECK_FALSE(cats.empty());
    for (const auto& c : cats) saw_new_finding = saw_new_finding || c == "New Finding";
    saw_multi = saw_multi || cats.size() >= 2;
  }
  CHECK(saw_new_finding);
  CHECK(saw_multi);
}

TEST_CASE("vectors are unit length and separate the planted clusters") {
  TempDir dir("synth_vectors");
  SynthConfig cfg = small_config();
  generate_corpus(cfg, dir.path);
  SynthTruth truth = load_truth(dir / "truth.jsonl");
  VectorStore store = load_vectors(dir / "vectors.jsonl");
  CHECK(store.size() == 200);
  CHECK(store.dim() == cfg.dim);
  for (const auto& [id, v] : store.all()) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  }
  // first two docs of cluster 0 sit together, far from the first of cluster 1
  std::vector<std::string> c0, c1;
  for (const auto& [doc, cl] : truth.doc_cluster) {
    if (cl == 0 && c0.size() < 2) c0.push_back(doc);
    if (cl == 1 && c1.empty()) c1.push_back(doc);
  }
  REQUIRE(c0.size() == 2);
  REQUIRE(c1.size() == 1);
  CHECK(cosine_distance(*store.find(c0[0]), *store.find(c0[1])) < 0.5);
  CHECK(cosine_distance(*store.find(c0[0]), *store.find(c1[0])) > 0.5);
}

TEST_CASE("config files override only the keys they name") {
  TempDir dir("synth_cfg");
  atomic_write_file(dir / "c.json", R"({"n_docs": 50, "seed": 7, "noise": 0.1})");
  SynthConfig c = load_synth_config(dir / "c.json");
  CHECK(c.n_docs == 50);
  CHECK(c.seed == 7);
  CHECK(c.noise == 0.1);
  CHECK(c.n_clusters == 4);        // untouched defaults
  CHECK(c.frac_diffuse == 0.2);
  CHECK(c.year_min == 2000);

  atomic_write_file(dir / "bad.json", "{nope");
  CHECK_THROWS_AS(load_synth_config(dir / "bad.json"), ParseError);
  atomic_write_file(dir / "arr.json", "[1,2]");
  CHECK_THROWS_AS(load_synth_config(dir / "arr.json"), ParseError);
  atomic_write_file(dir / "typ.json", R"({"n_docs": "many"})");
  CHECK_THROWS_AS(load_synth_config(dir / "typ.json"), ParseError);
}

TEST_CASE("invalid configurations are rejected before any file is written") {
  TempDir dir("synth_invalid");
  auto expect_config_error = [&](SynthConfig c) {
    CHECK_THROWS_AS(generate_corpus(c, dir / "out"), ConfigError);
  };
  SynthConfig base = small_config();
  SynthConfig c = base;
  c.n_clusters = 1;
  expect_config_error(c);
  c = base;
  c.dim = 4;
  expect_config_error(c);
  c = base;
  c.team_min = 1;
  expect_config_error(c);
  c = base;
  c.refs_min = 1;
  expect_config_error(c);
  c = base;
  c.n_docs = 3;  // fewer docs than years
  expect_config_error(c);
  c = base;
  c.n_journals = 3;  // fewer journals than clusters
  expect_config_error(c);
  c = base;
  c.frac_diffuse = 1.5;
  expect_config_error(c);
  c = base;
  c.mesh_pool = 1;
  expect_config_error(c);
  c = base;
  c.n_authors = 10;  // cannot staff teams
  expect_config_error(c);
}

}  // TEST_SUITE
