#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace teamscope {

// Seeded generator of a synthetic publication corpus with planted structure:
// orthogonal topic clusters carrying journals/mesh/vocab, authors that stay
// in one cluster ("concentrated") or hop clusters ("diffuse"), and citations
// mixing within and across clusters.
struct SynthConfig {
  int n_docs = 1000;
  int n_authors = 200;
  int n_journals = 40;
  int year_min = 2000;
  int year_max = 2009;
  int dim = 64;
  std::uint64_t seed = 42;

  double frac_diffuse = 0.2;  // author archetype mix
  int n_clusters = 4;

  // reference target block weights: own block p_in, each other block p_out
  double p_in = 0.85;
  double p_out = 0.05;
  double citation_rate = 0.7;  // prob a reference resolves to an earlier doc

  int team_min = 2, team_max = 4;
  int refs_min = 2, refs_max = 8;
  int mesh_min = 2, mesh_max = 6;
  int mesh_pool = 12;     // terms per cluster
  double noise = 0.05;    // vector jitter around the cluster center
  double label_frac = 0.15;
};

SynthConfig load_synth_config(const std::filesystem::path& path);

// writes corpus.jsonl, journals.csv, labels.jsonl, vectors.jsonl, truth.jsonl
void generate_corpus(const SynthConfig& config, const std::filesystem::path& out_dir);

struct SynthTruth {
  std::map<std::string, bool> author_diffuse;
  std::map<std::string, int> author_home;
  std::map<std::string, int> journal_block;
  std::map<std::string, int> doc_cluster;
};

SynthTruth load_truth(const std::filesystem::path& truth_jsonl);

}  // namespace teamscope
