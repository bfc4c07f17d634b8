#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "teamscope/cognitive.hpp"
#include "teamscope/corpus.hpp"
#include "teamscope/errors.hpp"
#include "teamscope/vectors.hpp"

using namespace teamscope;
using testutil::TempDir;

namespace {

// past pubs sit on coordinate axes, so every cross-axis distance is exactly 1
struct Fixture {
  TempDir dir{"cognitive"};
  CorpusIndex index;
  VectorStore store;

  Fixture() {
    auto mk = [&](const std::string& id, int year, std::vector<std::string> authors) {
      auto d = testutil::base_doc(id, year);
      d.author_ids = std::move(authors);
      return d;
    };
    std::vector<DocumentRecord> docs{
        mk("P0", 1999, {"A1", "AX"}),        // outside the b=5 window of 2005
        mk("P1", 2001, {"A1", "AX"}),        // e1
        mk("P2", 2002, {"A1", "AX"}),        // e2
        mk("P3", 2003, {"A1", "A2"}),        // e1, shared by both authors
        mk("P4", 2004, {"A2", "AX"}),        // e3
        mk("P5", 2004, {"A2", "AX"}),        // e4
        mk("P6", 2003, {"A2", "AX"}),        // no vector
        mk("P7", 2005, {"A1", "AX"}),        // focal year, not "past"
        mk("F", 2005, {"A1", "A2"}),
    };
    testutil::write_corpus(dir / "corpus.jsonl", docs);
    testutil::write_journals(dir / "journals.csv", testutil::default_journals());
    index = testutil::ingest_dir(dir.path);

    auto axis = [](int k) {
      std::vector<double> v(4, 0.0);
      v[k] = 1.0;
      return v;
    };
    store.insert("P0", axis(0));
    store.insert("P1", axis(0));
    store.insert("P2", axis(1));
    store.insert("P3", axis(0));
    store.insert("P4", axis(2));
    store.insert("P5", axis(3));
    store.insert("P7", axis(1));
    store.insert("F", axis(0));
    // P6 deliberately unembedded
  }
};

}  // namespace

TEST_SUITE("cognitive") {

TEST_CASE("author distance distribution enumerates window pairs") {
  Fixture fx;
  CognitiveParams p;  // b=5, q=90
  auto dist = author_distance_distribution(fx.index, fx.store, "A1", "F", p);
  CHECK(dist.n_past_docs == 3);  // P1, P2, P3; P0 too old, P7 same year
  CHECK(dist.n_embedded == 3);
  CHECK(dist.skipped_no_vector == 0);
  REQUIRE(dist.distances.size() == 3);
  // (P1,P2)=1, (P1,P3)=0, (P2,P3)=1 in (year, id) order
  CHECK(dist.distances[0] == 1.0);
  CHECK(dist.distances[1] == 0.0);
  CHECK(dist.distances[2] == 1.0);
}

TEST_CASE("intra is the q-th percentile of the pair distances") {
  Fixture fx;
  CognitiveParams p;
  p.q = 90.0;
  CHECK(intra_author(fx.index, fx.store, "A1", "F", p) == 1.0);
  p.q = 25.0;  // sorted {0,1,1}: position 0.5 interpolates to 0.5
  CHECK(intra_author(fx.index, fx.store, "A1", "F", p) == 0.5);
}

TEST_CASE("unembedded past docs are skipped and counted") {
  Fixture fx;
  CognitiveParams p;
  int skipped = 0;
  auto v = intra_author(fx.index, fx.store, "A2", "F", p, &skipped);
  CHECK(skipped == 1);  // P6 has no vector
  CHECK(v == 1.0);      // P3, P4, P5 are mutually orthogonal
}

TEST_CASE("fewer than two embedded past docs gives no score") {
  Fixture fx;
  CognitiveParams p;
  // AX has one past pub before P1 (P0), an unknown author has none
  CHECK_FALSE(intra_author(fx.index, fx.store, "AX", "P1", p).has_value());
  CHECK_FALSE(intra_author(fx.index, fx.store, "ghost", "F", p).has_value());
}

TEST_CASE("inter pools cross-author distances only") {
  Fixture fx;
  CognitiveParams p;
  TeamScores s = score_team(fx.index, fx.store, "F", p);
  // A1 {P1,P2,P3} x A2 {P3,P4,P5}: 9 pairs, two of them distance 0
  CHECK(s.pool_size == 9);
  p.q = 10.0;  // sorted {0,0,1,...}: position 0.8 stays in the zero block
  CHECK(inter_author(fx.index, fx.store, "F", p) == 0.0);
  p.q = 90.0;
  CHECK(inter_author(fx.index, fx.store, "F", p) == 1.0);
}

TEST_CASE("excluding shared-document pairs shrinks the pool") {
  Fixture fx;
  CognitiveParams p;
  p.exclude_shared_doc_pairs = true;
  TeamScores s = score_team(fx.index, fx.store, "F", p);
  CHECK(s.pool_size == 8);  // (P3, P3) dropped; (P1, P3) stays, distinct docs
  CHECK(*s.inter == 1.0);   // q=90 sits in the ones
  p.q = 10.0;  // sorted {0,1,1,1,1,1,1,1}: position (10/100)*7, interpolated
  CHECK(*inter_author(fx.index, fx.store, "F", p) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("team intra averages the defined scores") {
  Fixture fx;
  CognitiveParams p;
  p.q = 25.0;
  TeamScores s = score_team(fx.index, fx.store, "F", p);
  REQUIRE(s.authors.size() == 2);
  CHECK(s.authors[0].author_id == "A1");
  CHECK(*s.authors[0].intra == 0.5);
  CHECK(*s.authors[1].intra == 1.0);
  CHECK(*team_intra(s) == 0.75);

  TeamScores none;
  none.authors.push_back(AuthorScore{"A1", std::nullopt, 0, 0, 0});
  CHECK_FALSE(team_intra(none).has_value());
}

TEST_CASE("scores ignore author order in the document record") {
  Fixture fx;
  CognitiveParams p;
  TeamScores forward = score_team(fx.index, fx.store, "F", p);

  TempDir dir2("cognitive_reorder");
  std::vector<DocumentRecord> docs;
  for (const auto& [id, d] : fx.index.docs()) docs.push_back(d);
  for (auto& d : docs)
    if (d.doc_id == "F") d.author_ids = {"A2", "A1"};
  testutil::write_corpus(dir2 / "corpus.jsonl", docs);
  testutil::write_journals(dir2 / "journals.csv", testutil::default_journals());
  CorpusIndex reordered = testutil::ingest_dir(dir2.path);
  TeamScores backward = score_team(reordered, fx.store, "F", p);

  CHECK(*team_intra(forward) == *team_intra(backward));
  CHECK(*forward.inter == *backward.inter);
  CHECK(forward.pool_size == backward.pool_size);
}

TEST_CASE("fit_thresholds takes percentiles of the pooled sample") {
  std::vector<double> scores;
  for (int i = 0; i <= 10; ++i) scores.push_back(static_cast<double>(i));
  ProfileThresholds t = fit_thresholds(scores, 90.0, 50.0, 10);
  CHECK(t.exploratory_cutoff == 9.0);
  CHECK(t.exploitative_cutoff == 5.0);
  CHECK_THROWS_AS(fit_thresholds({1.0, 2.0}, 90.0, 50.0, 10), ComputeError);
}

TEST_CASE("composition counts threshold crossings inclusively") {
  TeamScores s;
  s.focal_doc_id = "F";
  s.authors = {
      AuthorScore{"A1", 1.0, 3, 3, 0},           // == hi, exploratory
      AuthorScore{"A2", 0.5, 3, 3, 0},           // == lo, exploitative
      AuthorScore{"A3", 0.75, 2, 2, 0},          // neither
      AuthorScore{"A4", std::nullopt, 1, 1, 0},  // unscored, still in the team
  };
  s.inter = 0.9;
  ProfileThresholds t;
  t.exploratory_cutoff = 1.0;
  t.exploitative_cutoff = 0.5;
  TeamCognitiveMetrics m = team_composition(s, t);
  CHECK(m.n_authors == 4);
  CHECK(m.n_scored == 3);
  CHECK(m.n_exploratory == 1);
  CHECK(m.n_exploitative == 1);
  CHECK(m.share_exploratory == 0.25);  // over the full team size
  CHECK(m.share_exploitative == 0.25);
  CHECK(m.interaction == 0.0625);
  CHECK(*m.inter_fp == 0.9);
  CHECK(*m.intra_fp == 0.75);
}

TEST_CASE("an all-unscored team has zero shares") {
  TeamScores s;
  s.focal_doc_id = "F";
  s.authors = {AuthorScore{"A1", std::nullopt, 0, 0, 0},
               AuthorScore{"A2", std::nullopt, 0, 0, 0}};
  TeamCognitiveMetrics m = team_composition(s, ProfileThresholds{1.0, 0.5});
  CHECK(m.n_authors == 2);
  CHECK(m.n_scored == 0);
  CHECK(m.share_exploratory == 0.0);
  CHECK(m.share_exploitative == 0.0);
  CHECK(m.interaction == 0.0);
  CHECK_FALSE(m.intra_fp.has_value());
  CHECK_FALSE(m.inter_fp.has_value());
}

}  // TEST_SUITE
