#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "teamscope/cooc.hpp"
#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/novelty.hpp"
#include "teamscope/vectors.hpp"

using namespace teamscope;
using testutil::TempDir;

namespace {

EntityVocabulary four_entities(const TempDir& dir) {
  atomic_write_file(dir / "vocab.txt", "e0\ne1\ne2\ne3\n");
  return EntityVocabulary::load(dir / "vocab.txt", EntityKind::journal);
}

DocumentRecord doc_with(std::vector<std::string> issns, int year = 2000) {
  DocumentRecord d;
  d.doc_id = "D";
  d.year = year;
  d.ref_doc_ids.assign(issns.size(), "");
  d.ref_journal_issns = std::move(issns);
  return d;
}

}  // namespace

TEST_SUITE("novelty") {

TEST_CASE("atypicality z-scores flip sign and aggregate at the low tail") {
  TempDir dir("novelty_uzzi");
  auto v = four_entities(dir);
  PairCountTable t(2000, 4);
  t.add_pair(PairKey{0, 1}, 2);
  t.add_pair(PairKey{1, 2}, 1);
  NullModelStats null;
  null.stats[PairKey{0, 1}] = {0.0, 1.0};  // z = 2
  null.stats[PairKey{0, 2}] = {0.0, 1.0};  // z = 0, pair absent from the table
  null.stats[PairKey{1, 2}] = {0.0, 2.0};  // z = 0.5

  std::string flag;
  auto s = uzzi_score(doc_with({"e0", "e1", "e2"}), EntityKind::journal, v, t, null, 10.0,
                      false, &flag);
  REQUIRE(s.has_value());
  // sorted z {0, 0.5, 2}, 10th percentile = 0.1, flipped
  CHECK(*s == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(flag.empty());

  auto m = uzzi_score(doc_with({"e0", "e1", "e2"}), EntityKind::journal, v, t, null, 10.0,
                      true);
  CHECK(*m == doctest::Approx(-2.5 / 3.0).epsilon(1e-12));
}

TEST_CASE("rare combinations score positive") {
  TempDir dir("novelty_uzzi_rare");
  auto v = four_entities(dir);
  PairCountTable t(2000, 4);  // pair unobserved, count 0
  NullModelStats null;
  null.stats[PairKey{0, 1}] = {10.0, 5.0};  // z = -2
  auto s = uzzi_score(doc_with({"e0", "e1"}), EntityKind::journal, v, t, null);
  CHECK(*s == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("atypicality needs pairs and defined z-scores") {
  TempDir dir("novelty_uzzi_flags");
  auto v = four_entities(dir);
  PairCountTable t(2000, 4);
  NullModelStats null;
  std::string flag;
  CHECK_FALSE(uzzi_score(doc_with({"e0"}), EntityKind::journal, v, t, null, 10.0, false,
                         &flag)
                  .has_value());
  CHECK(flag == "too_few_entities");

  null.stats[PairKey{0, 1}] = {3.0, 0.0};  // degenerate null
  flag.clear();
  CHECK_FALSE(uzzi_score(doc_with({"e0", "e1"}), EntityKind::journal, v, t, null, 10.0,
                         false, &flag)
                  .has_value());
  CHECK(flag == "all_sigma_zero");

  flag.clear();  // pair never seen in the null at all
  CHECK_FALSE(uzzi_score(doc_with({"e2", "e3"}), EntityKind::journal, v, t, null, 10.0,
                         false, &flag)
                  .has_value());
  CHECK(flag == "all_sigma_zero");
}

TEST_CASE("commonness novelty is the negative log of the low tail") {
  TempDir dir("novelty_lee");
  auto v = four_entities(dir);
  PairCountTable t(2000, 4);
  t.add_pair(PairKey{0, 1}, 3);
  t.add_pair(PairKey{0, 0}, 1);
  // total 4, marginals m0 = 4, m1 = 3: C(0,1) = 1, C(0,0) = 0.25

  auto a = lee_score(doc_with({"e0", "e1"}), EntityKind::journal, v, t);
  CHECK(*a == doctest::Approx(0.0).epsilon(1e-12));

  auto b = lee_score(doc_with({"e0", "e0"}), EntityKind::journal, v, t);
  CHECK(*b == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // commonness {0.25, 1, 1}: 10th percentile = 0.25 + 0.2 * 0.75 = 0.4
  auto c = lee_score(doc_with({"e0", "e0", "e1"}), EntityKind::journal, v, t);
  CHECK(*c == doctest::Approx(-std::log(0.4)).epsilon(1e-12));
}

TEST_CASE("commonness novelty refuses unseen pairs and tiny docs") {
  TempDir dir("novelty_lee_flags");
  auto v = four_entities(dir);
  PairCountTable t(2000, 4);
  t.add_pair(PairKey{0, 1}, 3);
  std::string flag;
  CHECK_FALSE(
      lee_score(doc_with({"e1", "e2"}), EntityKind::journal, v, t, 10.0, &flag).has_value());
  CHECK(flag == "zero_commonness");
  flag.clear();
  CHECK_FALSE(lee_score(doc_with({"e0"}), EntityKind::journal, v, t, 10.0, &flag).has_value());
  CHECK(flag == "too_few_entities");
}

TEST_CASE("bridging share counts cross-community pairs") {
  TempDir dir("novelty_foster");
  auto v = four_entities(dir);
  CommunityPartition p;
  p.community = {0, 0, 1, -1};

  CHECK(*foster_score(doc_with({"e0", "e1"}), EntityKind::journal, v, p) == 0.0);
  CHECK(*foster_score(doc_with({"e0", "e2"}), EntityKind::journal, v, p) == 1.0);
  CHECK(*foster_score(doc_with({"e0", "e0"}), EntityKind::journal, v, p) == 0.0);
  auto mixed = foster_score(doc_with({"e0", "e1", "e2"}), EntityKind::journal, v, p);
  CHECK(*mixed == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  std::string flag;
  CHECK_FALSE(foster_score(doc_with({"e0", "e3"}), EntityKind::journal, v, p, &flag)
                  .has_value());
  CHECK(flag == "no_partitioned_pairs");
  flag.clear();
  CHECK_FALSE(foster_score(doc_with({"e3"}), EntityKind::journal, v, p, &flag).has_value());
  CHECK(flag == "too_few_entities");
}

TEST_CASE("first-use novelty credits reused new pairs by profile distance") {
  TempDir dir("novelty_wang");
  auto v = four_entities(dir);
  PairCountTable h98(1998, 4), h99(1999, 4);
  h98.add_pair(PairKey{0, 1}, 2);
  h99.add_pair(PairKey{1, 3}, 1);
  std::vector<PairCountTable> history{h98, h99};

  PairCountTable f1(2001, 4), f2(2002, 4), f3(2003, 4);
  f1.add_pair(PairKey{0, 2});
  f1.add_doc_presence(PairKey{0, 2});
  f3.add_pair(PairKey{2, 3});
  f3.add_doc_presence(PairKey{2, 3});
  std::vector<PairCountTable> future{f1, f2, f3};

  WangParams params;  // reuse_window 3, min_reuse 1, profile_window 3

  // (0,2) is new and reused; rows 0 and 2 share nothing, distance 1
  auto a = wang_score(doc_with({"e0", "e2"}), EntityKind::journal, v, history, future,
                      params);
  CHECK(*a == 1.0);

  // (0,1) already existed in 1998
  auto b = wang_score(doc_with({"e0", "e1"}), EntityKind::journal, v, history, future,
                      params);
  CHECK(*b == 0.0);

  // (0,3) is new and reused but rows 0 and 3 are parallel (both only e1)
  PairCountTable f1b(2001, 4), f2b(2002, 4), f3b(2003, 4);
  f1b.add_pair(PairKey{0, 3});
  f1b.add_doc_presence(PairKey{0, 3});
  std::vector<PairCountTable> future_b{f1b, f2b, f3b};
  auto c = wang_score(doc_with({"e0", "e3"}), EntityKind::journal, v, history, future_b,
                      params);
  CHECK(*c == 0.0);

  // narrowing the profile window to 1999 empties row 0, restoring full credit
  WangParams narrow = params;
  narrow.profile_window = 1;
  auto d = wang_score(doc_with({"e0", "e3"}), EntityKind::journal, v, history, future_b,
                      narrow);
  CHECK(*d == 1.0);

  // repeated instances of a pair still count once
  auto e = wang_score(doc_with({"e0", "e2", "e0"}), EntityKind::journal, v, history,
                      future, params);
  CHECK(*e == 1.0);
}

TEST_CASE("first-use novelty ignores unreused pairs and applies the threshold") {
  TempDir dir("novelty_wang_reuse");
  auto v = four_entities(dir);
  std::vector<PairCountTable> history;  // everything is brand new
  PairCountTable f1(2001, 4), f2(2002, 4), f3(2003, 4);
  f1.add_pair(PairKey{0, 2});
  f1.add_doc_presence(PairKey{0, 2});
  f2.add_pair(PairKey{0, 2});
  f2.add_doc_presence(PairKey{0, 2});
  std::vector<PairCountTable> future{f1, f2, f3};

  WangParams params;
  auto noreuse = wang_score(doc_with({"e1", "e3"}), EntityKind::journal, v, history,
                            future, params);
  CHECK(*noreuse == 0.0);

  params.min_reuse = 2;  // (0,2) reused by one doc in 2001 and one in 2002
  auto met = wang_score(doc_with({"e0", "e2"}), EntityKind::journal, v, history, future,
                        params);
  CHECK(*met == 1.0);

  params.min_reuse = 3;
  auto unmet = wang_score(doc_with({"e0", "e2"}), EntityKind::journal, v, history, future,
                          params);
  CHECK(*unmet == 0.0);
}

TEST_CASE("first-use novelty validates its windows") {
  TempDir dir("novelty_wang_cfg");
  auto v = four_entities(dir);
  auto d = doc_with({"e0", "e2"});
  WangParams params;

  std::vector<PairCountTable> short_future{PairCountTable(2001, 4), PairCountTable(2002, 4)};
  CHECK_THROWS_AS(wang_score(d, EntityKind::journal, v, {}, short_future, params),
                  ConfigError);

  std::vector<PairCountTable> wrong_years{PairCountTable(2002, 4), PairCountTable(2003, 4),
                                          PairCountTable(2004, 4)};
  CHECK_THROWS_AS(wang_score(d, EntityKind::journal, v, {}, wrong_years, params),
                  ConfigError);

  std::vector<PairCountTable> future{PairCountTable(2001, 4), PairCountTable(2002, 4),
                                     PairCountTable(2003, 4)};
  std::vector<PairCountTable> late_history{PairCountTable(2000, 4)};
  CHECK_THROWS_AS(wang_score(d, EntityKind::journal, v, late_history, future, params),
                  ConfigError);

  std::vector<PairCountTable> unsorted{PairCountTable(1999, 4), PairCountTable(1998, 4)};
  CHECK_THROWS_AS(wang_score(d, EntityKind::journal, v, unsorted, future, params),
                  ConfigError);

  std::vector<PairCountTable> no_docs = future;
  no_docs[1].set_has_doc_counts(false);
  CHECK_THROWS_AS(wang_score(d, EntityKind::journal, v, {}, no_docs, params), ConfigError);

  WangParams bad = params;
  bad.min_reuse = 0;
  CHECK_THROWS_AS(wang_score(d, EntityKind::journal, v, {}, future, bad), ConfigError);

  std::string flag;
  CHECK_FALSE(
      wang_score(doc_with({"e0"}), EntityKind::journal, v, {}, future, params, &flag)
          .has_value());
  CHECK(flag == "too_few_entities");
}

TEST_CASE("reference spread uses pairwise embedding distances") {
  VectorStore store(4);
  store.insert("R1", {1, 0, 0, 0});
  store.insert("R2", {0, 1, 0, 0});
  store.insert("R3", {0, 0, 1, 0});
  store.insert("R4", {1, 0, 0, 0});  // same direction as R1

  auto refs = [](std::vector<std::string> ids) {
    DocumentRecord d;
    d.doc_id = "D";
    d.year = 2000;
    d.ref_doc_ids = std::move(ids);
    d.ref_journal_issns.assign(d.ref_doc_ids.size(), "");
    return d;
  };

  CHECK(*shibayama_score(refs({"R1", "R2"}), store) == 1.0);

  // distances {0, 1, 1}: mean 2/3, 90th percentile 1, 25th percentile 0.5
  ShibayamaAgg mean_agg;
  mean_agg.use_mean = true;
  auto m = shibayama_score(refs({"R1", "R2", "R4"}), store, mean_agg);
  CHECK(*m == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(*shibayama_score(refs({"R1", "R2", "R4"}), store) == 1.0);
  ShibayamaAgg low;
  low.q = 25.0;
  auto q25 = shibayama_score(refs({"R1", "R2", "R4"}), store, low);
  CHECK(*q25 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reference spread deduplicates and skips unembedded references") {
  VectorStore store(4);
  store.insert("R1", {1, 0, 0, 0});
  store.insert("R2", {0, 1, 0, 0});

  auto refs = [](std::vector<std::string> ids) {
    DocumentRecord d;
    d.doc_id = "D";
    d.year = 2000;
    d.ref_doc_ids = std::move(ids);
    d.ref_journal_issns.assign(d.ref_doc_ids.size(), "");
    return d;
  };

  CHECK(*shibayama_score(refs({"R1", "R1", "R2"}), store) == 1.0);
  CHECK(*shibayama_score(refs({"R1", "R2", "RX"}), store) == 1.0);
  CHECK(*shibayama_score(refs({"", "R1", "R2"}), store) == 1.0);

  std::string flag;
  CHECK_FALSE(shibayama_score(refs({"R1", "RX"}), store, {}, &flag).has_value());
  CHECK(flag == "too_few_embedded_refs");
  flag.clear();
  CHECK_FALSE(shibayama_score(refs({}), store, {}, &flag).has_value());
  CHECK(flag == "too_few_embedded_refs");
}

}  // TEST_SUITE
