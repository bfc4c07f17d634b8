#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "teamscope/errors.hpp"
#include "teamscope/oracle.hpp"
#include "teamscope/regression.hpp"
#include "teamscope/rng.hpp"
#include "teamscope/table.hpp"

using namespace teamscope;

namespace {

VariableTable reg_table(std::size_t n, int years = 1, int journals = 2) {
  VariableTable t;
  for (std::size_t i = 0; i < n; ++i) {
    t.doc_id.push_back("D" + std::to_string(i));
    t.year.push_back(2000 + static_cast<int>(i) % years);
    t.journal.push_back("J" + std::to_string(i % static_cast<std::size_t>(journals)));
    t.category.push_back("catA");
  }
  return t;
}

RegressionSpec plain_spec(std::string dep, std::vector<std::string> regs) {
  RegressionSpec s;
  s.name = "m";
  s.dependent = std::move(dep);
  s.regressors = std::move(regs);
  s.year_effects = false;
  s.category_effects = false;
  return s;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("family names parse both ways") {
  CHECK(family_name(Family::linear) == std::string("linear"));
  CHECK(family_name(Family::logit) == std::string("logit"));
  CHECK(family_name(Family::poisson) == std::string("poisson"));
  CHECK(parse_family("poisson") == Family::poisson);
  CHECK_THROWS_AS(parse_family("probit"), ConfigError);
}

TEST_CASE("a noiseless line is recovered exactly") {
  VariableTable t = reg_table(4);
  for (std::size_t i = 0; i < 4; ++i) {
    double x = static_cast<double>(i);
    t.set("x", i, x);
    t.set("y", i, 1.0 + 2.0 * x);
  }
  RegressionFit f = fit(plain_spec("y", {"x"}), t);
  REQUIRE(f.coef_names == std::vector<std::string>{"(intercept)", "x"});
  CHECK(f.coef[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.coef[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(*f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.n == 4);
  CHECK(f.n_params == 2);
  CHECK(f.n_clusters == 2);
  CHECK(f.n_dropped == 0);
  CHECK(f.se_type == "CR1");
  CHECK(f.stat_dist == "t(G-1)");
  CHECK(f.family == Family::linear);
}

TEST_CASE("coefficients and clustered errors match the direct formulas") {
  Rng rng(101);
  const std::size_t n = 60;
  VariableTable t = reg_table(n, 1, 4);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  std::vector<std::string> cluster;
  for (std::size_t i = 0; i < n; ++i) {
    double x1 = rng.next_unit() * 2.0 - 1.0;
    double x2 = rng.next_normal();
    double yi = 0.5 + 1.5 * x1 - 2.0 * x2 + 0.1 * rng.next_normal();
    t.set("x1", i, x1);
    t.set("x2", i, x2);
    t.set("y", i, yi);
    rows.push_back({1.0, x1, x2});
    y.push_back(yi);
    cluster.push_back(t.journal[i]);
  }
  RegressionFit f = fit(plain_spec("y", {"x1", "x2"}), t);
  auto beta = oracle::linear_coefficients(rows, y);
  auto se = oracle::clustered_se(rows, y, cluster);
  REQUIRE(f.coef.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(f.coef[k] == doctest::Approx(beta[k]).epsilon(1e-9));
    CHECK(f.se[k] == doctest::Approx(se[k]).epsilon(1e-9));
  }
  CHECK(f.n_clusters == 4);
  // the covariance diagonal squares the reported errors
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(f.vcov[k][k] == doctest::Approx(f.se[k] * f.se[k]).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(f.vcov[k][j] == doctest::Approx(f.vcov[j][k]).epsilon(1e-12));
  }
  // t statistics follow coef / se
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(f.stat[k] == doctest::Approx(f.coef[k] / f.se[k]).epsilon(1e-12));
    CHECK(f.p[k] >= 0.0);
    CHECK(f.p[k] <= 1.0);
  }
}

TEST_CASE("squared terms expose the curvature") {
  VariableTable t = reg_table(6);
  double xs[] = {-2, -1, 0, 1, 2, 3};
  for (std::size_t i = 0; i < 6; ++i) {
    t.set("x", i, xs[i]);
    t.set("y", i, xs[i] + xs[i] * xs[i]);
  }
  RegressionSpec s = plain_spec("y", {"x"});
  s.squared = {"x"};
  RegressionFit f = fit(s, t);
  REQUIRE(f.coef_names == std::vector<std::string>{"(intercept)", "x", "x^2"});
  CHECK(f.coef[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(f.coef[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.coef[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(turning_point(f.coef[1], f.coef[2]) == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("interactions multiply their parents") {
  VariableTable t = reg_table(6);
  double as[] = {0, 1, 0, 1, 2, 1}, bs[] = {0, 0, 1, 1, 1, 2};
  for (std::size_t i = 0; i < 6; ++i) {
    t.set("a", i, as[i]);
    t.set("b", i, bs[i]);
    t.set("y", i, 2.0 + 1.5 * as[i] * bs[i]);
  }
  RegressionSpec s = plain_spec("y", {"a", "b"});
  s.interactions = {{"a", "b"}};
  RegressionFit f = fit(s, t);
  REQUIRE(f.coef_names ==
          std::vector<std::string>{"(intercept)", "a", "b", "a:b"});
  CHECK(f.coef[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.coef[1] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(f.coef[2] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(f.coef[3] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("year and category dummies drop the modal level") {
  VariableTable t = reg_table(5);
  t.year = {2000, 2000, 2001, 2001, 2002};
  t.category = {"catA", "catA", "catA", "catB", "catB"};
  double ys[] = {1, 1, 4, 4, 1};
  for (std::size_t i = 0; i < 5; ++i) t.set("y", i, ys[i]);
  RegressionSpec s;
  s.name = "dummies";
  s.dependent = "y";
  RegressionFit f = fit(s, t);
  REQUIRE(f.coef_names == std::vector<std::string>{"(intercept)", "year_2001",
                                                   "year_2002", "category_catB"});
  CHECK(f.coef[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.coef[1] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f.coef[2] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(f.coef[3] == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("incomplete rows are dropped listwise") {
  VariableTable t = reg_table(5);
  for (std::size_t i = 0; i < 5; ++i) {
    if (i != 2) t.set("x", i, static_cast<double>(i));
    t.set("y", i, static_cast<double>(i));
  }
  RegressionFit f = fit(plain_spec("y", {"x"}), t);
  CHECK(f.n == 4);
  CHECK(f.n_dropped == 1);
}

TEST_CASE("cluster keys select the grouping") {
  VariableTable t = reg_table(6, 3, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    t.set("x", i, static_cast<double>(i));
    t.set("y", i, 1.0 + static_cast<double>(i) + (i % 2 ? 0.1 : -0.1));
  }
  RegressionSpec s = plain_spec("y", {"x"});
  s.cluster = "doc";
  CHECK(fit(s, t).n_clusters == 6);
  s.cluster = "year";
  CHECK(fit(s, t).n_clusters == 3);
  s.cluster = "journal";
  CHECK(fit(s, t).n_clusters == 2);
  s.cluster = "authors";
  CHECK_THROWS_AS(fit(s, t), ConfigError);
}

TEST_CASE("bad specifications are rejected") {
  VariableTable t = reg_table(4);
  for (std::size_t i = 0; i < 4; ++i) {
    t.set("x", i, static_cast<double>(i));
    t.set("y", i, static_cast<double>(i));
  }
  RegressionSpec no_dep;
  no_dep.name = "m";
  CHECK_THROWS_AS(fit(no_dep, t), ConfigError);

  RegressionSpec self = plain_spec("y", {"y"});
  CHECK_THROWS_AS(fit(self, t), ConfigError);

  RegressionSpec sq = plain_spec("y", {"x"});
  sq.squared = {"z"};
  CHECK_THROWS_AS(fit(sq, t), ConfigError);

  CHECK_THROWS_AS(fit(plain_spec("y", {"nope"}), t), NotFoundError);

  VariableTable gap = reg_table(3);
  gap.add_column("x");
  gap.add_column("y");
  CHECK_THROWS_AS(fit(plain_spec("y", {"x"}), gap), ComputeError);
}

TEST_CASE("perfect collinearity is reported, not silently absorbed") {
  VariableTable t = reg_table(6);
  for (std::size_t i = 0; i < 6; ++i) {
    double x = static_cast<double>(i);
    t.set("x", i, x);
    t.set("z", i, 2.0 * x);
    t.set("y", i, x + 1.0);
  }
  CHECK_THROWS_AS(fit(plain_spec("y", {"x", "z"}), t), ComputeError);
}

TEST_CASE("logistic fits recover known odds") {
  Rng rng(202);
  const std::size_t n = 2000;
  VariableTable t = reg_table(n, 1, 2);
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.next_unit() * 4.0 - 2.0;
    double p = 1.0 / (1.0 + std::exp(-(0.5 + 1.0 * x)));
    t.set("x", i, x);
    t.set("y", i, rng.next_unit() < p ? 1.0 : 0.0);
  }
  RegressionSpec s = plain_spec("y", {"x"});
  s.family = Family::logit;
  s.cluster = "doc";
  RegressionFit f = fit(s, t);
  CHECK(f.coef[0] == doctest::Approx(0.5).epsilon(0.3));
  CHECK(f.coef[1] == doctest::Approx(1.0).epsilon(0.15));
  CHECK(f.iterations > 0);
  CHECK(f.stat_dist == "normal");
  REQUIRE(f.loglik.has_value());
  CHECK(*f.loglik < 0.0);
  CHECK(*f.aic == doctest::Approx(-2.0 * *f.loglik + 2.0 * 2.0).epsilon(1e-12));
  CHECK_FALSE(f.r2.has_value());
}

TEST_CASE("logistic dependents must be binary") {
  VariableTable t = reg_table(4);
  for (std::size_t i = 0; i < 4; ++i) {
    t.set("x", i, static_cast<double>(i));
    t.set("y", i, static_cast<double>(i));  // 0,1,2,3
  }
  RegressionSpec s = plain_spec("y", {"x"});
  s.family = Family::logit;
  CHECK_THROWS_AS(fit(s, t), ConfigError);
}

TEST_CASE("perfectly separated outcomes do not converge") {
  VariableTable t = reg_table(8);
  double xs[] = {-4, -3, -2, -1, 1, 2, 3, 4};
  for (std::size_t i = 0; i < 8; ++i) {
    t.set("x", i, xs[i]);
    t.set("y", i, xs[i] > 0 ? 1.0 : 0.0);
  }
  RegressionSpec s = plain_spec("y", {"x"});
  s.family = Family::logit;
  CHECK_THROWS_AS(fit(s, t), ComputeError);
}

TEST_CASE("an intercept-only poisson fit equals the log of the mean") {
  VariableTable t = reg_table(3);
  double ys[] = {1, 2, 3};
  for (std::size_t i = 0; i < 3; ++i) t.set("y", i, ys[i]);
  RegressionSpec s = plain_spec("y", {});
  s.family = Family::poisson;
  s.cluster = "doc";
  RegressionFit f = fit(s, t);
  REQUIRE(f.coef.size() == 1);
  CHECK(f.coef[0] == doctest::Approx(std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("poisson fits recover known rates") {
  Rng rng(303);
  const std::size_t n = 2000;
  VariableTable t = reg_table(n, 1, 2);
  auto draw = [&](double lambda) {
    double limit = std::exp(-lambda), prod = 1.0;
    int k = 0;
    do {
      ++k;
      prod *= rng.next_unit();
    } while (prod > limit);
    return k - 1;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.next_unit() * 2.0 - 1.0;
    t.set("x", i, x);
    t.set("y", i, static_cast<double>(draw(std::exp(0.3 + 0.7 * x))));
  }
  RegressionSpec s = plain_spec("y", {"x"});
  s.family = Family::poisson;
  s.cluster = "doc";
  RegressionFit f = fit(s, t);
  CHECK(f.coef[0] == doctest::Approx(0.3).epsilon(0.3));
  CHECK(f.coef[1] == doctest::Approx(0.7).epsilon(0.15));
  REQUIRE(f.loglik.has_value());

  t.set("y", 0, -1.0);
  CHECK_THROWS_AS(fit(s, t), ConfigError);
}

TEST_CASE("fits serialize to parseable json") {
  VariableTable t = reg_table(4);
  for (std::size_t i = 0; i < 4; ++i) {
    double x = static_cast<double>(i);
    t.set("x", i, x);
    t.set("y", i, 1.0 + 2.0 * x + (i % 2 ? 0.01 : -0.01));
  }
  RegressionFit f = fit(plain_spec("y", {"x"}), t);
  auto j = nlohmann::json::parse(fit_to_json(f));
  CHECK(j.at("name") == "m");
  CHECK(j.at("family") == "linear");
  CHECK(j.at("n") == 4);
  CHECK(j.at("se_type") == "CR1");
  REQUIRE(j.at("coefficients").size() == 2);
  CHECK(j.at("coefficients")[0].at("name") == "(intercept)");
  CHECK(j.at("coefficients")[1].at("coef").get<double>() ==
        doctest::Approx(f.coef[1]).epsilon(1e-12));
}

}  // TEST_SUITE
