#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "teamscope/table.hpp"

namespace teamscope {

enum class Family { linear, logit, poisson };

const char* family_name(Family f);
Family parse_family(const std::string& name);

struct RegressionSpec {
  std::string name;
  Family family = Family::linear;
  std::string dependent;
  std::vector<std::string> regressors;
  // subset of regressors that also enter squared
  std::vector<std::string> squared;
  std::vector<std::pair<std::string, std::string>> interactions;
  bool year_effects = true;
  bool category_effects = true;
  // "journal" | "category" | "year" | "doc" (each row its own cluster)
  std::string cluster = "journal";
};

struct RegressionFit {
  std::string name;
  Family family = Family::linear;
  std::vector<std::string> coef_names;
  std::vector<double> coef;
  std::vector<double> se;    // clustered
  std::vector<double> stat;  // t (linear) or z (glm)
  std::vector<double> p;
  std::vector<std::vector<double>> vcov;
  std::size_t n = 0;
  std::size_t n_dropped = 0;  // listwise deletions
  std::size_t n_clusters = 0;
  std::size_t n_params = 0;
  std::optional<double> r2, adj_r2;      // linear
  std::optional<double> loglik, aic;     // glm
  int iterations = 0;
  std::string se_type = "CR1";
  std::string stat_dist;  // "t(G-1)" or "normal"
};

// Builds the design matrix (intercept, regressors, squares, interactions,
// year/category dummies with the most frequent level dropped), applies
// listwise deletion, fits by least squares or IRLS, and computes the
// cluster-sandwich covariance. Throws ComputeError on collinearity,
// non-convergence or separated logits, ConfigError on bad specs.
RegressionFit fit(const RegressionSpec& spec, const VariableTable& table);

std::string fit_to_json(const RegressionFit& fit);

}  // namespace teamscope
