#include "teamscope/regression.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"

namespace teamscope {

const char* family_name(Family f) {
  switch (f) {
    case Family::linear: return "linear";
    case Family::logit: return "logit";
    default: return "poisson";
  }
}

Family parse_family(const std::string& name) {
  if (name == "linear") return Family::linear;
  if (name == "logit") return Family::logit;
  if (name == "poisson") return Family::poisson;
  throw ConfigError("unknown family: " + name);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  std::vector<std::string> cluster;  // per kept row
  std::size_t dropped = 0;
};

// most frequent level; ties to the smallest value
template <typename T>
T reference_level(const std::map<T, std::size_t>& freq) {
  T best{};
  std::size_t best_n = 0;
  for (const auto& [level, n] : freq) {
    if (n > best_n) {
      best = level;
      best_n = n;
    }
  }
  return best;
}

Design build_design(const RegressionSpec& spec, const VariableTable& table) {
  if (spec.dependent.empty()) throw ConfigError("regression: dependent not set");
  for (const auto& r : spec.regressors)
    if (r == spec.dependent)
      throw ConfigError("regression: dependent appears among regressors");
  std::set<std::string> reg_set(spec.regressors.begin(), spec.regressors.end());
  for (const auto& s : spec.squared)
    if (!reg_set.count(s))
      throw ConfigError("regression: squared term " + s + " is not a regressor");

  std::vector<std::string> used = {spec.dependent};
  used.insert(used.end(), spec.regressors.begin(), spec.regressors.end());
  for (const auto& [a, b] : spec.interactions) {
    used.push_back(a);
    used.push_back(b);
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  std::vector<const std::vector<std::optional<double>>*> used_cols;
  for (const auto& u : used) used_cols.push_back(&table.column(u));

  auto cluster_key = [&](std::size_t r) -> std::string {
    if (spec.cluster == "journal") return table.journal[r];
    if (spec.cluster == "category") return table.category[r];
    if (spec.cluster == "year") return std::to_string(table.year[r]);
    if (spec.cluster == "doc") return table.doc_id[r];
    throw ConfigError("regression: unknown cluster key " + spec.cluster);
  };

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    bool ok = true;
    for (const auto* col : used_cols)
      if (!(*col)[r]) {
        ok = false;
        break;
      }
    if (ok && spec.category_effects && table.category[r].empty()) ok = false;
    if (ok && cluster_key(r).empty()) ok = false;
    if (ok) rows.push_back(r);
  }

  Design d;
  d.dropped = table.n_rows() - rows.size();
  if (rows.empty()) throw ComputeError("regression: no complete rows");

  std::map<int, std::size_t> year_freq;
  std::map<std::string, std::size_t> cat_freq;
  for (auto r : rows) {
    year_freq[table.year[r]]++;
    if (spec.category_effects) cat_freq[table.category[r]]++;
  }
  int ref_year = spec.year_effects ? reference_level(year_freq) : 0;
  std::string ref_cat = spec.category_effects ? reference_level(cat_freq) : "";

  d.names.push_back("(intercept)");
  for (const auto& r : spec.regressors) d.names.push_back(r);
  for (const auto& s : spec.squared) d.names.push_back(s + "^2");
  for (const auto& [a, b] : spec.interactions) d.names.push_back(a + ":" + b);
  std::vector<int> dummy_years;
  if (spec.year_effects)
    for (const auto& [y, n] : year_freq)
      if (y != ref_year) {
        dummy_years.push_back(y);
        d.names.push_back("year_" + std::to_string(y));
      }
  std::vector<std::string> dummy_cats;
  if (spec.category_effects)
    for (const auto& [c, n] : cat_freq)
      if (c != ref_cat) {
        dummy_cats.push_back(c);
        d.names.push_back("category_" + c);
      }

  const std::size_t N = rows.size();
  const std::size_t K = d.names.size();
  d.X.setZero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(K));
  d.y.resize(static_cast<Eigen::Index>(N));
  d.cluster.reserve(N);

  const auto& dep = table.column(spec.dependent);
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t r = rows[i];
    Eigen::Index row = static_cast<Eigen::Index>(i);
    d.y(row) = *dep[r];
    std::size_t c = 0;
    d.X(row, c++) = 1.0;
    for (const auto& name : spec.regressors)
      d.X(row, c++) = *table.column(name)[r];
    for (const auto& name : spec.squared) {
      double v = *table.column(name)[r];
      d.X(row, c++) = v * v;
    }
    for (const auto& [a, b] : spec.interactions)
      d.X(row, c++) = *table.column(a)[r] * *table.column(b)[r];
    for (int y : dummy_years) d.X(row, c++) = table.year[r] == y ? 1.0 : 0.0;
    for (const auto& cat : dummy_cats)
      d.X(row, c++) = table.category[r] == cat ? 1.0 : 0.0;
    d.cluster.push_back(cluster_key(r));
  }
  return d;
}

void check_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  Eigen::Index rank = qr.rank();
  if (rank >= X.cols()) return;
  // pivot order puts the dependent-looking columns last
  const auto& perm = qr.colsPermutation().indices();
  std::string dropped;
  for (Eigen::Index k = rank; k < X.cols(); ++k) {
    if (!dropped.empty()) dropped += ", ";
    dropped += names[static_cast<std::size_t>(perm(k))];
  }
  throw ComputeError("regression: perfect collinearity; dropped candidates: " + dropped);
}

// groups rows by cluster key in sorted key order
std::map<std::string, std::vector<Eigen::Index>> cluster_rows(
    const std::vector<std::string>& cluster) {
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < cluster.size(); ++i)
    groups[cluster[i]].push_back(static_cast<Eigen::Index>(i));
  return groups;
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& resid,
                         const std::map<std::string, std::vector<Eigen::Index>>& groups,
                         const Eigen::MatrixXd& bread, double factor) {
  const Eigen::Index K = X.cols();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(K, K);
  for (const auto& [key, rows] : groups) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
    for (Eigen::Index r : rows) s += X.row(r).transpose() * resid(r);
    meat += s * s.transpose();
  }
  return factor * bread * meat * bread;
}

}  // namespace

RegressionFit fit(const RegressionSpec& spec, const VariableTable& table) {
  Design d = build_design(spec, table);
  const Eigen::Index N = d.X.rows();
  const Eigen::Index K = d.X.cols();
  if (N <= K)
    throw ComputeError("regression: " + std::to_string(N) + " rows for " +
                       std::to_string(K) + " parameters");
  check_rank(d.X, d.names);

  auto groups = cluster_rows(d.cluster);
  const std::size_t G = groups.size();
  if (G < 2) throw ComputeError("regression: need at least 2 clusters");

  RegressionFit out;
  out.name = spec.name;
  out.family = spec.family;
  out.coef_names = d.names;
  out.n = static_cast<std::size_t>(N);
  out.n_dropped = d.dropped;
  out.n_clusters = G;
  out.n_params = static_cast<std::size_t>(K);

  Eigen::VectorXd beta;
  Eigen::VectorXd resid;  // y - mu (working residual for the meat)
  Eigen::MatrixXd bread;  // (X'X)^-1 or (X'WX)^-1
  double factor = 0.0;

  if (spec.family == Family::linear) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(d.X);
    beta = qr.solve(d.y);
    resid = d.y - d.X * beta;
    bread = (d.X.transpose() * d.X).ldlt().solve(Eigen::MatrixXd::Identity(K, K));
    double g = static_cast<double>(G), n = static_cast<double>(N),
           k = static_cast<double>(K);
    factor = g / (g - 1.0) * (n - 1.0) / (n - k);

    double sst = (d.y.array() - d.y.mean()).square().sum();
    double ssr = resid.squaredNorm();
    if (sst > 0.0) {
      out.r2 = 1.0 - ssr / sst;
      out.adj_r2 = 1.0 - (ssr / (n - k)) / (sst / (n - 1.0));
    }
    out.iterations = 1;
  } else {
    const bool logit = spec.family == Family::logit;
    if (logit) {
      for (Eigen::Index i = 0; i < N; ++i)
        if (d.y(i) != 0.0 && d.y(i) != 1.0)
          throw ConfigError("logit: dependent must be 0/1");
    } else {
      for (Eigen::Index i = 0; i < N; ++i)
        if (d.y(i) < 0.0) throw ConfigError("poisson: dependent must be nonnegative");
    }

    beta = Eigen::VectorXd::Zero(K);
    double ll_prev = -std::numeric_limits<double>::infinity();
    std::ostringstream trace;
    bool converged = false;
    Eigen::VectorXd mu(N), w(N);
    const int max_iter = 100;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
      Eigen::VectorXd eta = d.X * beta;
      double ll = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (logit) {
          double m = 1.0 / (1.0 + std::exp(-eta(i)));
          m = std::min(std::max(m, 1e-12), 1.0 - 1e-12);
          mu(i) = m;
          w(i) = m * (1.0 - m);
          ll += d.y(i) * std::log(m) + (1.0 - d.y(i)) * std::log(1.0 - m);
        } else {
          double m = std::exp(std::min(eta(i), 700.0));
          mu(i) = m;
          w(i) = std::max(m, 1e-12);
          ll += d.y(i) * eta(i) - m - std::lgamma(d.y(i) + 1.0);
        }
      }
      Eigen::VectorXd score = d.X.transpose() * (d.y - mu);
      trace << "iter " << iter << " ll=" << ll
            << " max|score|=" << score.cwiseAbs().maxCoeff() << "\n";
      bool score_ok = score.cwiseAbs().maxCoeff() < 1e-8;
      bool ll_ok = std::isfinite(ll_prev) &&
                   std::abs(ll - ll_prev) < 1e-10 * (std::abs(ll_prev) + 1e-10);
      out.loglik = ll;
      if (score_ok || ll_ok) {
        converged = true;
        break;
      }
      ll_prev = ll;

      // IRLS step on the working response
      Eigen::VectorXd z(N);
      for (Eigen::Index i = 0; i < N; ++i)
        z(i) = eta(i) + (d.y(i) - mu(i)) / std::max(w(i), 1e-12);
      Eigen::MatrixXd xtwx = d.X.transpose() * w.asDiagonal() * d.X;
      Eigen::VectorXd xtwz = d.X.transpose() * (w.asDiagonal() * z);
      beta = xtwx.ldlt().solve(xtwz);
      if (!beta.allFinite())
        throw ComputeError("regression: diverged (possible separation)\n" + trace.str());
    }
    if (!converged)
      throw ComputeError("regression: no convergence in " + std::to_string(max_iter) +
                         " iterations\n" + trace.str());
    // a logit that converged onto the clamps has no interior optimum
    if (logit && (d.X * beta).cwiseAbs().maxCoeff() > 30.0)
      throw ComputeError("regression: fitted probabilities pinned at 0/1 (separation)");
    out.iterations = iter + 1;
    out.aic = 2.0 * static_cast<double>(K) - 2.0 * *out.loglik;

    resid = d.y - mu;
    Eigen::MatrixXd xtwx = d.X.transpose() * w.asDiagonal() * d.X;
    bread = xtwx.ldlt().solve(Eigen::MatrixXd::Identity(K, K));
    double g = static_cast<double>(G);
    factor = g / (g - 1.0);
  }

  Eigen::MatrixXd vcov = sandwich(d.X, resid, groups, bread, factor);
  out.coef.assign(beta.data(), beta.data() + K);
  out.vcov.assign(static_cast<std::size_t>(K), std::vector<double>(K));
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < K; ++j)
      out.vcov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = vcov(i, j);

  const double df = static_cast<double>(G) - 1.0;
  boost::math::students_t tdist(df);
  out.stat_dist = spec.family == Family::linear ? "t(G-1)" : "normal";
  for (Eigen::Index i = 0; i < K; ++i) {
    double se = std::sqrt(std::max(vcov(i, i), 0.0));
    out.se.push_back(se);
    double stat = se > 0.0 ? beta(i) / se : 0.0;
    out.stat.push_back(stat);
    double p;
    if (spec.family == Family::linear)
      p = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(stat)));
    else
      p = 2.0 * (1.0 - normal_cdf(std::abs(stat)));
    out.p.push_back(p);
  }
  return out;
}

std::string fit_to_json(const RegressionFit& f) {
  nlohmann::ordered_json j;
  j["name"] = f.name;
  j["family"] = family_name(f.family);
  j["n"] = f.n;
  j["n_dropped"] = f.n_dropped;
  j["n_clusters"] = f.n_clusters;
  j["n_params"] = f.n_params;
  j["se_type"] = f.se_type;
  j["stat_dist"] = f.stat_dist;
  j["iterations"] = f.iterations;
  if (f.r2) j["r2"] = *f.r2;
  if (f.adj_r2) j["adj_r2"] = *f.adj_r2;
  if (f.loglik) j["loglik"] = *f.loglik;
  if (f.aic) j["aic"] = *f.aic;
  auto coeffs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < f.coef.size(); ++i) {
    nlohmann::ordered_json c;
    c["name"] = f.coef_names[i];
    c["coef"] = f.coef[i];
    c["se"] = f.se[i];
    c["stat"] = f.stat[i];
    c["p"] = f.p[i];
    coeffs.push_back(c);
  }
  j["coefficients"] = coeffs;
  return j.dump(2) + "\n";
}

}  // namespace teamscope
