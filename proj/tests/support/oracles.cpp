#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include "crpmap/predictive.hpp"

namespace crpmap::oracle {

std::vector<std::vector<int>> set_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  if (n == 0) return {{}};
  std::vector<int> z(n, 0);
  std::vector<int> top(n, 0);  // top[i] = max(z[0..i])
  for (;;) {
    out.push_back(z);
    std::size_t i = n - 1;
    while (i > 0 && z[i] > top[i - 1]) --i;
    if (i == 0) break;
    ++z[i];
    top[i] = std::max(top[i - 1], z[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      z[j] = 0;
      top[j] = top[i];
    }
  }
  return out;
}

double crp_log_chain(const std::vector<int>& z, double alpha) {
  std::map<int, int> counts;
  double lp = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double denom = alpha + static_cast<double>(i);
    auto it = counts.find(z[i]);
    lp += std::log((it == counts.end() ? alpha : it->second) / denom);
    ++counts[z[i]];
  }
  return lp;
}

namespace {

double log_ng_density(double mu, double tau, double m, double c, double a, double b) {
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(tau) - b * tau + 0.5 * std::log(c * tau) -
         0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * c * tau * (mu - m) * (mu - m);
}

double log_normal(double x, double mu, double tau) {
  return 0.5 * std::log(tau / (2.0 * std::numbers::pi)) - 0.5 * tau * (x - mu) * (x - mu);
}

// Integrates exp(log_f(mu, tau)) over mu in R and tau > 0, where log_f peaks
// near (mu_hat, tau_hat); rescaling by the peak value keeps the integrand O(1).
template <class F>
double integrate_mu_tau(F log_f, double mu_hat, double tau_hat) {
  const double peak = log_f(mu_hat, tau_hat);
  boost::math::quadrature::exp_sinh<double> outer;
  boost::math::quadrature::sinh_sinh<double> inner_rule;
  auto over_tau = [&](double tau) {
    if (!(tau > 0.0)) return 0.0;
    const double width = 1.0 / std::sqrt(tau);
    auto inner = [&](double t) { return std::exp(log_f(mu_hat + width * t, tau) - peak); };
    return width * inner_rule.integrate(inner, 1e-13);
  };
  return std::log(outer.integrate(over_tau, 1e-13)) + peak;
}

}  // namespace

double ng_compound_density(double x, double m, double c, double a, double b) {
  auto log_f = [&](double mu, double tau) { return log_normal(x, mu, tau) + log_ng_density(mu, tau, m, c, a, b); };
  return std::exp(integrate_mu_tau(log_f, (c * m + x) / (c + 1.0), a / b));
}

double ng_evidence_quadrature(const std::vector<double>& xs, double m0, double c0, double a0, double b0) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  auto log_f = [&](double mu, double tau) {
    double acc = log_ng_density(mu, tau, m0, c0, a0, b0);
    for (double x : xs) acc += log_normal(x, mu, tau);
    return acc;
  };
  const double n = static_cast<double>(xs.size());
  return integrate_mu_tau(log_f, (c0 * m0 + sum) / (c0 + n), (a0 + 0.5 * n) / b0);
}

double entropy(const std::vector<int>& u) {
  std::map<int, double> c;
  for (int x : u) c[x] += 1.0;
  const double n = static_cast<double>(u.size());
  double h = 0.0;
  for (auto [k, v] : c) h -= v / n * std::log(v / n);
  return h;
}

double mutual_information(const std::vector<int>& u, const std::vector<int>& v) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> cu, cv;
  for (std::size_t i = 0; i < u.size(); ++i) {
    joint[{u[i], v[i]}] += 1.0;
    cu[u[i]] += 1.0;
    cv[v[i]] += 1.0;
  }
  const double n = static_cast<double>(u.size());
  double mi = 0.0;
  for (auto [key, nij] : joint) mi += nij / n * std::log(n * nij / (cu[key.first] * cv[key.second]));
  return mi;
}

double nmi_sum(const std::vector<int>& u, const std::vector<int>& v) {
  return 2.0 * mutual_information(u, v) / (entropy(u) + entropy(v));
}

namespace {

// Cluster ids present in z (ignoring -1), compacted so that ids stay dense.
std::vector<SufficientStats> naive_stats(const Dataset& data, const std::vector<int>& z, std::size_t k) {
  std::vector<SufficientStats> s(k, SufficientStats(data.dim()));
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] >= 0) s[static_cast<std::size_t>(z[i])].add(data.point(i));
  }
  return s;
}

double naive_joint(const Dataset& data, const std::vector<int>& z, const NGPrior& prior, double alpha) {
  return joint_nll(data, Partition::from_labels(z), prior, alpha);
}

}  // namespace

NaiveMapResult naive_mapdp(const Dataset& data, const NGPrior& prior, double alpha, std::vector<int> z,
                           std::size_t max_sweeps, double epsilon) {
  NaiveMapResult out;
  z = Partition::from_labels(z).z;
  double previous = naive_joint(data, z, prior, alpha);
  while (out.sweeps < max_sweeps) {
    std::size_t changed = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int before = z[i];
      z[i] = -1;
      const bool emptied = std::find(z.begin(), z.end(), before) == z.end();
      if (emptied) {
        for (int& v : z) {
          if (v > before) --v;
        }
      }
      std::size_t k = 0;
      for (int v : z) k = std::max<std::size_t>(k, static_cast<std::size_t>(v + 1));
      const auto stats = naive_stats(data, z, k);
      const AssignmentScores scores = assignment_scores(data.point(i), stats, prior, alpha);
      const std::size_t choice = scores.argmin();
      if (emptied ? choice != k : choice != static_cast<std::size_t>(before)) ++changed;
      out.steps.push_back({i, choice});
      z[i] = static_cast<int>(choice);
    }
    ++out.sweeps;
    z = Partition::from_labels(z).z;
    const double nll = naive_joint(data, z, prior, alpha);
    const double decrease = previous - nll;
    previous = nll;
    if (changed == 0 || decrease < epsilon) break;
  }
  out.z = z;
  return out;
}

double joint_nll_chain(const Dataset& data, const std::vector<int>& z, const NGPrior& prior, double alpha) {
  double nll = -crp_log_chain(z, alpha);
  for (std::size_t i = 0; i < data.size(); ++i) {
    SufficientStats before(data.dim());
    for (std::size_t j = 0; j < i; ++j) {
      if (z[j] == z[i]) before.add(data.point(j));
    }
    nll -= log_marginal(data.point(i), ng_posterior(prior, before));
  }
  return nll;
}

Dataset random_blobs(std::size_t n, std::size_t dim, std::size_t k, double scale, Rng& rng) {
  Matrix centers(k, dim);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t d = 0; d < dim; ++d) centers(j, d) = scale * (2.0 * rng.uniform() - 1.0);
  }
  Dataset data{Matrix(n, dim), std::vector<int>(n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(rng.below(k));
    (*data.labels)[i] = static_cast<int>(j);
    for (std::size_t d = 0; d < dim; ++d) data.x(i, d) = rng.normal(centers(j, d), 1.0);
  }
  return data;
}

NGPrior random_prior(std::size_t dim, Rng& rng) {
  NGPrior p;
  for (std::size_t d = 0; d < dim; ++d) {
    p.m0.push_back(rng.normal(0.0, 2.0));
    p.b0.push_back(0.2 + 5.0 * rng.uniform());
  }
  p.c0 = 0.05 + 2.0 * rng.uniform();
  p.a0 = 0.6 + 3.0 * rng.uniform();
  return p;
}

}  // namespace crpmap::oracle
