#include "crpmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <stdexcept>

#include "crpmap/numeric.hpp"
#include "crpmap/predictive.hpp"

namespace crpmap {

namespace {

struct Contingency {
  std::size_t n = 0;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<std::size_t> cells;  // rows.size() x cols.size(), row-major

  std::size_t at(std::size_t r, std::size_t c) const { return cells[r * cols.size() + c]; }
};

Contingency contingency(std::span<const int> u, std::span<const int> v) {
  if (u.size() != v.size()) {
    throw InputError("labelings have different lengths (" + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  if (u.empty()) throw InputError("labelings are empty");
  const Partition pu = Partition::from_labels(u);
  const Partition pv = Partition::from_labels(v);
  Contingency t;
  t.n = u.size();
  t.rows = pu.counts;
  t.cols = pv.counts;
  t.cells.assign(t.rows.size() * t.cols.size(), 0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    ++t.cells[static_cast<std::size_t>(pu.z[i]) * t.cols.size() + static_cast<std::size_t>(pv.z[i])];
  }
  return t;
}

double entropy_of_counts(std::span<const std::size_t> counts, double n) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const Contingency& t) {
  const double n = static_cast<double>(t.n);
  double mi = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.cols.size(); ++c) {
      const std::size_t nij = t.at(r, c);
      if (nij == 0) continue;
      const double x = static_cast<double>(nij);
      mi += x / n * std::log(n * x / (static_cast<double>(t.rows[r]) * static_cast<double>(t.cols[c])));
    }
  }
  return std::max(mi, 0.0);
}

}  // namespace

double entropy(std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const Partition p = Partition::from_labels(labels);
  return entropy_of_counts(p.counts, static_cast<double>(labels.size()));
}

double mutual_information(std::span<const int> u, std::span<const int> v) {
  return mutual_information(contingency(u, v));
}

double expected_mutual_information(std::span<const std::size_t> row_sums,
                                   std::span<const std::size_t> col_sums) {
  std::size_t n_total = 0;
  for (std::size_t a : row_sums) n_total += a;
  const double n = static_cast<double>(n_total);
  const double log_n_fact = log_gamma(n + 1.0);
  double emi = 0.0;
  for (std::size_t a_sz : row_sums) {
    const double a = static_cast<double>(a_sz);
    for (std::size_t b_sz : col_sums) {
      const double b = static_cast<double>(b_sz);
      const double fixed = log_gamma(a + 1.0) + log_gamma(b + 1.0) + log_gamma(n - a + 1.0) +
                           log_gamma(n - b + 1.0) - log_n_fact;
      const std::size_t lo = std::max<std::size_t>(1, a_sz + b_sz > n_total ? a_sz + b_sz - n_total : 0);
      const std::size_t hi = std::min(a_sz, b_sz);
      for (std::size_t nij = lo; nij <= hi; ++nij) {
        const double x = static_cast<double>(nij);
        const double log_prob = fixed - log_gamma(x + 1.0) - log_gamma(a - x + 1.0) -
                                log_gamma(b - x + 1.0) - log_gamma(n - a - b + x + 1.0);
        emi += x / n * std::log(n * x / (a * b)) * std::exp(log_prob);
      }
    }
  }
  return emi;
}

double nmi(std::span<const int> u, std::span<const int> v, NmiVariant variant) {
  const Contingency t = contingency(u, v);
  const double n = static_cast<double>(t.n);
  const bool u_single = t.rows.size() == 1;
  const bool v_single = t.cols.size() == 1;
  if (u_single && v_single) return 1.0;
  if (u_single || v_single) return 0.0;
  const double hu = entropy_of_counts(t.rows, n);
  const double hv = entropy_of_counts(t.cols, n);
  const double mi = mutual_information(t);
  const double value = variant == NmiVariant::sum ? 2.0 * mi / (hu + hv) : mi / std::max(hu, hv);
  return std::clamp(value, 0.0, 1.0);
}

double ami(std::span<const int> u, std::span<const int> v) {
  const Contingency t = contingency(u, v);
  const bool u_single = t.rows.size() == 1;
  const bool v_single = t.cols.size() == 1;
  if (u_single && v_single) return 1.0;
  const double n = static_cast<double>(t.n);
  const double hu = entropy_of_counts(t.rows, n);
  const double hv = entropy_of_counts(t.cols, n);
  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t.rows, t.cols);
  const double denom = std::max(hu, hv) - emi;
  if (std::abs(denom) < 1e-12) return same_clustering(u, v) ? 1.0 : 0.0;
  return (mi - emi) / denom;
}

MetricReport compare_labelings(std::span<const int> truth, std::span<const int> estimate,
                               bool with_ami) {
  MetricReport r;
  r.nmi_sum = nmi(truth, estimate, NmiVariant::sum);
  r.nmi_max = nmi(truth, estimate, NmiVariant::max);
  r.ami = with_ami ? ami(truth, estimate) : std::nan("");
  r.n_clusters_true = Partition::from_labels(truth).num_clusters();
  r.n_clusters_est = Partition::from_labels(estimate).num_clusters();
  r.delta_k = static_cast<long>(r.n_clusters_est) - static_cast<long>(r.n_clusters_true);
  return r;
}

std::size_t FittedModel::num_points() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.count;
  return n;
}

FittedModel FittedModel::from_partition(const Dataset& data, const Partition& partition,
                                        const NGPrior& prior, double alpha) {
  return FittedModel{prior, alpha, cluster_stats(data, partition)};
}

std::vector<double> mixture_weights(const FittedModel& model) {
  const double denom = model.alpha + static_cast<double>(model.num_points());
  std::vector<double> w;
  w.reserve(model.clusters.size() + 1);
  for (const auto& c : model.clusters) w.push_back(static_cast<double>(c.count) / denom);
  w.push_back(model.alpha / denom);
  return w;
}

namespace {

/// log w_k + log p(x | k) for every component, new-cluster term last. Empty clusters get -inf.
std::vector<double> component_log_terms(std::span<const double> x, const FittedModel& model) {
  if (x.size() != model.prior.dim()) throw InputError("point dimension does not match the model");
  const double log_denom = std::log(model.alpha + static_cast<double>(model.num_points()));
  std::vector<double> terms;
  terms.reserve(model.clusters.size() + 1);
  for (const auto& c : model.clusters) {
    if (c.count == 0) {
      terms.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    terms.push_back(std::log(static_cast<double>(c.count)) - log_denom +
                    log_marginal(x, ng_posterior(model.prior, c)));
  }
  terms.push_back(std::log(model.alpha) - log_denom + log_marginal(x, model.prior));
  return terms;
}

}  // namespace

double predict_marginal(std::span<const double> x, const FittedModel& model) {
  return log_sum_exp(component_log_terms(x, model));
}

ModalPrediction predict_modal(std::span<const double> x, const FittedModel& model) {
  std::vector<double> terms = component_log_terms(x, model);
  for (double& t : terms) t = -t;
  ModalPrediction out;
  out.cluster = argmin_first(terms);
  if (out.cluster == model.clusters.size()) {
    out.log_density = log_marginal(x, model.prior);
  } else {
    out.log_density = log_marginal(x, ng_posterior(model.prior, model.clusters[out.cluster]));
  }
  return out;
}

double loo_nll(const Dataset& data, const Partition& partition, const NGPrior& prior, double alpha) {
  FittedModel model = FittedModel::from_partition(data, partition, prior, alpha);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& own = model.clusters[static_cast<std::size_t>(partition.z[i])];
    const SufficientStats saved = own;
    own.remove(data.point(i));
    total -= predict_marginal(data.point(i), model);
    own = saved;
  }
  return total / static_cast<double>(data.size());
}

}  // namespace crpmap
