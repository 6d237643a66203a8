#include "crpmap/predictive.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "crpmap/crp.hpp"
#include "crpmap/numeric.hpp"

namespace crpmap {

StudentT student_t_existing(const NGPosterior& post, std::size_t d) {
  return StudentT{post.m[d], post.a * post.c / (post.b[d] * (post.c + 1.0)), 2.0 * post.a};
}

StudentT student_t_prior(const NGPrior& prior, std::size_t d) {
  return StudentT{prior.m0[d], prior.a0 * prior.c0 / (prior.b0[d] * (prior.c0 + 1.0)),
                  2.0 * prior.a0};
}

double log_student_t(double x, const StudentT& p) {
  const double r = x - p.mu;
  return log_gamma(0.5 * (p.nu + 1.0)) - log_gamma(0.5 * p.nu) +
         0.5 * std::log(p.lambda / (p.nu * std::numbers::pi)) -
         0.5 * (p.nu + 1.0) * std::log1p(p.lambda * r * r / p.nu);
}

double log_marginal(std::span<const double> x, const NGPosterior& post) {
  if (x.size() != post.dim()) throw InputError("observation and model dimensions differ");
  double total = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) total += log_student_t(x[d], student_t_existing(post, d));
  return total;
}

double log_marginal(std::span<const double> x, const NGPrior& prior) {
  return log_marginal(x, prior_as_posterior(prior));
}

double log_evidence(const NGPrior& prior, const SufficientStats& stats) {
  if (stats.count == 0) return 0.0;
  const NGPosterior post = ng_posterior(prior, stats);
  const double n = static_cast<double>(stats.count);
  const double per_dim_const = log_gamma(post.a) - log_gamma(prior.a0) +
                               0.5 * std::log(prior.c0 / post.c) -
                               0.5 * n * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (std::size_t d = 0; d < prior.dim(); ++d) {
    total += per_dim_const + prior.a0 * std::log(prior.b0[d]) - post.a * std::log(post.b[d]);
  }
  return total;
}

std::size_t argmin_first(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < q.size(); ++k) {
    if (q[k] < q[best]) best = k;
  }
  return best;
}

std::size_t AssignmentScores::argmin() const { return argmin_first(q); }

std::vector<double> AssignmentScores::probabilities() const {
  std::vector<double> p(q.size());
  double top = q[argmin()];
  double total = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    p[k] = std::exp(top - q[k]);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

AssignmentScores assignment_scores(std::span<const double> x,
                                   std::span<const SufficientStats> clusters,
                                   const NGPrior& prior, double alpha) {
  AssignmentScores s;
  s.q.reserve(clusters.size() + 1);
  for (const auto& c : clusters) {
    if (c.count == 0) throw std::logic_error("assignment scores given an empty cluster");
    s.q.push_back(-std::log(static_cast<double>(c.count)) - log_marginal(x, ng_posterior(prior, c)));
  }
  s.q.push_back(-std::log(alpha) - log_marginal(x, prior));
  return s;
}

double complete_data_nll(const Dataset& data, const Partition& partition, const NGPrior& prior,
                         double alpha) {
  const auto stats = cluster_stats(data, partition);
  double nll = -crp_log_joint(partition, alpha);
  for (std::size_t i = 0; i < data.size(); ++i) {
    SufficientStats others = stats[static_cast<std::size_t>(partition.z[i])];
    others.remove(data.point(i));
    nll -= log_marginal(data.point(i), ng_posterior(prior, others));
  }
  return nll;
}

double joint_nll(const Dataset& data, const Partition& partition, const NGPrior& prior,
                 double alpha) {
  double nll = -crp_log_joint(partition, alpha);
  for (const auto& s : cluster_stats(data, partition)) nll -= log_evidence(prior, s);
  return nll;
}

ComponentPredictive::ComponentPredictive(const NGPosterior& post)
    : mean_(post.m), scale_(post.dim()) {
  const double nu = 2.0 * post.a;
  exponent_ = post.a + 0.5;
  log_norm_ = static_cast<double>(post.dim()) * (log_gamma(post.a + 0.5) - log_gamma(post.a));
  for (std::size_t d = 0; d < post.dim(); ++d) {
    const double lambda = post.a * post.c / (post.b[d] * (post.c + 1.0));
    scale_[d] = lambda / nu;
    log_norm_ += 0.5 * std::log(lambda / (nu * std::numbers::pi));
  }
}

double ComponentPredictive::log_density(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t d = 0; d < mean_.size(); ++d) {
    const double r = x[d] - mean_[d];
    acc += std::log1p(scale_[d] * r * r);
  }
  return log_norm_ - exponent_ * acc;
}

CollapsedState::CollapsedState(const Dataset& data, NGPrior prior, double alpha,
                               const Partition& init)
    : data_(&data),
      prior_(std::move(prior)),
      alpha_(alpha),
      log_alpha_(std::log(alpha)),
      partition_(init),
      prior_predictive_(prior_as_posterior(prior_)) {
  data.validate();
  prior_.validate(data.dim());
  if (!(alpha > 0.0)) throw InputError("concentration must be positive");
  if (init.size() != data.size()) throw InputError("initial partition size differs from dataset");
  init.check();
  stats_ = cluster_stats(data, init);
  predictive_.resize(stats_.size());
  for (std::size_t k = 0; k < stats_.size(); ++k) refresh(k);
}

void CollapsedState::refresh(std::size_t k) {
  predictive_[k] = ComponentPredictive(ng_posterior(prior_, stats_[k]));
}

bool CollapsedState::detach(std::size_t i) {
  const int k = partition_.z[i];
  if (k < 0) throw std::logic_error("observation already detached");
  const auto ku = static_cast<std::size_t>(k);
  stats_[ku].remove(data_->point(i));
  partition_.z[i] = -1;
  if (--partition_.counts[ku] > 0) {
    refresh(ku);
    return false;
  }
  stats_.erase(stats_.begin() + k);
  predictive_.erase(predictive_.begin() + k);
  partition_.counts.erase(partition_.counts.begin() + k);
  for (int& z : partition_.z) {
    if (z > k) --z;
  }
  return true;
}

void CollapsedState::scores(std::size_t i, std::vector<double>& q) const {
  const auto x = data_->point(i);
  const std::size_t K = stats_.size();
  q.resize(K + 1);
  for (std::size_t k = 0; k < K; ++k) {
    q[k] = -std::log(static_cast<double>(stats_[k].count)) - predictive_[k].log_density(x);
  }
  q[K] = -log_alpha_ - prior_predictive_.log_density(x);
}

void CollapsedState::attach(std::size_t i, std::size_t k) {
  if (partition_.z[i] >= 0) throw std::logic_error("observation is already attached");
  if (k > stats_.size()) throw std::logic_error("cluster id out of range");
  if (k == stats_.size()) {
    stats_.emplace_back(data_->dim());
    predictive_.emplace_back();
    partition_.counts.push_back(0);
  }
  stats_[k].add(data_->point(i));
  ++partition_.counts[k];
  partition_.z[i] = static_cast<int>(k);
  refresh(k);
}

void CollapsedState::canonicalize() {
  const std::size_t K = stats_.size();
  std::vector<int> remap(K, -1);
  int next = 0;
  for (int z : partition_.z) {
    if (z >= 0 && remap[static_cast<std::size_t>(z)] < 0) remap[static_cast<std::size_t>(z)] = next++;
  }
  if (static_cast<std::size_t>(next) != K) throw std::logic_error("canonicalize with detached or empty clusters");
  bool identity = true;
  for (std::size_t k = 0; k < K; ++k) identity = identity && remap[k] == static_cast<int>(k);
  if (identity) {
    rebuild();
    return;
  }

  std::vector<std::size_t> counts(K);
  for (std::size_t k = 0; k < K; ++k) counts[static_cast<std::size_t>(remap[k])] = partition_.counts[k];
  partition_.counts = std::move(counts);
  for (int& z : partition_.z) z = remap[static_cast<std::size_t>(z)];
  rebuild();
}

void CollapsedState::rebuild() {
  stats_ = cluster_stats(*data_, partition_);
  for (std::size_t k = 0; k < stats_.size(); ++k) refresh(k);
}

}  // namespace crpmap
