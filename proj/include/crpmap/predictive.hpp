#pragma once

#include <span>
#include <vector>

#include "crpmap/core.hpp"

namespace crpmap {

/// Univariate Student-t with location `mu`, precision `lambda` and `nu` degrees of freedom.
struct StudentT {
  double mu = 0.0;
  double lambda = 1.0;
  double nu = 1.0;
};

/// Posterior predictive of one dimension of a cluster: mu = m_d,
/// lambda = a c / (b_d (c + 1)), nu = 2a.
StudentT student_t_existing(const NGPosterior& post, std::size_t d);
StudentT student_t_prior(const NGPrior& prior, std::size_t d);

/// Full log density, normalising constants included.
double log_student_t(double x, const StudentT& p);

/// Sum of per-dimension Student-t log densities. Throws InputError on dimension mismatch.
double log_marginal(std::span<const double> x, const NGPosterior& post);
double log_marginal(std::span<const double> x, const NGPrior& prior);

/// Exact log evidence log p(x_1..x_n) of the members summarised by `stats`
/// with the component parameters integrated out. Zero for an empty cluster.
double log_evidence(const NGPrior& prior, const SufficientStats& stats);

/// Negative log unnormalised assignment probabilities. Entries 0..K-1 are the
/// existing clusters, the last entry is the new-cluster option.
struct AssignmentScores {
  std::vector<double> q;

  std::size_t num_existing() const { return q.size() - 1; }
  std::size_t new_cluster() const { return q.size() - 1; }
  /// Lowest index among the minima, so the new-cluster slot loses every tie.
  std::size_t argmin() const;
  /// softmax(-q).
  std::vector<double> probabilities() const;
};

std::size_t argmin_first(std::span<const double> q);

/// q_k = -log N_k - log p(x | cluster k), q_new = -log alpha - log p(x | prior),
/// where `clusters` already exclude x. Throws std::logic_error if any cluster is empty.
AssignmentScores assignment_scores(std::span<const double> x,
                                   std::span<const SufficientStats> clusters,
                                   const NGPrior& prior, double alpha);

/// -sum_i log p(x_i | other members of its cluster) - log p(z): every point is
/// scored by the leave-one-out predictive of its own cluster.
double complete_data_nll(const Dataset& data, const Partition& partition, const NGPrior& prior,
                         double alpha);

/// -log p(X, z | alpha, prior) with all component parameters integrated out.
/// Conditional-mode and Gibbs updates of a single indicator are exact with
/// respect to this quantity.
double joint_nll(const Dataset& data, const Partition& partition, const NGPrior& prior,
                 double alpha);

/// Precomputed Student-t product for one cluster; evaluation costs D log1p calls.
class ComponentPredictive {
 public:
  ComponentPredictive() = default;
  explicit ComponentPredictive(const NGPosterior& post);

  double log_density(std::span<const double> x) const;

 private:
  double log_norm_ = 0.0;
  double exponent_ = 0.0;  // (nu + 1) / 2
  std::vector<double> mean_;
  std::vector<double> scale_;  // lambda / nu
};

/// Indicators plus per-cluster statistics and cached predictives for a dataset,
/// supporting the detach / score / attach cycle shared by the ICM and Gibbs
/// sweeps. Cluster ids stay dense: a cluster emptied by `detach` is erased at
/// once and higher ids shift down by one.
class CollapsedState {
 public:
  CollapsedState(const Dataset& data, NGPrior prior, double alpha, const Partition& init);

  std::size_t size() const { return partition_.z.size(); }
  std::size_t num_clusters() const { return stats_.size(); }
  int label(std::size_t i) const { return partition_.z[i]; }
  const SufficientStats& stats(std::size_t k) const { return stats_[k]; }
  std::span<const SufficientStats> all_stats() const { return stats_; }
  const NGPrior& prior() const { return prior_; }
  double alpha() const { return alpha_; }
  const Dataset& data() const { return *data_; }

  /// Valid only when no observation is detached.
  const Partition& partition() const { return partition_; }

  /// Removes observation i from its cluster. Returns true when that emptied and erased the cluster.
  bool detach(std::size_t i);
  /// Scores for detached observation i against the current clusters.
  void scores(std::size_t i, std::vector<double>& q) const;
  /// k == num_clusters() opens a new cluster.
  void attach(std::size_t i, std::size_t k);
  /// Relabels clusters by order of first appearance and recomputes every
  /// cluster's statistics from its members, discarding incremental rounding drift.
  void canonicalize();

 private:
  void refresh(std::size_t k);
  void rebuild();

  const Dataset* data_;
  NGPrior prior_;
  double alpha_;
  double log_alpha_;
  Partition partition_;
  std::vector<SufficientStats> stats_;
  std::vector<ComponentPredictive> predictive_;
  ComponentPredictive prior_predictive_;
};

}  // namespace crpmap
