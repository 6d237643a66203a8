#pragma once

#include <span>
#include <vector>

#include "crpmap/core.hpp"

namespace crpmap {

enum class NmiVariant { sum, max };

/// Agreement between a reference labeling and an estimate. Natural logarithms throughout.
struct MetricReport {
  double nmi_sum = 0.0;
  double nmi_max = 0.0;
  double ami = 0.0;
  long delta_k = 0;  // estimated minus true cluster count
  std::size_t n_clusters_est = 0;
  std::size_t n_clusters_true = 0;
};

double entropy(std::span<const int> labels);
double mutual_information(std::span<const int> u, std::span<const int> v);

/// Exact E[I(U,V)] under the hypergeometric permutation model with the given margins.
double expected_mutual_information(std::span<const std::size_t> row_sums,
                                   std::span<const std::size_t> col_sums);

/// sum: 2 I / (H(U) + H(V)); max: I / max(H(U), H(V)).
/// Both labelings single-cluster gives 1; exactly one single-cluster gives 0.
double nmi(std::span<const int> u, std::span<const int> v, NmiVariant variant = NmiVariant::sum);

/// (I - E[I]) / (max(H(U), H(V)) - E[I]).
double ami(std::span<const int> u, std::span<const int> v);

MetricReport compare_labelings(std::span<const int> truth, std::span<const int> estimate,
                               bool with_ami = true);

/// Everything the collapsed model needs for prediction: the prior, alpha and per-cluster statistics.
struct FittedModel {
  NGPrior prior;
  double alpha = 1.0;
  std::vector<SufficientStats> clusters;

  std::size_t num_points() const;
  static FittedModel from_partition(const Dataset& data, const Partition& partition,
                                    const NGPrior& prior, double alpha);
};

/// N_k / (alpha + N) per existing cluster, then alpha / (alpha + N).
std::vector<double> mixture_weights(const FittedModel& model);

/// log sum_k w_k p(x | component k), integrating over the new point's indicator.
double predict_marginal(std::span<const double> x, const FittedModel& model);

struct ModalPrediction {
  std::size_t cluster = 0;  // == model.clusters.size() for "new cluster"
  double log_density = 0.0;
};

/// argmin_k [-log p(x | k) - log w_k] with ties to the lowest id.
ModalPrediction predict_modal(std::span<const double> x, const FittedModel& model);

/// Mean over i of -predict_marginal(x_i) under the model with x_i removed from its cluster.
double loo_nll(const Dataset& data, const Partition& partition, const NGPrior& prior, double alpha);

}  // namespace crpmap
