#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crpmap/core.hpp"
#include "crpmap/mapdp.hpp"

namespace crpmap {

struct DpMeansConfig {
  double lambda = 1.0;  // squared-distance penalty for opening a cluster
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  bool shuffle_order = false;
  /// End a sweep as soon as it opens a cluster, recomputing centers before the next sweep.
  bool end_sweep_on_new_cluster = false;

  void validate() const;
};

/// Row k is the mean of cluster k's members.
Matrix cluster_means(const Dataset& data, const Partition& partition);

/// sum_i |x_i - mu_{z_i}|^2 + lambda K.
double dpmeans_objective(const Dataset& data, const Partition& partition, const Matrix& centers,
                         double lambda);

/// FitResult::nll_trace holds the objective after every sweep's center update.
FitResult fit_dpmeans(const Dataset& data, const DpMeansConfig& config);

struct LambdaScan {
  std::vector<double> lambdas;
  std::vector<std::size_t> clusters;
};

LambdaScan scan_lambda(const Dataset& data, std::span<const double> lambdas, DpMeansConfig config);

/// The scanned lambda whose K is nearest `target_k`; ties go to the earlier grid entry.
double lambda_for_clusters(const LambdaScan& scan, std::size_t target_k);

}  // namespace crpmap
