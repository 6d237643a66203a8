#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crpmap/crp.hpp"
#include "crpmap/gibbs.hpp"

namespace crpmap {

/// Synthetic CRP benchmark: generate, fit with MAP-DPM and the Gibbs sampler
/// using the generating alpha and prior, score against the truth.
struct ExperimentConfig {
  std::size_t replicates = 20;
  double alpha = 3.0;
  std::size_t n = 600;
  std::size_t dim = 2;
  NGPrior prior{{1.0, 1.0}, 0.1, {10.0, 10.0}, 1.0};
  std::size_t test_size = 600;
  std::size_t map_restarts = 10;
  RafteryParams raftery;
  std::size_t gibbs_max_iters = 20000;
  /// Gibbs samples are scored (AMI, test set, leave-one-out) at this stride; NMI uses every sample.
  std::size_t gibbs_eval_stride = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  void validate() const;
};

struct MethodResult {
  double nmi_sum = 0.0;
  double nmi_max = 0.0;
  double ami = 0.0;
  double delta_k = 0.0;
  double k_est = 0.0;
  double iterations = 0.0;
  double cpu_time = 0.0;  // thread CPU seconds
  double empty_clusters = 0.0;
  double test_nmi_sum = 0.0;
  double test_nmi_max = 0.0;
  double test_ami = 0.0;
  double loo_nll = 0.0;
  std::vector<double> sizes;  // N_k / N, decreasing, of the point estimate or final sample
};

struct ReplicateResult {
  std::size_t index = 0;
  std::uint64_t data_seed = 0;
  std::size_t k_true = 0;
  std::vector<double> truth_sizes;
  MethodResult map;
  MethodResult gibbs;
  std::size_t gibbs_burn_in = 0;
  std::size_t gibbs_thin = 1;
};

struct MetricRow {
  std::string name;
  MeanSd gibbs;
  MeanSd map;
};

struct ExperimentSummary {
  std::vector<ReplicateResult> replicates;
  std::vector<MetricRow> table;  // per metric: mean and two standard deviations across replicates
  double iteration_ratio = 0.0;  // mean Gibbs iterations / mean MAP sweeps
};

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t index);
ExperimentSummary run_crp_experiment(const ExperimentConfig& config);

struct SizeQuantileRow {
  std::size_t rank = 0;
  std::string method;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

/// Per rank and method, quantiles of N_k / N across replicates; ranks past a replicate's K count as 0.
std::vector<SizeQuantileRow> cluster_size_quantiles(const std::vector<ReplicateResult>& replicates);

}  // namespace crpmap
