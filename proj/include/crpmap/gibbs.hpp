#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crpmap/core.hpp"
#include "crpmap/predictive.hpp"
#include "crpmap/rng.hpp"

namespace crpmap {

/// Raftery-Lewis run-length settings: estimate the q-quantile to within +-r with probability s.
struct RafteryParams {
  double q = 0.025;
  double r = 0.1;
  double s = 0.95;
  double converge_eps = 0.001;

  void validate() const;
};

struct RafteryResult {
  std::size_t n_required = 0;  // burn_in + keep
  std::size_t burn_in = 0;
  std::size_t keep = 0;
  std::size_t thin = 1;
  std::size_t n_min = 0;
  double dependence_factor = 1.0;
  bool degenerate = false;  // dichotomised chain has a single state; n_required = n_min
};

/// ceil(z^2 q (1-q) / r^2) with z = Phi^{-1}((1+s)/2): the run length for independent draws.
std::size_t raftery_n_min(const RafteryParams& params);

/// Dichotomises the chain at its empirical q-quantile, picks the smallest
/// thinning for which a first-order Markov chain beats a second-order one by
/// BIC, and converts the fitted transition probabilities into burn-in and
/// run-length estimates. Returns nullopt while the chain is shorter than n_min.
std::optional<RafteryResult> raftery_lewis(std::span<const double> chain,
                                           const RafteryParams& params);

struct GibbsConfig {
  double alpha = 1.0;
  NGPrior prior;
  std::size_t max_iters = 1000;
  std::size_t burn_in = 0;
  std::optional<RafteryParams> raftery;
  std::uint64_t seed = 0;
  /// Keep every thin-th post burn-in sample.
  std::size_t thin = 1;
  /// Sweeps between Raftery-Lewis checks.
  std::size_t check_every = 10;

  void validate(std::size_t dim) const;
};

struct GibbsTrace {
  std::vector<Partition> samples;
  std::vector<std::size_t> sample_iterations;  // 1-based sweep index of each sample
  std::vector<double> nll_chain;               // joint NLL after every sweep
  std::size_t iterations_run = 0;
  std::size_t empty_cluster_events = 0;
  std::optional<RafteryResult> raftery;
  double wall_time = 0.0;
};

/// One collapsed Gibbs pass in index order: detach x_i, draw z_i from softmax(-q), reattach.
/// Returns the number of clusters emptied during the pass.
std::size_t gibbs_sweep(CollapsedState& state, Rng& rng);

/// -log p(X, z) for the state's current assignment.
double state_joint_nll(const CollapsedState& state);

GibbsTrace run_gibbs(const Dataset& data, const GibbsConfig& config);

struct MeanSd {
  double mean = 0.0;
  double two_sd = 0.0;
};

MeanSd mean_two_sd(std::span<const double> values);

struct GibbsSummary {
  std::size_t n_samples = 0;
  MeanSd num_clusters;
  std::optional<MeanSd> nmi_sum;
  std::optional<MeanSd> nmi_max;
  std::optional<MeanSd> ami;
  std::optional<MeanSd> delta_k;
  std::size_t empty_cluster_events = 0;
};

/// Per-sample agreement with `truth` (when given), averaged over samples.
/// AMI is evaluated on every `ami_stride`-th sample (0 disables it).
GibbsSummary summarize_trace(const GibbsTrace& trace, std::optional<std::span<const int>> truth,
                             std::size_t ami_stride = 1);

}  // namespace crpmap
