#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crpmap/core.hpp"
#include "crpmap/predictive.hpp"
#include "crpmap/rng.hpp"

namespace crpmap {

/// Which negative log likelihood a fit records and uses for convergence and restart selection.
enum class NllScore {
  joint,          // -log p(X, z): exact, never increased by a conditional-mode update
  leave_one_out,  // product of each point's leave-one-out predictive times the CRP prior
};

double nll_score(NllScore score, const Dataset& data, const Partition& partition,
                 const NGPrior& prior, double alpha);

struct MapDpConfig {
  double alpha = 1.0;
  NGPrior prior;
  /// Stop once a sweep lowers the NLL by less than this. Defaults to 1e-6 N.
  std::optional<double> epsilon;
  std::size_t max_sweeps = 100;
  /// Extra runs from random initial partitions; the lowest final NLL wins.
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  /// Visit observations in a fresh random order each sweep instead of 1..N.
  bool shuffle_order = false;
  NllScore score = NllScore::joint;

  void validate(std::size_t dim) const;
};

struct FitResult {
  std::string engine;
  Partition partition;
  std::vector<double> nll_trace;  // one entry per sweep
  std::size_t sweeps = 0;        // sweeps of the selected run
  std::size_t total_sweeps = 0;  // summed over all restarts
  bool converged = false;
  std::size_t empty_cluster_events = 0;
  double wall_time = 0.0;  // seconds
  double final_nll = 0.0;
  std::vector<double> restart_nlls;  // final NLL of every run, restart 0 is the single-cluster start
};

/// One indicator decision inside a sweep: the observation and the cluster id it
/// received (ids as they stood at that moment; num_clusters() means "new").
struct AssignmentStep {
  std::size_t index;
  std::size_t cluster;
  bool operator==(const AssignmentStep&) const = default;
};

struct SweepStats {
  std::size_t changed = 0;
  std::size_t emptied = 0;
};

/// One pass of conditional-mode updates over `order`, then canonical relabeling.
SweepStats mapdp_sweep(CollapsedState& state, std::span<const std::size_t> order,
                       std::vector<AssignmentStep>* log = nullptr);

/// Random start: K' ~ uniform{1..ceil(sqrt N)}, each point uniform over K' clusters, empties dropped.
Partition restart_initializer(const Dataset& data, Rng& rng);

FitResult fit_mapdp(const Dataset& data, const MapDpConfig& config);

/// Single run from a given partition; `log` receives every indicator decision.
FitResult fit_mapdp_from(const Dataset& data, const MapDpConfig& config, const Partition& init,
                         Rng& rng, std::vector<AssignmentStep>* log = nullptr);

}  // namespace crpmap
