#include "crpmap/mapdp.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace crpmap {

double nll_score(NllScore score, const Dataset& data, const Partition& partition,
                 const NGPrior& prior, double alpha) {
  switch (score) {
    case NllScore::joint:
      return joint_nll(data, partition, prior, alpha);
    case NllScore::leave_one_out:
      return complete_data_nll(data, partition, prior, alpha);
  }
  return 0.0;
}

void MapDpConfig::validate(std::size_t dim) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be positive");
  prior.validate(dim);
  if (epsilon && !(*epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (max_sweeps < 1) throw InputError("max_sweeps must be at least 1");
}

SweepStats mapdp_sweep(CollapsedState& state, std::span<const std::size_t> order,
                       std::vector<AssignmentStep>* log) {
  SweepStats out;
  std::vector<double> q;
  for (std::size_t i : order) {
    const auto before = static_cast<std::size_t>(state.label(i));
    const bool erased = state.detach(i);
    state.scores(i, q);
    const std::size_t k = argmin_first(q);
    if (erased) {
      ++out.emptied;
      // A singleton that reopens a new singleton keeps its clustering.
      if (k != state.num_clusters()) ++out.changed;
    } else if (k != before) {
      ++out.changed;
    }
    if (log) log->push_back({i, k});
    state.attach(i, k);
  }
  state.canonicalize();
  return out;
}

Partition restart_initializer(const Dataset& data, Rng& rng) {
  const std::size_t n = data.size();
  if (n == 0) throw InputError("cannot initialise an empty dataset");
  const auto max_k = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::uint64_t k = 1 + rng.below(max_k);
  std::vector<int> labels(n);
  for (auto& z : labels) z = static_cast<int>(rng.below(k));
  return Partition::from_labels(labels);
}

FitResult fit_mapdp_from(const Dataset& data, const MapDpConfig& config, const Partition& init,
                         Rng& rng, std::vector<AssignmentStep>* log) {
  const auto start = std::chrono::steady_clock::now();
  config.validate(data.dim());
  const double epsilon = config.epsilon.value_or(1e-6 * static_cast<double>(data.size()));

  CollapsedState state(data, config.prior, config.alpha, init);
  state.canonicalize();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitResult result;
  result.engine = "mapdp";
  double previous = nll_score(config.score, data, state.partition(), config.prior, config.alpha);
  while (result.sweeps < config.max_sweeps) {
    if (config.shuffle_order) {
      for (std::size_t j = order.size(); j > 1; --j) std::swap(order[j - 1], order[rng.below(j)]);
    }
    const SweepStats sweep = mapdp_sweep(state, order, log);
    ++result.sweeps;
    result.empty_cluster_events += sweep.emptied;
    const double nll = nll_score(config.score, data, state.partition(), config.prior, config.alpha);
    result.nll_trace.push_back(nll);
    const double decrease = previous - nll;
    previous = nll;
    if (sweep.changed == 0 || decrease < epsilon) {
      result.converged = true;
      break;
    }
  }
  result.partition = state.partition();
  result.final_nll = previous;
  result.total_sweeps = result.sweeps;
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitResult fit_mapdp(const Dataset& data, const MapDpConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  const Rng root(config.seed);
  Rng rng0 = root.split(0);
  FitResult best = fit_mapdp_from(data, config, Partition::single_cluster(data.size()), rng0);
  std::vector<double> finals{best.final_nll};
  std::size_t total = best.sweeps;
  for (std::size_t r = 1; r <= config.restarts; ++r) {
    Rng rng = root.split(r);
    const Partition init = restart_initializer(data, rng);
    FitResult run = fit_mapdp_from(data, config, init, rng);
    finals.push_back(run.final_nll);
    total += run.sweeps;
    if (run.final_nll < best.final_nll) best = std::move(run);
  }
  best.restart_nlls = std::move(finals);
  best.total_sweeps = total;
  best.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace crpmap
