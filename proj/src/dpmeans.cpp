#include "crpmap/dpmeans.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "crpmap/rng.hpp"

namespace crpmap {

void DpMeansConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
}

Matrix cluster_means(const Dataset& data, const Partition& partition) {
  const auto stats = cluster_stats(data, partition);
  Matrix centers(stats.size(), data.dim());
  for (std::size_t k = 0; k < stats.size(); ++k) {
    for (std::size_t d = 0; d < data.dim(); ++d) {
      centers(k, d) = stats[k].sum[d] / static_cast<double>(stats[k].count);
    }
  }
  return centers;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += (a[d] - b[d]) * (a[d] - b[d]);
  return acc;
}

}  // namespace

double dpmeans_objective(const Dataset& data, const Partition& partition, const Matrix& centers,
                         double lambda) {
  if (centers.rows() != partition.num_clusters() || centers.cols() != data.dim()) {
    throw InputError("centers do not match the partition");
  }
  double total = lambda * static_cast<double>(partition.num_clusters());
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += squared_distance(data.point(i), centers.row(static_cast<std::size_t>(partition.z[i])));
  }
  return total;
}

FitResult fit_dpmeans(const Dataset& data, const DpMeansConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  config.validate();
  Rng rng(config.seed);

  Partition partition = Partition::single_cluster(data.size());
  std::vector<std::vector<double>> centers;
  {
    const Matrix mean = cluster_means(data, partition);
    centers.emplace_back(mean.row(0).begin(), mean.row(0).end());
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitResult result;
  result.engine = "dpmeans";
  while (result.sweeps < config.max_iters) {
    if (config.shuffle_order) {
      for (std::size_t j = order.size(); j > 1; --j) std::swap(order[j - 1], order[rng.below(j)]);
    }
    std::size_t changed = 0;
    for (std::size_t i : order) {
      const auto x = data.point(i);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = squared_distance(x, centers[k]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      const bool open = best_d > config.lambda;
      if (open) {
        best = centers.size();
        centers.emplace_back(x.begin(), x.end());
      }
      if (static_cast<std::size_t>(partition.z[i]) != best) {
        partition.z[i] = static_cast<int>(best);
        ++changed;
      }
      if (open && config.end_sweep_on_new_cluster) break;
    }
    ++result.sweeps;

    // Drop emptied clusters and relabel canonically before the center step.
    partition = Partition::from_labels(partition.z);
    const std::size_t emptied = centers.size() - partition.num_clusters();
    result.empty_cluster_events += emptied;
    const Matrix means = cluster_means(data, partition);
    centers.assign(means.rows(), {});
    for (std::size_t k = 0; k < means.rows(); ++k) centers[k].assign(means.row(k).begin(), means.row(k).end());
    result.nll_trace.push_back(dpmeans_objective(data, partition, means, config.lambda));
    if (changed == 0) {
      result.converged = true;
      break;
    }
  }
  result.partition = std::move(partition);
  result.final_nll = result.nll_trace.back();
  result.total_sweeps = result.sweeps;
  result.restart_nlls = {result.final_nll};
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

LambdaScan scan_lambda(const Dataset& data, std::span<const double> lambdas, DpMeansConfig config) {
  if (lambdas.empty()) throw InputError("lambda grid is empty");
  LambdaScan scan;
  for (double lambda : lambdas) {
    config.lambda = lambda;
    scan.lambdas.push_back(lambda);
    scan.clusters.push_back(fit_dpmeans(data, config).partition.num_clusters());
  }
  return scan;
}

double lambda_for_clusters(const LambdaScan& scan, std::size_t target_k) {
  if (scan.lambdas.empty()) throw InputError("lambda scan is empty");
  std::size_t best = 0;
  auto gap = [&](std::size_t j) {
    return scan.clusters[j] > target_k ? scan.clusters[j] - target_k : target_k - scan.clusters[j];
  };
  for (std::size_t j = 1; j < scan.lambdas.size(); ++j) {
    if (gap(j) < gap(best)) best = j;
  }
  return scan.lambdas[best];
}

}  // namespace crpmap
