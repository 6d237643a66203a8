#include "crpmap/core.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

namespace crpmap {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InputError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows_ * cols_));
  }
}

void Dataset::validate() const {
  if (x.rows() == 0) throw InputError("dataset has no observations");
  if (x.cols() == 0) throw InputError("dataset has no features");
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t d = 0; d < x.cols(); ++d) {
      if (!std::isfinite(x(i, d))) {
        throw InputError("non-finite value at row " + std::to_string(i + 1) + ", column " +
                         std::to_string(d + 1));
      }
    }
  }
  if (labels && labels->size() != x.rows()) {
    throw InputError("labels have length " + std::to_string(labels->size()) + ", expected " +
                     std::to_string(x.rows()));
  }
  if (!feature_names.empty() && feature_names.size() != x.cols()) {
    throw InputError("feature name count does not match the number of columns");
  }
}

void NGPrior::validate() const {
  if (m0.empty()) throw InputError("prior has zero dimensions");
  if (b0.size() != m0.size()) throw InputError("prior b0 and m0 lengths differ");
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw InputError("prior c0 must be positive");
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw InputError("prior a0 must be positive");
  for (double m : m0) {
    if (!std::isfinite(m)) throw InputError("prior m0 must be finite");
  }
  for (double b : b0) {
    if (!(b > 0.0) || !std::isfinite(b)) throw InputError("prior b0 entries must be positive");
  }
}

void NGPrior::validate(std::size_t expected_dim) const {
  validate();
  if (dim() != expected_dim) {
    throw InputError("prior has dimension " + std::to_string(dim()) + " but data has " +
                     std::to_string(expected_dim));
  }
}

NGPrior empirical_prior(const Dataset& data, B0Mode mode) {
  data.validate();
  if (data.size() < 2) throw InputError("empirical prior needs at least two observations");
  const double n = static_cast<double>(data.size());
  NGPrior prior{std::vector<double>(data.dim(), 0.0), 10.0 / n, std::vector<double>(data.dim(), 0.0), 1.0};
  for (std::size_t d = 0; d < data.dim(); ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) mean += data.x(i, d);
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) ss += (data.x(i, d) - mean) * (data.x(i, d) - mean);
    const double var = ss / (n - 1.0);
    if (!(var > 0.0)) throw InputError("dimension " + std::to_string(d + 1) + " has zero variance");
    prior.m0[d] = mean;
    prior.b0[d] = mode == B0Mode::variance ? var : 1.0 / var;
  }
  return prior;
}

void SufficientStats::add(std::span<const double> x) {
  if (x.size() != sum.size()) throw InputError("observation dimension mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("cannot add a non-finite observation");
  }
  for (std::size_t d = 0; d < x.size(); ++d) {
    sum[d] += x[d];
    sum_sq[d] += x[d] * x[d];
  }
  ++count;
}

void SufficientStats::remove(std::span<const double> x) {
  if (count == 0) throw std::logic_error("remove from empty cluster");
  if (x.size() != sum.size()) throw InputError("observation dimension mismatch");
  --count;
  if (count == 0) {
    // Exact zero rather than accumulated rounding residue.
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
    return;
  }
  for (std::size_t d = 0; d < x.size(); ++d) {
    sum[d] -= x[d];
    sum_sq[d] -= x[d] * x[d];
  }
}

SufficientStats stats_add(SufficientStats stats, std::span<const double> x) {
  stats.add(x);
  return stats;
}

SufficientStats stats_remove(SufficientStats stats, std::span<const double> x) {
  stats.remove(x);
  return stats;
}

NGPosterior prior_as_posterior(const NGPrior& prior) {
  return NGPosterior{prior.m0, prior.c0, prior.b0, prior.a0};
}

NGPosterior ng_posterior(const NGPrior& prior, const SufficientStats& stats) {
  if (stats.dim() != prior.dim()) throw InputError("statistics and prior dimensions differ");
  if (stats.count == 0) return prior_as_posterior(prior);

  const double n = static_cast<double>(stats.count);
  NGPosterior post;
  post.c = prior.c0 + n;
  post.a = prior.a0 + 0.5 * n;
  post.m.resize(prior.dim());
  post.b.resize(prior.dim());
  for (std::size_t d = 0; d < prior.dim(); ++d) {
    const double s = stats.sum[d];
    const double v = stats.sum_sq[d];
    // One member has no scatter; skipping the subtraction avoids incremental-update residue.
    double scatter = stats.count == 1 ? 0.0 : v - s * s / n;
    if (scatter < 0.0) {
      if (scatter < -1e-9 * std::abs(v)) {
        throw NumericalError("negative within-cluster scatter " + std::to_string(scatter) +
                             " in dimension " + std::to_string(d));
      }
      scatter = 0.0;
    }
    const double mean_gap = s / n - prior.m0[d];
    post.m[d] = (prior.c0 * prior.m0[d] + s) / post.c;
    post.b[d] = prior.b0[d] + 0.5 * scatter + prior.c0 * n * mean_gap * mean_gap / (2.0 * post.c);
  }
  return post;
}

Partition Partition::from_labels(std::span<const int> labels) {
  Partition p;
  p.z.reserve(labels.size());
  std::unordered_map<int, int> ids;
  for (int label : labels) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(p.counts.size()));
    if (inserted) p.counts.push_back(0);
    p.z.push_back(it->second);
    ++p.counts[static_cast<std::size_t>(it->second)];
  }
  return p;
}

Partition Partition::single_cluster(std::size_t n) {
  Partition p;
  p.z.assign(n, 0);
  if (n > 0) p.counts.push_back(n);
  return p;
}

void Partition::check() const {
  std::vector<std::size_t> seen(counts.size(), 0);
  for (int k : z) {
    if (k < 0 || static_cast<std::size_t>(k) >= counts.size()) {
      throw std::logic_error("cluster id out of range");
    }
    ++seen[static_cast<std::size_t>(k)];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (seen[k] == 0) throw std::logic_error("empty cluster " + std::to_string(k));
    if (seen[k] != counts[k]) throw std::logic_error("cluster counts disagree with indicators");
  }
}

bool Partition::is_canonical() const {
  int next = 0;
  for (int k : z) {
    if (k > next) return false;
    if (k == next) ++next;
  }
  return static_cast<std::size_t>(next) == counts.size();
}

bool same_clustering(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) return false;
  return Partition::from_labels(a).z == Partition::from_labels(b).z;
}

std::vector<SufficientStats> cluster_stats(const Dataset& data, const Partition& partition) {
  if (partition.size() != data.size()) throw InputError("partition and dataset sizes differ");
  std::vector<SufficientStats> stats(partition.num_clusters(), SufficientStats(data.dim()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    stats[static_cast<std::size_t>(partition.z[i])].add(data.point(i));
  }
  return stats;
}

}  // namespace crpmap
