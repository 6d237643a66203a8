#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crpmap {

/// Bad user input: malformed files, dimension mismatches, invalid configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity that is non-negative analytically came out clearly negative.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit that was required to converge did not.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix; one observation per row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t d) const { return data_[i * cols_ + d]; }
  double& operator()(std::size_t i, std::size_t d) { return data_[i * cols_ + d]; }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Dataset {
  Matrix x;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> feature_names;

  std::size_t size() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
  std::span<const double> point(std::size_t i) const { return x.row(i); }

  /// Throws InputError unless N >= 1, D >= 1, every entry finite and labels sized N.
  void validate() const;
};

/// Per-dimension normal-Gamma hyperparameters shared by every component.
/// Precision tau_d ~ Gamma(shape a0, rate b0_d); mean mu_d | tau_d ~ Normal(m0_d, 1/(c0 tau_d)).
struct NGPrior {
  std::vector<double> m0;
  double c0 = 1.0;
  std::vector<double> b0;
  double a0 = 1.0;

  std::size_t dim() const { return m0.size(); }
  void validate() const;
  void validate(std::size_t expected_dim) const;
};

enum class B0Mode { variance, precision };

/// Data-driven prior: m0 = sample mean, c0 = 10 / N, a0 = 1, b0_d = sample variance
/// of dimension d (or its reciprocal). Throws InputError on a zero-variance dimension.
NGPrior empirical_prior(const Dataset& data, B0Mode mode = B0Mode::variance);

/// Running sums over the members of one cluster. Add/remove are O(D).
struct SufficientStats {
  std::vector<double> sum;     // S_d
  std::vector<double> sum_sq;  // V_d
  std::size_t count = 0;       // N_k

  SufficientStats() = default;
  explicit SufficientStats(std::size_t dim) : sum(dim, 0.0), sum_sq(dim, 0.0) {}

  std::size_t dim() const { return sum.size(); }
  bool empty() const { return count == 0; }

  /// Throws InputError on a non-finite coordinate or dimension mismatch.
  void add(std::span<const double> x);
  /// Throws std::logic_error when the cluster is already empty.
  void remove(std::span<const double> x);

  bool operator==(const SufficientStats&) const = default;
};

SufficientStats stats_add(SufficientStats stats, std::span<const double> x);
SufficientStats stats_remove(SufficientStats stats, std::span<const double> x);

struct NGPosterior {
  std::vector<double> m;
  double c = 1.0;
  std::vector<double> b;
  double a = 1.0;

  std::size_t dim() const { return m.size(); }
};

NGPosterior prior_as_posterior(const NGPrior& prior);

/// Conjugate update of the prior with the members summarised by `stats`.
/// Returns the prior unchanged for an empty cluster. The per-dimension scatter
/// V - S^2/N is clamped at zero for cancellation noise down to -1e-9 V; a larger
/// negative value raises NumericalError.
NGPosterior ng_posterior(const NGPrior& prior, const SufficientStats& stats);

/// Cluster indicators with dense ids 0..K-1. Files use 1-based ids.
struct Partition {
  std::vector<int> z;
  std::vector<std::size_t> counts;

  std::size_t size() const { return z.size(); }
  std::size_t num_clusters() const { return counts.size(); }

  /// Relabels arbitrary integer labels by order of first appearance.
  static Partition from_labels(std::span<const int> labels);
  static Partition single_cluster(std::size_t n);

  /// Throws std::logic_error if counts disagree with z, a cluster is empty or ids are not dense.
  void check() const;
  bool is_canonical() const;

  bool operator==(const Partition&) const = default;
};

/// True when both labelings induce the same co-membership relation.
bool same_clustering(std::span<const int> a, std::span<const int> b);

std::vector<SufficientStats> cluster_stats(const Dataset& data, const Partition& partition);

}  // namespace crpmap
