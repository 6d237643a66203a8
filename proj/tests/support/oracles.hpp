#pragma once

// Reference implementations used only by tests. Each recomputes a library
// quantity by a route that shares no code with the library routine under test.

#include <cstdint>
#include <vector>

#include "crpmap/core.hpp"
#include "crpmap/mapdp.hpp"
#include "crpmap/rng.hpp"

namespace crpmap::oracle {

/// Every set partition of {0..n-1} as a restricted growth string.
std::vector<std::vector<int>> set_partitions(std::size_t n);

/// log p(z) by the sequential seating rule, multiplying conditionals one customer at a time.
double crp_log_chain(const std::vector<int>& z, double alpha);

/// Density of the normal-Gamma compound for one dimension, integrating the
/// Gaussian likelihood over mu in R and tau in (0, inf) numerically.
double ng_compound_density(double x, double m, double c, double a, double b);

/// log p(x_1..x_n) for one cluster's members in one dimension by direct
/// numerical integration over (mu, tau).
double ng_evidence_quadrature(const std::vector<double>& xs, double m0, double c0, double a0, double b0);

/// -log p(X, z) as a product of sequential predictives: each point is scored by
/// the Student-t predictive of the members of its cluster that precede it.
double joint_nll_chain(const Dataset& data, const std::vector<int>& z, const NGPrior& prior, double alpha);

/// Entropy and mutual information straight from the contingency-table definitions.
double entropy(const std::vector<int>& u);
double mutual_information(const std::vector<int>& u, const std::vector<int>& v);
double nmi_sum(const std::vector<int>& u, const std::vector<int>& v);

/// MAP-DPM that rebuilds every cluster's statistics from the raw data for each
/// decision. Records decisions with the same id conventions as mapdp_sweep.
struct NaiveMapResult {
  std::vector<AssignmentStep> steps;
  std::vector<int> z;
  std::size_t sweeps = 0;
};
NaiveMapResult naive_mapdp(const Dataset& data, const NGPrior& prior, double alpha, std::vector<int> init,
                           std::size_t max_sweeps, double epsilon);

/// Random D-dimensional dataset: `k` Gaussian blobs with unit spread around uniform centers in [-scale, scale].
Dataset random_blobs(std::size_t n, std::size_t dim, std::size_t k, double scale, Rng& rng);

/// A random valid normal-Gamma prior for `dim` dimensions.
NGPrior random_prior(std::size_t dim, Rng& rng);

}  // namespace crpmap::oracle
