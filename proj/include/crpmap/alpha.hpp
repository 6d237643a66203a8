#pragma once

#include <span>
#include <vector>

#include "crpmap/core.hpp"
#include "crpmap/mapdp.hpp"

namespace crpmap {

/// Candidate concentrations in increasing order with one score each (lower is better).
struct AlphaGrid {
  std::vector<double> values;
  std::vector<double> scores;
  std::vector<std::vector<double>> fold_scores;  // cross-validation only: [candidate][fold]
};

struct AlphaSelection {
  double alpha = 1.0;
  AlphaGrid grid;
};

/// Fits MAP-DPM at every candidate (fit_config.alpha is overridden) and keeps the lowest final NLL.
AlphaSelection select_alpha_by_nll(const Dataset& data, std::span<const double> candidates,
                                   const MapDpConfig& fit_config, std::size_t jobs = 1);

/// Mean held-out -log predictive over a seeded k-fold split; folds == N is leave-one-out.
AlphaSelection select_alpha_by_cv(const Dataset& data, std::span<const double> candidates,
                                  std::size_t folds, const MapDpConfig& fit_config,
                                  std::size_t jobs = 1);

struct AlphaPrior {
  enum class Kind { inverse_gamma_half, gamma };
  Kind kind = Kind::inverse_gamma_half;
  double shape = 1.0;  // gamma only
  double rate = 1.0;   // gamma only

  static AlphaPrior inverse_gamma() { return {}; }
  static AlphaPrior gamma(double shape, double rate) { return {Kind::gamma, shape, rate}; }
  void validate() const;
};

/// f(phi) = -log p(alpha = e^phi | N, K) up to a constant, with its first two phi-derivatives.
struct AlphaObjective {
  double value = 0.0;
  double gradient = 0.0;
  double curvature = 0.0;
};

AlphaObjective alpha_objective(double phi, std::size_t n, std::size_t k, const AlphaPrior& prior);

struct AlphaMapResult {
  double alpha = 1.0;
  std::size_t iterations = 0;
  bool used_fallback = false;  // Newton did not converge; golden-section search produced alpha
};

/// Safeguarded Newton on phi = log alpha. K is the number of non-empty clusters.
AlphaMapResult alpha_map_newton(std::size_t n, std::size_t k, const AlphaPrior& prior);

}  // namespace crpmap
