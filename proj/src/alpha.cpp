#include "crpmap/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "crpmap/eval.hpp"
#include "crpmap/numeric.hpp"
#include "crpmap/parallel.hpp"
#include "crpmap/rng.hpp"

namespace crpmap {

namespace {

std::vector<double> sorted_candidates(std::span<const double> candidates) {
  if (candidates.empty()) throw InputError("no alpha candidates");
  std::vector<double> values(candidates.begin(), candidates.end());
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("alpha candidates must be positive");
  }
  std::sort(values.begin(), values.end());
  if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
    throw InputError("alpha candidates must be distinct");
  }
  return values;
}

AlphaSelection pick(AlphaGrid grid) {
  const auto best = static_cast<std::size_t>(
      std::min_element(grid.scores.begin(), grid.scores.end()) - grid.scores.begin());
  return {grid.values[best], std::move(grid)};
}

Dataset subset(const Dataset& data, std::span<const std::size_t> rows) {
  Matrix x(rows.size(), data.dim());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    std::copy_n(data.point(rows[j]).begin(), data.dim(), x.row(j).begin());
  }
  return Dataset{std::move(x), std::nullopt, data.feature_names};
}

}  // namespace

AlphaSelection select_alpha_by_nll(const Dataset& data, std::span<const double> candidates,
                                   const MapDpConfig& fit_config, std::size_t jobs) {
  AlphaGrid grid;
  grid.values = sorted_candidates(candidates);
  grid.scores.resize(grid.values.size());
  parallel_for(grid.values.size(), jobs, [&](std::size_t j) {
    MapDpConfig config = fit_config;
    config.alpha = grid.values[j];
    grid.scores[j] = fit_mapdp(data, config).final_nll;
  });
  return pick(std::move(grid));
}

AlphaSelection select_alpha_by_cv(const Dataset& data, std::span<const double> candidates,
                                  std::size_t folds, const MapDpConfig& fit_config,
                                  std::size_t jobs) {
  data.validate();
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (folds > data.size()) throw InputError("more folds than observations leaves an empty fold");

  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng(fit_config.seed).split(0xcf);
  for (std::size_t j = perm.size(); j > 1; --j) std::swap(perm[j - 1], perm[rng.below(j)]);

  std::vector<std::vector<std::size_t>> train(folds), test(folds);
  for (std::size_t j = 0; j < perm.size(); ++j) {
    for (std::size_t f = 0; f < folds; ++f) (j % folds == f ? test[f] : train[f]).push_back(perm[j]);
  }

  AlphaGrid grid;
  grid.values = sorted_candidates(candidates);
  grid.scores.assign(grid.values.size(), 0.0);
  grid.fold_scores.assign(grid.values.size(), std::vector<double>(folds, 0.0));
  parallel_for(grid.values.size(), jobs, [&](std::size_t j) {
    MapDpConfig config = fit_config;
    config.alpha = grid.values[j];
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const Dataset fit_data = subset(data, train[f]);
      const FitResult fit = fit_mapdp(fit_data, config);
      const FittedModel model = FittedModel::from_partition(fit_data, fit.partition, config.prior, config.alpha);
      double fold_total = 0.0;
      for (std::size_t i : test[f]) fold_total -= predict_marginal(data.point(i), model);
      grid.fold_scores[j][f] = fold_total / static_cast<double>(test[f].size());
      total += fold_total;
    }
    grid.scores[j] = total / static_cast<double>(data.size());
  });
  return pick(std::move(grid));
}

void AlphaPrior::validate() const {
  if (kind == Kind::gamma && (!(shape > 0.0) || !(rate > 0.0))) {
    throw InputError("gamma prior on alpha needs positive shape and rate");
  }
}

AlphaObjective alpha_objective(double phi, std::size_t n, std::size_t k, const AlphaPrior& prior) {
  const double alpha = std::exp(phi);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  using boost::math::digamma;
  using boost::math::trigamma;
  // log Gamma(alpha) / Gamma(alpha + N) and its phi-derivatives.
  double value = log_gamma(alpha) - log_gamma(alpha + nd);
  double grad = alpha * (digamma(alpha) - digamma(alpha + nd));
  double curv = grad + alpha * alpha * (trigamma(alpha) - trigamma(alpha + nd));
  if (prior.kind == AlphaPrior::Kind::inverse_gamma_half) {
    value += (kd - 1.5) * phi - 0.5 / alpha;
    grad += (kd - 1.5) + 0.5 / alpha;
    curv += -0.5 / alpha;
  } else {
    value += (kd + prior.shape - 1.0) * phi - prior.rate * alpha;
    grad += (kd + prior.shape - 1.0) - prior.rate * alpha;
    curv += -prior.rate * alpha;
  }
  return {-value, -grad, -curv};
}

AlphaMapResult alpha_map_newton(std::size_t n, std::size_t k, const AlphaPrior& prior) {
  if (n < 1) throw InputError("alpha estimation needs N >= 1");
  if (k < 1 || k > n) throw InputError("alpha estimation needs 1 <= K <= N");
  prior.validate();

  constexpr double lo = -30.0;
  constexpr double hi = 30.0;
  AlphaMapResult out;
  double phi = std::log(static_cast<double>(k) / std::log1p(static_cast<double>(n)));
  AlphaObjective f = alpha_objective(phi, n, k, prior);
  for (out.iterations = 1; out.iterations <= 100; ++out.iterations) {
    double step = f.curvature > 0.0 ? -f.gradient / f.curvature : -f.gradient;
    double next = std::clamp(phi + step, lo, hi);
    AlphaObjective g = alpha_objective(next, n, k, prior);
    for (int halving = 0; halving < 60 && !(g.value <= f.value); ++halving) {
      step *= 0.5;
      next = std::clamp(phi + step, lo, hi);
      g = alpha_objective(next, n, k, prior);
    }
    // A step test rather than a gradient test: the gradient also vanishes on the
    // alpha -> 0 asymptote when the posterior has no interior mode.
    const bool done = std::abs(next - phi) < 1e-12 * std::max(1.0, std::abs(phi));
    phi = next;
    f = g;
    if (done && phi > lo && phi < hi) {
      out.alpha = std::exp(phi);
      return out;
    }
  }

  // Golden-section search over the whole bracket.
  out.used_fallback = true;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = alpha_objective(c, n, k, prior).value;
  double fd = alpha_objective(d, n, k, prior).value;
  while (b - a > 1e-12) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = alpha_objective(c, n, k, prior).value;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = alpha_objective(d, n, k, prior).value;
    }
  }
  out.alpha = std::exp(0.5 * (a + b));
  return out;
}

}  // namespace crpmap
