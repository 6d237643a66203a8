#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crpmap/core.hpp"
#include "crpmap/rng.hpp"

namespace crpmap {

struct CrpConfig {
  double alpha = 1.0;
  std::size_t n = 1;

  void validate() const;
};

struct GeneratorConfig {
  CrpConfig crp;
  NGPrior prior;
  std::size_t dim = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-cluster Gaussian parameters drawn from the prior (diagonal precision).
struct ComponentParams {
  std::vector<double> mean;
  std::vector<double> precision;
};

struct GeneratedData {
  Dataset data;  // labels hold the ground-truth cluster ids (0-based, canonical)
  Partition truth;
  std::vector<ComponentParams> components;
};

/// log p(z_1..z_N) = log G(a) - log G(N+a) + K log a + sum_k log G(N_k).
double crp_log_joint(std::span<const std::size_t> counts, double alpha);
double crp_log_joint(const Partition& partition, double alpha);

/// Seating probabilities for the next customer: entries 0..K-1 are N_k/(a+n),
/// entry K is a/(a+n), where n is the number already seated.
std::vector<double> crp_conditional(std::span<const std::size_t> counts, std::size_t n_seated,
                                    double alpha);

Partition sample_partition(const CrpConfig& config, Rng& rng);

/// Draws the partition, then per cluster tau_d ~ Gamma(a0, rate b0_d) and
/// mu_d ~ Normal(m0_d, 1/(c0 tau_d)), then each x_i ~ Normal(mu_{z_i}, 1/tau_{z_i}).
GeneratedData generate_dataset(const GeneratorConfig& config, Rng& rng);
GeneratedData generate_dataset(const GeneratorConfig& config);

/// Draws one parameter set from the normal-Gamma prior.
ComponentParams draw_component(const NGPrior& prior, Rng& rng);

/// Draws a point from a component.
std::vector<double> draw_point(const ComponentParams& component, Rng& rng);

}  // namespace crpmap

namespace crpmap {

/// Seats `n_new` further customers after the training ones and draws their points.
/// Existing tables reuse `train.components`; new tables draw fresh components and
/// continue the id sequence, so labels share the training id space.
GeneratedData continue_crp(const GeneratedData& train, double alpha, std::size_t n_new,
                           const NGPrior& prior, Rng& rng);

}  // namespace crpmap
