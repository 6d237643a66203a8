#include "crpmap/crp.hpp"

#include <cmath>

#include "crpmap/numeric.hpp"

namespace crpmap {

void CrpConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("CRP concentration must be positive");
  if (n < 1) throw InputError("CRP needs at least one item");
}

void GeneratorConfig::validate() const {
  crp.validate();
  if (dim < 1) throw InputError("generator dimension must be at least 1");
  prior.validate(dim);
}

double crp_log_joint(std::span<const std::size_t> counts, double alpha) {
  std::size_t n = 0;
  double log_p = static_cast<double>(counts.size()) * std::log(alpha);
  for (std::size_t c : counts) {
    n += c;
    log_p += log_gamma(static_cast<double>(c));
  }
  return log_p + log_gamma(alpha) - log_gamma(static_cast<double>(n) + alpha);
}

double crp_log_joint(const Partition& partition, double alpha) {
  return crp_log_joint(partition.counts, alpha);
}

std::vector<double> crp_conditional(std::span<const std::size_t> counts, std::size_t n_seated,
                                    double alpha) {
  std::vector<double> p(counts.size() + 1);
  const double denom = alpha + static_cast<double>(n_seated);
  for (std::size_t k = 0; k < counts.size(); ++k) p[k] = static_cast<double>(counts[k]) / denom;
  p.back() = alpha / denom;
  return p;
}

Partition sample_partition(const CrpConfig& config, Rng& rng) {
  config.validate();
  Partition p;
  p.z.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    // Table k with weight N_k, new table with weight alpha.
    double target = rng.uniform() * (config.alpha + static_cast<double>(i));
    std::size_t k = 0;
    while (k < p.counts.size() && target >= static_cast<double>(p.counts[k])) {
      target -= static_cast<double>(p.counts[k]);
      ++k;
    }
    if (k == p.counts.size()) p.counts.push_back(0);
    ++p.counts[k];
    p.z.push_back(static_cast<int>(k));
  }
  return p;
}

ComponentParams draw_component(const NGPrior& prior, Rng& rng) {
  ComponentParams c;
  c.mean.resize(prior.dim());
  c.precision.resize(prior.dim());
  for (std::size_t d = 0; d < prior.dim(); ++d) {
    c.precision[d] = rng.gamma(prior.a0, prior.b0[d]);
    c.mean[d] = rng.normal(prior.m0[d], 1.0 / std::sqrt(prior.c0 * c.precision[d]));
  }
  return c;
}

std::vector<double> draw_point(const ComponentParams& component, Rng& rng) {
  std::vector<double> x(component.mean.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    x[d] = rng.normal(component.mean[d], 1.0 / std::sqrt(component.precision[d]));
  }
  return x;
}

GeneratedData generate_dataset(const GeneratorConfig& config, Rng& rng) {
  config.validate();
  GeneratedData out;
  out.truth = sample_partition(config.crp, rng);
  out.components.reserve(out.truth.num_clusters());
  for (std::size_t k = 0; k < out.truth.num_clusters(); ++k) {
    out.components.push_back(draw_component(config.prior, rng));
  }
  out.data.x = Matrix(config.crp.n, config.dim);
  for (std::size_t i = 0; i < config.crp.n; ++i) {
    const auto& comp = out.components[static_cast<std::size_t>(out.truth.z[i])];
    auto row = out.data.x.row(i);
    for (std::size_t d = 0; d < config.dim; ++d) {
      row[d] = rng.normal(comp.mean[d], 1.0 / std::sqrt(comp.precision[d]));
    }
  }
  out.data.labels = out.truth.z;
  return out;
}

GeneratedData generate_dataset(const GeneratorConfig& config) {
  Rng rng(config.seed);
  return generate_dataset(config, rng);
}

}  // namespace crpmap

namespace crpmap {

GeneratedData continue_crp(const GeneratedData& train, double alpha, std::size_t n_new,
                           const NGPrior& prior, Rng& rng) {
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  if (n_new == 0) throw InputError("continuation needs at least one customer");
  std::vector<std::size_t> counts = train.truth.counts;
  std::vector<ComponentParams> components = train.components;
  std::size_t seated = train.truth.size();
  GeneratedData out;
  out.data.x = Matrix(n_new, train.data.dim());
  std::vector<int> labels(n_new);
  for (std::size_t i = 0; i < n_new; ++i) {
    const auto k = rng.categorical(crp_conditional(counts, seated, alpha));
    if (k == counts.size()) {
      counts.push_back(0);
      components.push_back(draw_component(prior, rng));
    }
    ++counts[k];
    ++seated;
    labels[i] = static_cast<int>(k);
    const auto x = draw_point(components[k], rng);
    std::copy(x.begin(), x.end(), out.data.x.row(i).begin());
  }
  out.truth = Partition::from_labels(labels);
  out.data.labels = std::move(labels);
  out.components = std::move(components);
  return out;
}

}  // namespace crpmap
