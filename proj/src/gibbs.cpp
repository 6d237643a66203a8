#include "crpmap/gibbs.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "crpmap/crp.hpp"
#include "crpmap/eval.hpp"

namespace crpmap {

void RafteryParams::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw InputError("Raftery q must lie in (0, 1)");
  if (!(s > 0.0 && s < 1.0)) throw InputError("Raftery s must lie in (0, 1)");
  if (!(r > 0.0)) throw InputError("Raftery r must be positive");
  if (!(converge_eps > 0.0)) throw InputError("Raftery convergence epsilon must be positive");
}

std::size_t raftery_n_min(const RafteryParams& params) {
  params.validate();
  const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + params.s));
  return static_cast<std::size_t>(std::ceil(params.q * (1.0 - params.q) * z * z / (params.r * params.r)));
}

namespace {

// Sample quantile with linear interpolation between order statistics (R type 7).
double empirical_quantile(std::span<const double> x, double q) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// G^2 statistic of a second-order against a first-order chain, minus its BIC penalty.
double second_order_bic(std::span<const int> x) {
  std::array<double, 8> t{};
  for (std::size_t i = 2; i < x.size(); ++i) t[static_cast<std::size_t>(x[i - 2] * 4 + x[i - 1] * 2 + x[i])] += 1.0;
  auto cell = [&](int a, int b, int c) { return t[static_cast<std::size_t>(a * 4 + b * 2 + c)]; };
  double g2 = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        const double observed = cell(a, b, c);
        if (observed == 0.0) continue;
        const double fitted = (cell(a, b, 0) + cell(a, b, 1)) * (cell(0, b, c) + cell(1, b, c)) /
                              (cell(0, b, 0) + cell(0, b, 1) + cell(1, b, 0) + cell(1, b, 1));
        g2 += 2.0 * observed * std::log(observed / fitted);
      }
    }
  }
  return g2 - 2.0 * std::log(static_cast<double>(x.size()) - 2.0);
}

}  // namespace

std::optional<RafteryResult> raftery_lewis(std::span<const double> chain,
                                           const RafteryParams& params) {
  const std::size_t n_min = raftery_n_min(params);
  if (chain.size() < std::max<std::size_t>(n_min, 3)) return std::nullopt;

  RafteryResult out;
  out.n_min = n_min;
  const double cut = empirical_quantile(chain, params.q);
  std::vector<int> dichot(chain.size());
  std::size_t below = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    dichot[i] = chain[i] <= cut ? 1 : 0;
    below += static_cast<std::size_t>(dichot[i]);
  }
  if (below == 0 || below == chain.size()) {
    out.n_required = n_min;
    out.keep = n_min;
    out.degenerate = true;
    return out;
  }

  std::vector<int> thinned;
  std::size_t k = 0;
  for (;;) {
    ++k;
    thinned.clear();
    for (std::size_t i = 0; i < dichot.size(); i += k) thinned.push_back(dichot[i]);
    if (thinned.size() < 3) return std::nullopt;  // too short to decide a thinning
    if (second_order_bic(thinned) < 0.0) break;
  }
  out.thin = k;

  std::array<double, 4> t{};  // from-state * 2 + to-state
  for (std::size_t i = 1; i < thinned.size(); ++i) t[static_cast<std::size_t>(thinned[i - 1] * 2 + thinned[i])] += 1.0;
  if (t[0] + t[1] == 0.0 || t[2] + t[3] == 0.0) return std::nullopt;
  const double a = t[1] / (t[0] + t[1]);  // P(above -> below)
  const double b = t[2] / (t[2] + t[3]);  // P(below -> above)
  if (a + b == 0.0) return std::nullopt;  // no transitions observed yet

  const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + params.s));
  const double lambda = std::abs(1.0 - a - b);
  double burn = 0.0;
  if (lambda > 0.0 && lambda < 1.0) {
    burn = std::log(params.converge_eps * (a + b) / std::max(a, b)) / std::log(lambda);
  }
  const double prec = (2.0 - a - b) * a * b * z * z / (std::pow(a + b, 3) * params.r * params.r);
  out.burn_in = static_cast<std::size_t>(std::max(0.0, std::ceil(burn))) * k;
  out.keep = static_cast<std::size_t>(std::ceil(prec * static_cast<double>(k)));
  out.n_required = out.burn_in + out.keep;
  out.dependence_factor = static_cast<double>(out.n_required) / static_cast<double>(n_min);
  return out;
}

void GibbsConfig::validate(std::size_t dim) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be positive");
  prior.validate(dim);
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (burn_in >= max_iters) throw InputError("burn_in must be smaller than max_iters");
  if (thin < 1) throw InputError("thin must be at least 1");
  if (check_every < 1) throw InputError("check_every must be at least 1");
  if (raftery) raftery->validate();
}

std::size_t gibbs_sweep(CollapsedState& state, Rng& rng) {
  std::size_t emptied = 0;
  std::vector<double> q;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.detach(i)) ++emptied;
    state.scores(i, q);
    for (double& v : q) v = -v;
    state.attach(i, rng.categorical_log(q));
  }
  state.canonicalize();
  return emptied;
}

double state_joint_nll(const CollapsedState& state) {
  double nll = -crp_log_joint(state.partition(), state.alpha());
  for (const auto& s : state.all_stats()) nll -= log_evidence(state.prior(), s);
  return nll;
}

GibbsTrace run_gibbs(const Dataset& data, const GibbsConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  config.validate(data.dim());
  Rng rng(config.seed);
  CollapsedState state(data, config.prior, config.alpha, Partition::single_cluster(data.size()));

  GibbsTrace trace;
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    trace.empty_cluster_events += gibbs_sweep(state, rng);
    trace.nll_chain.push_back(state_joint_nll(state));
    trace.iterations_run = it;
    if (it > config.burn_in && (it - config.burn_in - 1) % config.thin == 0) {
      trace.samples.push_back(state.partition());
      trace.sample_iterations.push_back(it);
    }
    if (config.raftery && it % config.check_every == 0) {
      auto diag = raftery_lewis(trace.nll_chain, *config.raftery);
      if (diag && it >= diag->n_required) {
        trace.raftery = diag;
        break;
      }
    }
  }
  if (config.raftery && !trace.raftery) trace.raftery = raftery_lewis(trace.nll_chain, *config.raftery);

  // Samples inside the diagnostic's burn-in are discarded, always keeping the final one.
  if (trace.raftery && trace.raftery->burn_in > config.burn_in && !trace.samples.empty()) {
    std::size_t first = 0;
    while (first + 1 < trace.samples.size() && trace.sample_iterations[first] <= trace.raftery->burn_in) ++first;
    trace.samples.erase(trace.samples.begin(), trace.samples.begin() + static_cast<std::ptrdiff_t>(first));
    trace.sample_iterations.erase(trace.sample_iterations.begin(),
                                  trace.sample_iterations.begin() + static_cast<std::ptrdiff_t>(first));
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

MeanSd mean_two_sd(std::span<const double> values) {
  MeanSd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.two_sd = 2.0 * std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

GibbsSummary summarize_trace(const GibbsTrace& trace, std::optional<std::span<const int>> truth,
                             std::size_t ami_stride) {
  if (trace.samples.empty()) throw InputError("trace has no samples to summarise");
  GibbsSummary out;
  out.n_samples = trace.samples.size();
  out.empty_cluster_events = trace.empty_cluster_events;
  std::vector<double> k, nmi_s, nmi_m, amis, dk;
  for (std::size_t j = 0; j < trace.samples.size(); ++j) {
    const Partition& p = trace.samples[j];
    k.push_back(static_cast<double>(p.num_clusters()));
    if (!truth) continue;
    nmi_s.push_back(nmi(*truth, p.z, NmiVariant::sum));
    nmi_m.push_back(nmi(*truth, p.z, NmiVariant::max));
    dk.push_back(static_cast<double>(p.num_clusters()) -
                 static_cast<double>(Partition::from_labels(*truth).num_clusters()));
    if (ami_stride > 0 && j % ami_stride == 0) amis.push_back(ami(*truth, p.z));
  }
  out.num_clusters = mean_two_sd(k);
  if (truth) {
    out.nmi_sum = mean_two_sd(nmi_s);
    out.nmi_max = mean_two_sd(nmi_m);
    out.delta_k = mean_two_sd(dk);
    if (!amis.empty()) out.ami = mean_two_sd(amis);
  }
  return out;
}

}  // namespace crpmap
