#include "crpmap/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>

#include "crpmap/eval.hpp"
#include "crpmap/io.hpp"
#include "crpmap/mapdp.hpp"
#include "crpmap/parallel.hpp"

namespace crpmap {

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

std::vector<int> predict_labels(const Dataset& test, const FittedModel& model) {
  std::vector<int> labels(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    labels[i] = static_cast<int>(predict_modal(test.point(i), model).cluster);
  }
  return labels;
}

// Streams for one replicate; fixed so results do not depend on scheduling.
enum Stream : std::uint64_t { data_stream = 1, test_stream = 2, map_stream = 3, gibbs_stream = 4 };

}  // namespace

void ExperimentConfig::validate() const {
  if (replicates < 1) throw InputError("need at least one replicate");
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  if (n < 1 || test_size < 1) throw InputError("dataset sizes must be positive");
  prior.validate(dim);
  raftery.validate();
  if (gibbs_eval_stride < 1) throw InputError("evaluation stride must be at least 1");
}

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t index) {
  const Rng root = Rng(config.seed).split(index);
  ReplicateResult out;
  out.index = index;

  GeneratorConfig gen_config{{config.alpha, config.n}, config.prior, config.dim,
                             Rng::derive_seed(root.seed(), data_stream)};
  out.data_seed = gen_config.seed;
  const GeneratedData train = generate_dataset(gen_config);
  Rng test_rng = root.split(test_stream);
  const GeneratedData test = continue_crp(train, config.alpha, config.test_size, config.prior, test_rng);
  const std::span<const int> truth = train.truth.z;
  const std::span<const int> test_truth = *test.data.labels;
  out.k_true = train.truth.num_clusters();
  out.truth_sizes = cluster_size_profile(train.truth);

  {
    MapDpConfig map_config;
    map_config.alpha = config.alpha;
    map_config.prior = config.prior;
    map_config.restarts = config.map_restarts;
    map_config.seed = Rng::derive_seed(root.seed(), map_stream);
    const double t0 = thread_cpu_seconds();
    const FitResult fit = fit_mapdp(train.data, map_config);
    MethodResult& m = out.map;
    m.cpu_time = thread_cpu_seconds() - t0;
    const MetricReport report = compare_labelings(truth, fit.partition.z);
    m.nmi_sum = report.nmi_sum;
    m.nmi_max = report.nmi_max;
    m.ami = report.ami;
    m.delta_k = static_cast<double>(report.delta_k);
    m.k_est = static_cast<double>(report.n_clusters_est);
    m.iterations = static_cast<double>(fit.sweeps);
    m.empty_clusters = static_cast<double>(fit.empty_cluster_events);
    const FittedModel model = FittedModel::from_partition(train.data, fit.partition, config.prior, config.alpha);
    const auto predicted = predict_labels(test.data, model);
    m.test_nmi_sum = nmi(test_truth, predicted, NmiVariant::sum);
    m.test_nmi_max = nmi(test_truth, predicted, NmiVariant::max);
    m.test_ami = ami(test_truth, predicted);
    m.loo_nll = loo_nll(train.data, fit.partition, config.prior, config.alpha);
    m.sizes = cluster_size_profile(fit.partition);
  }

  {
    GibbsConfig gibbs_config;
    gibbs_config.alpha = config.alpha;
    gibbs_config.prior = config.prior;
    gibbs_config.max_iters = config.gibbs_max_iters;
    gibbs_config.raftery = config.raftery;
    gibbs_config.seed = Rng::derive_seed(root.seed(), gibbs_stream);
    const double t0 = thread_cpu_seconds();
    const GibbsTrace trace = run_gibbs(train.data, gibbs_config);
    MethodResult& g = out.gibbs;
    g.cpu_time = thread_cpu_seconds() - t0;
    const GibbsSummary summary = summarize_trace(trace, truth, config.gibbs_eval_stride);
    g.nmi_sum = summary.nmi_sum->mean;
    g.nmi_max = summary.nmi_max->mean;
    g.ami = summary.ami->mean;
    g.delta_k = summary.delta_k->mean;
    g.k_est = summary.num_clusters.mean;
    g.iterations = static_cast<double>(trace.iterations_run);
    g.empty_clusters = static_cast<double>(trace.empty_cluster_events);
    if (trace.raftery) {
      out.gibbs_burn_in = trace.raftery->burn_in;
      out.gibbs_thin = trace.raftery->thin;
    }
    std::size_t scored = 0;
    for (std::size_t j = 0; j < trace.samples.size(); j += config.gibbs_eval_stride) {
      const Partition& sample = trace.samples[j];
      const FittedModel model = FittedModel::from_partition(train.data, sample, config.prior, config.alpha);
      const auto predicted = predict_labels(test.data, model);
      g.test_nmi_sum += nmi(test_truth, predicted, NmiVariant::sum);
      g.test_nmi_max += nmi(test_truth, predicted, NmiVariant::max);
      g.test_ami += ami(test_truth, predicted);
      g.loo_nll += loo_nll(train.data, sample, config.prior, config.alpha);
      ++scored;
    }
    const auto s = static_cast<double>(scored);
    g.test_nmi_sum /= s;
    g.test_nmi_max /= s;
    g.test_ami /= s;
    g.loo_nll /= s;
    g.sizes = cluster_size_profile(trace.samples.back());
  }
  return out;
}

ExperimentSummary run_crp_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentSummary summary;
  summary.replicates.resize(config.replicates);
  parallel_for(config.replicates, config.jobs,
               [&](std::size_t r) { summary.replicates[r] = run_replicate(config, r); });

  auto row = [&](const std::string& name, double MethodResult::*field) {
    std::vector<double> g, m;
    for (const auto& rep : summary.replicates) {
      g.push_back(rep.gibbs.*field);
      m.push_back(rep.map.*field);
    }
    summary.table.push_back({name, mean_two_sd(g), mean_two_sd(m)});
  };
  row("NMI sum", &MethodResult::nmi_sum);
  row("NMI max", &MethodResult::nmi_max);
  row("AMI", &MethodResult::ami);
  row("Iterations", &MethodResult::iterations);
  row("CPU time (secs)", &MethodResult::cpu_time);
  row("Delta K", &MethodResult::delta_k);
  row("Empty clusters", &MethodResult::empty_clusters);
  row("Test set NMI sum", &MethodResult::test_nmi_sum);
  row("Test set NMI max", &MethodResult::test_nmi_max);
  row("Test set AMI", &MethodResult::test_ami);
  row("NLL (leave-one-out)", &MethodResult::loo_nll);
  const MetricRow& iters = summary.table[3];
  summary.iteration_ratio = iters.gibbs.mean / iters.map.mean;
  return summary;
}

std::vector<SizeQuantileRow> cluster_size_quantiles(const std::vector<ReplicateResult>& replicates) {
  std::vector<SizeQuantileRow> rows;
  auto add = [&](const std::string& method, auto select) {
    std::size_t max_rank = 0;
    for (const auto& rep : replicates) max_rank = std::max(max_rank, select(rep).size());
    for (std::size_t k = 0; k < max_rank; ++k) {
      std::vector<double> v;
      for (const auto& rep : replicates) {
        const auto& sizes = select(rep);
        v.push_back(k < sizes.size() ? sizes[k] : 0.0);
      }
      std::sort(v.begin(), v.end());
      auto q = [&](double p) {
        const double h = (static_cast<double>(v.size()) - 1.0) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
      };
      rows.push_back({k + 1, method, q(0.05), q(0.5), q(0.95)});
    }
  };
  add("truth", [](const ReplicateResult& r) -> const std::vector<double>& { return r.truth_sizes; });
  add("map", [](const ReplicateResult& r) -> const std::vector<double>& { return r.map.sizes; });
  add("gibbs", [](const ReplicateResult& r) -> const std::vector<double>& { return r.gibbs.sizes; });
  return rows;
}

}  // namespace crpmap
