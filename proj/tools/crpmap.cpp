// crpmap: batch front end for the clustering library.
//
// Exit codes: 0 success, 2 input or I/O error, 3 numerical-integrity error,
// 4 non-convergence (only with --strict).

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crpmap/alpha.hpp"
#include "crpmap/crp.hpp"
#include "crpmap/dpmeans.hpp"
#include "crpmap/eval.hpp"
#include "crpmap/experiment.hpp"
#include "crpmap/gibbs.hpp"
#include "crpmap/io.hpp"
#include "crpmap/mapdp.hpp"
#include "crpmap/parallel.hpp"

#ifndef CRPMAP_VERSION
#define CRPMAP_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace crpmap;

namespace {

using Clock = std::chrono::steady_clock;

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  json timings = json::object();  // timings stay here so the other outputs are reproducible
  Clock::time_point start = Clock::now();

  // JSON outputs embed this reference; the manifest lists every file written.
  static constexpr const char* file_name = "manifest.json";

  void write(const fs::path& dir) const {
    json j{{"command", command},
           {"argv", argv},
           {"config", config},
           {"seed", seed},
           {"version", std::string("crpmap ") + CRPMAP_VERSION},
           {"outputs", outputs},
           {"timings", timings}};
    j["timings"]["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_json(dir / file_name, j);
  }
};

struct PriorArgs {
  std::string mode = "explicit";
  std::vector<double> m0{1.0};
  double c0 = 0.1;
  std::vector<double> b0{10.0};
  double a0 = 1.0;
  std::string b0_mode = "variance";

  void add(CLI::App* app) {
    app->add_option("--prior", mode, "explicit (from --m0/--c0/--b0/--a0) or empirical")
        ->check(CLI::IsMember({"explicit", "empirical"}));
    app->add_option("--m0", m0, "prior mean; one value is broadcast")->delimiter(',');
    app->add_option("--c0", c0, "prior mean scaling");
    app->add_option("--b0", b0, "prior Gamma rate; one value is broadcast")->delimiter(',');
    app->add_option("--a0", a0, "prior Gamma shape");
    app->add_option("--b0-mode", b0_mode, "empirical b0 as per-dimension variance or precision")
        ->check(CLI::IsMember({"variance", "precision"}));
  }

  NGPrior resolve(const Dataset& data) const {
    if (mode == "empirical") {
      return empirical_prior(data, b0_mode == "precision" ? B0Mode::precision : B0Mode::variance);
    }
    return explicit_prior(data.dim());
  }

  NGPrior explicit_prior(std::size_t dim) const {
    NGPrior p{broadcast(m0, dim, "--m0"), c0, broadcast(b0, dim, "--b0"), a0};
    p.validate(dim);
    return p;
  }

  static std::vector<double> broadcast(const std::vector<double>& v, std::size_t dim, const char* name) {
    if (v.size() == 1) return std::vector<double>(dim, v[0]);
    if (v.size() != dim) {
      throw InputError(std::string(name) + " has " + std::to_string(v.size()) + " values for " +
                       std::to_string(dim) + " dimensions");
    }
    return v;
  }
};

struct InputArgs {
  std::string path;
  bool header = false;
  std::string label_column;

  void add(CLI::App* app, const char* name = "--input") {
    app->add_option(name, path, "data CSV")->required();
    app->add_flag("--header", header, "first line holds column names");
    app->add_option("--label-column", label_column, "truth label column: 1-based index or header name");
  }

  Dataset read() const {
    CsvOptions options{header, std::nullopt};
    if (!label_column.empty()) options.label_column = label_column;
    return read_dataset_csv(path, options);
  }
};

std::vector<std::string> argv_of(int argc, char** argv) { return {argv, argv + argc}; }

std::optional<RafteryParams> raftery_from(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  RafteryParams p;
  p.q = v[0];
  p.r = v[1];
  p.s = v[2];
  p.validate();
  return p;
}

json raftery_json(const std::optional<RafteryResult>& r) {
  if (!r) return nullptr;
  return {{"n_required", r->n_required}, {"burn_in", r->burn_in}, {"keep", r->keep},
          {"thin", r->thin},             {"n_min", r->n_min},     {"dependence_factor", r->dependence_factor},
          {"degenerate", r->degenerate}};
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  double alpha = 3.0;
  std::size_t n = 600;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  std::string out = "generated";
  PriorArgs prior;
};

void cmd_generate(const GenerateArgs& a, Manifest& manifest) {
  const NGPrior prior = a.prior.explicit_prior(a.dim);
  manifest.config = {{"alpha", a.alpha}, {"n", a.n}, {"dim", a.dim}, {"replicates", a.replicates},
                     {"prior", prior_to_json(prior)}};
  manifest.seed = a.seed;
  const fs::path root(a.out);
  for (std::size_t r = 0; r < a.replicates; ++r) {
    // One replicate keeps the seed as given; several derive one stream each.
    const std::uint64_t seed = a.replicates == 1 ? a.seed : Rng::derive_seed(a.seed, r);
    std::ostringstream name;
    name << "rep_" << std::setw(3) << std::setfill('0') << r + 1;
    const fs::path dir = a.replicates == 1 ? root : root / name.str();
    const GeneratedData gen = generate_dataset(GeneratorConfig{{a.alpha, a.n}, prior, a.dim, seed});
    write_dataset_csv(dir / "data.csv", gen.data);
    write_assignments_csv(dir / "truth.csv", gen.truth.z);
    json components = json::array();
    for (const auto& c : gen.components) components.push_back({{"mean", c.mean}, {"precision", c.precision}});
    write_json(dir / "params.json", {{"alpha", a.alpha},
                                     {"n", a.n},
                                     {"dim", a.dim},
                                     {"seed", seed},
                                     {"prior", prior_to_json(prior)},
                                     {"num_clusters", gen.truth.num_clusters()},
                                     {"components", components},
                                     {"manifest", Manifest::file_name}});
    for (const char* f : {"data.csv", "truth.csv", "params.json"}) {
      manifest.outputs.push_back(fs::relative(dir / f, root).string());
    }
  }
  manifest.write(root);
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  InputArgs input;
  PriorArgs prior;
  std::string engine = "mapdp";
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::string out = "fit";
  bool strict = false;
  // mapdp
  std::size_t restarts = 0;
  std::size_t max_sweeps = 100;
  double epsilon = 0.0;
  std::string nll_score = "joint";
  bool shuffle = false;
  // gibbs
  std::size_t max_iters = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::vector<double> raftery;
  // dpmeans
  double lambda = 1.0;
  bool end_sweep_on_new = false;
};

void cmd_fit(const FitArgs& a, Manifest& manifest) {
  const Dataset data = a.input.read();
  const fs::path dir(a.out);
  manifest.seed = a.seed;
  manifest.config = {{"engine", a.engine}, {"input", a.input.path}};

  json summary{{"engine", a.engine}, {"n", data.size()}, {"dim", data.dim()}, {"manifest", Manifest::file_name}};
  Partition partition;
  std::vector<double> trace;
  bool converged = true;

  if (a.engine == "dpmeans") {
    DpMeansConfig config;
    config.lambda = a.lambda;
    config.max_iters = a.max_sweeps;
    config.seed = a.seed;
    config.shuffle_order = a.shuffle;
    config.end_sweep_on_new_cluster = a.end_sweep_on_new;
    manifest.config.update({{"lambda", a.lambda}, {"max_iters", a.max_sweeps},
                            {"end_sweep_on_new_cluster", a.end_sweep_on_new}});
    const FitResult fit = fit_dpmeans(data, config);
    partition = fit.partition;
    trace = fit.nll_trace;
    converged = fit.converged;
    summary.update({{"K", partition.num_clusters()}, {"final_objective", fit.final_nll}, {"sweeps", fit.sweeps},
                    {"converged", fit.converged}, {"empty_cluster_events", fit.empty_cluster_events}});
    manifest.timings["fit_seconds"] = fit.wall_time;
  } else {
    const NGPrior prior = a.prior.resolve(data);
    manifest.config.update({{"alpha", a.alpha}, {"prior", prior_to_json(prior)}, {"prior_mode", a.prior.mode}});
    if (a.engine == "mapdp") {
      MapDpConfig config;
      config.alpha = a.alpha;
      config.prior = prior;
      if (a.epsilon > 0.0) config.epsilon = a.epsilon;
      config.max_sweeps = a.max_sweeps;
      config.restarts = a.restarts;
      config.seed = a.seed;
      config.shuffle_order = a.shuffle;
      config.score = a.nll_score == "loo" ? NllScore::leave_one_out : NllScore::joint;
      manifest.config.update({{"restarts", a.restarts}, {"max_sweeps", a.max_sweeps},
                              {"epsilon", config.epsilon.value_or(1e-6 * static_cast<double>(data.size()))},
                              {"nll_score", a.nll_score}, {"shuffle_order", a.shuffle}});
      const FitResult fit = fit_mapdp(data, config);
      partition = fit.partition;
      trace = fit.nll_trace;
      converged = fit.converged;
      summary.update({{"K", partition.num_clusters()}, {"final_nll", fit.final_nll}, {"sweeps", fit.sweeps},
                      {"total_sweeps", fit.total_sweeps}, {"converged", fit.converged},
                      {"empty_cluster_events", fit.empty_cluster_events}, {"restart_nlls", fit.restart_nlls}});
      manifest.timings["fit_seconds"] = fit.wall_time;
    } else {
      GibbsConfig config;
      config.alpha = a.alpha;
      config.prior = prior;
      config.max_iters = a.max_iters;
      config.burn_in = a.burn_in;
      config.thin = a.thin;
      config.raftery = raftery_from(a.raftery);
      config.seed = a.seed;
      manifest.config.update({{"max_iters", a.max_iters}, {"burn_in", a.burn_in}, {"thin", a.thin},
                              {"raftery", a.raftery.empty() ? json(nullptr) : json(a.raftery)}});
      const GibbsTrace run = run_gibbs(data, config);
      partition = run.samples.back();
      trace = run.nll_chain;
      converged = !config.raftery || (run.raftery && run.iterations_run >= run.raftery->n_required);
      summary.update({{"K", partition.num_clusters()}, {"final_nll", run.nll_chain.back()},
                      {"iterations", run.iterations_run}, {"samples", run.samples.size()},
                      {"converged", converged}, {"empty_cluster_events", run.empty_cluster_events},
                      {"raftery", raftery_json(run.raftery)}});
      manifest.timings["fit_seconds"] = run.wall_time;
      if (data.labels) {
        const GibbsSummary s = summarize_trace(run, std::span<const int>(*data.labels), 0);
        summary["sample_metrics"] = {{"nmi_sum", {s.nmi_sum->mean, s.nmi_sum->two_sd}},
                                     {"nmi_max", {s.nmi_max->mean, s.nmi_max->two_sd}},
                                     {"delta_k", {s.delta_k->mean, s.delta_k->two_sd}},
                                     {"num_clusters", {s.num_clusters.mean, s.num_clusters.two_sd}}};
      }
    }
    json model = model_to_json(FittedModel::from_partition(data, partition, prior, a.alpha));
    model["manifest"] = Manifest::file_name;
    write_json(dir / "model.json", model);
    manifest.outputs.push_back("model.json");
  }
  if (data.labels) {
    const MetricReport m = compare_labelings(*data.labels, partition.z);
    summary["metrics"] = {{"nmi_sum", m.nmi_sum}, {"nmi_max", m.nmi_max}, {"ami", m.ami}, {"delta_k", m.delta_k}};
  }
  write_assignments_csv(dir / "assignments.csv", partition.z);
  write_trace_csv(dir / "trace.csv", trace);
  write_json(dir / "summary.json", summary);
  for (const char* f : {"assignments.csv", "trace.csv", "summary.json"}) manifest.outputs.push_back(f);
  manifest.write(dir);
  if (a.strict && !converged) throw ConvergenceError(a.engine + " did not converge");
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::vector<std::string> truth;
  std::vector<std::string> assignments;
  std::string method = "estimate";
  std::string model;
  std::string data;
  bool header = true;
  std::string out = "evaluation";
};

void cmd_evaluate(const EvaluateArgs& a, Manifest& manifest) {
  if (a.truth.size() != a.assignments.size()) {
    throw InputError("give one --truth file per --assignments file");
  }
  if (!a.model.empty() && (a.data.empty() || a.assignments.size() != 1)) {
    throw InputError("--model needs --data and a single replicate");
  }
  manifest.config = {{"truth", a.truth}, {"assignments", a.assignments}, {"method", a.method}};
  const fs::path dir(a.out);
  json reps = json::array();
  std::vector<double> nmi_s, nmi_m, amis, dks;
  std::vector<ReplicateResult> sizes;
  for (std::size_t r = 0; r < a.truth.size(); ++r) {
    const auto truth = read_assignments_csv(a.truth[r]);
    const auto est = read_assignments_csv(a.assignments[r]);
    if (truth.size() != est.size()) {
      throw InputError("assignments have " + std::to_string(est.size()) + " rows but truth has " +
                       std::to_string(truth.size()));
    }
    const MetricReport m = compare_labelings(truth, est);
    json rep{{"truth", a.truth[r]}, {"assignments", a.assignments[r]}, {"nmi_sum", m.nmi_sum},
             {"nmi_max", m.nmi_max}, {"ami", m.ami}, {"delta_k", m.delta_k},
             {"n_clusters_est", m.n_clusters_est}, {"n_clusters_true", m.n_clusters_true}};
    if (!a.model.empty()) {
      const FittedModel model = model_from_json(read_json(a.model));
      const Dataset data = read_dataset_csv(a.data, CsvOptions{a.header, std::nullopt});
      rep["loo_nll"] = loo_nll(data, Partition::from_labels(est), model.prior, model.alpha);
    }
    reps.push_back(rep);
    nmi_s.push_back(m.nmi_sum);
    nmi_m.push_back(m.nmi_max);
    amis.push_back(m.ami);
    dks.push_back(static_cast<double>(m.delta_k));
    ReplicateResult rr;
    rr.truth_sizes = cluster_size_profile(Partition::from_labels(truth));
    rr.map.sizes = cluster_size_profile(Partition::from_labels(est));
    sizes.push_back(std::move(rr));
  }
  auto agg = [](std::span<const double> v) {
    const MeanSd s = mean_two_sd(v);
    return json{{"mean", s.mean}, {"two_sd", s.two_sd}};
  };
  write_json(dir / "metrics.json", {{"method", a.method},
                                    {"replicates", reps},
                                    {"aggregate",
                                     {{"nmi_sum", agg(nmi_s)},
                                      {"nmi_max", agg(nmi_m)},
                                      {"ami", agg(amis)},
                                      {"delta_k", agg(dks)}}},
                                    {"manifest", Manifest::file_name}});

  // The size profile is the per-rank median across replicates; quantiles go alongside.
  std::vector<ClusterSizeRow> rows;
  std::ostringstream q;
  q << "rank,method,q05,q50,q95\n";
  for (const auto& row : cluster_size_quantiles(sizes)) {
    if (row.method == "gibbs") continue;
    const std::string method = row.method == "map" ? a.method : row.method;
    if (row.q50 > 0.0) rows.push_back({row.rank, row.q50, method});
    q << row.rank << ',' << method << ',' << format_double(row.q05) << ',' << format_double(row.q50) << ','
      << format_double(row.q95) << '\n';
  }
  write_cluster_sizes_csv(dir / "cluster_sizes.csv", rows);
  write_text_atomic(dir / "cluster_size_quantiles.csv", q.str());
  manifest.outputs = {"metrics.json", "cluster_sizes.csv", "cluster_size_quantiles.csv"};
  manifest.write(dir);
}

// ---------------------------------------------------------------- alpha

struct AlphaArgs {
  std::string method = "newton";
  std::size_t n = 0;
  std::size_t k = 0;
  std::string alpha_prior = "inverse-gamma";
  double shape = 1.0;
  double rate = 1.0;
  InputArgs input;
  PriorArgs prior;
  std::vector<double> candidates;
  std::size_t folds = 5;
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string out = "alpha";
};

void cmd_alpha(const AlphaArgs& a, Manifest& manifest) {
  const fs::path dir(a.out);
  manifest.seed = a.seed;
  manifest.config = {{"method", a.method}};
  json result{{"method", a.method}, {"manifest", Manifest::file_name}};
  if (a.method == "newton") {
    const AlphaPrior prior =
        a.alpha_prior == "gamma" ? AlphaPrior::gamma(a.shape, a.rate) : AlphaPrior::inverse_gamma();
    manifest.config.update({{"N", a.n}, {"K", a.k}, {"alpha_prior", a.alpha_prior}});
    if (prior.kind == AlphaPrior::Kind::gamma) manifest.config.update({{"shape", a.shape}, {"rate", a.rate}});
    const AlphaMapResult r = alpha_map_newton(a.n, a.k, prior);
    result.update({{"alpha", r.alpha}, {"iterations", r.iterations}, {"used_fallback", r.used_fallback}});
    write_json(dir / "alpha.json", result);
    manifest.outputs = {"alpha.json"};
    manifest.write(dir);
    return;
  }
  if (a.input.path.empty()) throw InputError("--method " + a.method + " needs --input");
  if (a.candidates.empty()) throw InputError("--candidates is empty");
  const Dataset data = a.input.read();
  MapDpConfig fit;
  fit.prior = a.prior.resolve(data);
  fit.restarts = a.restarts;
  fit.seed = a.seed;
  const std::size_t jobs = a.jobs ? a.jobs : default_jobs();
  manifest.config.update({{"input", a.input.path}, {"candidates", a.candidates}, {"restarts", a.restarts},
                          {"prior", prior_to_json(fit.prior)}});
  AlphaSelection sel;
  if (a.method == "grid") {
    sel = select_alpha_by_nll(data, a.candidates, fit, jobs);
  } else {
    manifest.config["folds"] = a.folds;
    sel = select_alpha_by_cv(data, a.candidates, a.folds, fit, jobs);
  }
  std::ostringstream csv;
  csv << "alpha,score";
  const std::size_t folds = sel.grid.fold_scores.empty() ? 0 : sel.grid.fold_scores[0].size();
  for (std::size_t f = 0; f < folds; ++f) csv << ",fold" << f + 1;
  csv << '\n';
  for (std::size_t j = 0; j < sel.grid.values.size(); ++j) {
    csv << format_double(sel.grid.values[j]) << ',' << format_double(sel.grid.scores[j]);
    for (std::size_t f = 0; f < folds; ++f) csv << ',' << format_double(sel.grid.fold_scores[j][f]);
    csv << '\n';
  }
  write_text_atomic(dir / "alpha_grid.csv", csv.str());
  result["alpha"] = sel.alpha;
  write_json(dir / "alpha.json", result);
  manifest.outputs = {"alpha_grid.csv", "alpha.json"};
  manifest.write(dir);
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  InputArgs input;
  std::string mode = "both";
  std::string out = "prediction";
};

void cmd_predict(const PredictArgs& a, Manifest& manifest) {
  const FittedModel model = model_from_json(read_json(a.model));
  const Dataset data = a.input.read();
  if (data.dim() != model.prior.dim()) {
    throw InputError("points have " + std::to_string(data.dim()) + " features but the model has " +
                     std::to_string(model.prior.dim()));
  }
  manifest.config = {{"model", a.model}, {"input", a.input.path}, {"mode", a.mode}};
  const bool marginal = a.mode != "modal";
  const bool modal = a.mode != "marginal";
  std::ostringstream csv;
  csv << "row";
  if (marginal) csv << ",log_density";
  if (modal) csv << ",cluster,cluster_log_density";
  csv << '\n';
  std::vector<int> predicted;
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv << i + 1;
    if (marginal) csv << ',' << format_double(predict_marginal(data.point(i), model));
    if (modal) {
      const ModalPrediction p = predict_modal(data.point(i), model);
      predicted.push_back(static_cast<int>(p.cluster));
      csv << ',' << p.cluster + 1 << ',' << format_double(p.log_density);
    }
    csv << '\n';
  }
  const fs::path dir(a.out);
  write_text_atomic(dir / "predictions.csv", csv.str());
  json summary{{"n", data.size()}, {"mode", a.mode}, {"manifest", Manifest::file_name}};
  if (data.labels && modal) {
    summary["test_nmi_sum"] = nmi(*data.labels, predicted, NmiVariant::sum);
    summary["test_nmi_max"] = nmi(*data.labels, predicted, NmiVariant::max);
    summary["test_ami"] = ami(*data.labels, predicted);
  }
  write_json(dir / "predict.json", summary);
  manifest.outputs = {"predictions.csv", "predict.json"};
  manifest.write(dir);
}

// ---------------------------------------------------------------- experiment-crp

struct ExperimentArgs {
  ExperimentConfig config;
  std::vector<double> raftery{0.025, 0.1, 0.95};
  std::size_t jobs = 0;
  std::string out = "experiment";
};

void cmd_experiment(ExperimentArgs a, Manifest& manifest) {
  a.config.raftery = *raftery_from(a.raftery);
  a.config.jobs = a.jobs ? a.jobs : default_jobs();
  a.config.prior.m0 = PriorArgs::broadcast(a.config.prior.m0, a.config.dim, "--m0");
  a.config.prior.b0 = PriorArgs::broadcast(a.config.prior.b0, a.config.dim, "--b0");
  const ExperimentConfig& c = a.config;
  manifest.seed = c.seed;
  manifest.config = {{"replicates", c.replicates}, {"alpha", c.alpha}, {"n", c.n}, {"dim", c.dim},
                     {"prior", prior_to_json(c.prior)}, {"test_size", c.test_size},
                     {"map_restarts", c.map_restarts}, {"raftery", a.raftery},
                     {"gibbs_max_iters", c.gibbs_max_iters}, {"gibbs_eval_stride", c.gibbs_eval_stride}};
  const ExperimentSummary s = run_crp_experiment(c);
  const fs::path dir(a.out);

  std::ostringstream table;
  table << "metric,gibbs_mean,gibbs_two_sd,map_mean,map_two_sd\n";
  json rows = json::array();
  for (const auto& r : s.table) {
    table << r.name << ',' << format_double(r.gibbs.mean) << ',' << format_double(r.gibbs.two_sd) << ','
          << format_double(r.map.mean) << ',' << format_double(r.map.two_sd) << '\n';
    rows.push_back({{"metric", r.name},
                    {"gibbs", {{"mean", r.gibbs.mean}, {"two_sd", r.gibbs.two_sd}}},
                    {"map", {{"mean", r.map.mean}, {"two_sd", r.map.two_sd}}}});
  }
  write_text_atomic(dir / "summary_table.csv", table.str());

  std::ostringstream reps;
  reps << "replicate,data_seed,k_true,method,nmi_sum,nmi_max,ami,delta_k,k_est,iterations,cpu_time,"
          "empty_clusters,test_nmi_sum,test_nmi_max,test_ami,loo_nll\n";
  for (const auto& r : s.replicates) {
    for (const auto* m : {&r.map, &r.gibbs}) {
      reps << r.index + 1 << ',' << r.data_seed << ',' << r.k_true << ',' << (m == &r.map ? "map" : "gibbs");
      for (double v : {m->nmi_sum, m->nmi_max, m->ami, m->delta_k, m->k_est, m->iterations, m->cpu_time,
                       m->empty_clusters, m->test_nmi_sum, m->test_nmi_max, m->test_ami, m->loo_nll}) {
        reps << ',' << format_double(v);
      }
      reps << '\n';
    }
  }
  write_text_atomic(dir / "replicates.csv", reps.str());

  std::vector<ClusterSizeRow> sizes;
  std::ostringstream q;
  q << "rank,method,q05,q50,q95\n";
  for (const auto& row : cluster_size_quantiles(s.replicates)) {
    if (row.q50 > 0.0) sizes.push_back({row.rank, row.q50, row.method});
    q << row.rank << ',' << row.method << ',' << format_double(row.q05) << ',' << format_double(row.q50) << ','
      << format_double(row.q95) << '\n';
  }
  write_cluster_sizes_csv(dir / "cluster_sizes.csv", sizes);
  write_text_atomic(dir / "cluster_size_quantiles.csv", q.str());
  write_json(dir / "summary.json", {{"table", rows},
                                    {"iteration_ratio", s.iteration_ratio},
                                    {"replicates", c.replicates},
                                    {"manifest", Manifest::file_name}});
  manifest.outputs = {"summary_table.csv", "replicates.csv", "cluster_sizes.csv", "cluster_size_quantiles.csv",
                      "summary.json"};
  manifest.write(dir);

  std::cout << "metric                    gibbs                  map\n";
  for (const auto& r : s.table) {
    std::cout << std::left << std::setw(24) << r.name << "  " << std::setw(10) << r.gibbs.mean << " ("
              << std::setw(9) << r.gibbs.two_sd << ")  " << std::setw(10) << r.map.mean << " (" << r.map.two_sd
              << ")\n";
  }
  std::cout << "iteration ratio (gibbs / map): " << s.iteration_ratio << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-process mixture clustering: MAP-DPM, collapsed Gibbs and DP-means"};
  app.set_version_flag("--version", std::string("crpmap ") + CRPMAP_VERSION);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "sample datasets from a CRP mixture with a normal-Gamma prior");
  g->add_option("--alpha", gen.alpha, "CRP concentration");
  g->add_option("--n", gen.n, "observations per dataset");
  g->add_option("--dim", gen.dim, "dimensions");
  g->add_option("--seed", gen.seed);
  g->add_option("--replicates", gen.replicates, "datasets, written to rep_001, rep_002, ...");
  g->add_option("--out", gen.out, "output directory");
  g->add_option("--m0", gen.prior.m0)->delimiter(',');
  g->add_option("--c0", gen.prior.c0);
  g->add_option("--b0", gen.prior.b0)->delimiter(',');
  g->add_option("--a0", gen.prior.a0);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "cluster a CSV with one engine");
  fit.input.add(f);
  fit.prior.add(f);
  f->add_option("--engine", fit.engine)->check(CLI::IsMember({"mapdp", "gibbs", "dpmeans"}));
  f->add_option("--alpha", fit.alpha, "CRP concentration");
  f->add_option("--seed", fit.seed);
  f->add_option("--out", fit.out, "output directory");
  f->add_flag("--strict", fit.strict, "exit 4 when the engine does not converge");
  f->add_option("--restarts", fit.restarts, "mapdp: extra random restarts");
  f->add_option("--max-sweeps", fit.max_sweeps, "mapdp/dpmeans: sweep limit");
  f->add_option("--epsilon", fit.epsilon, "mapdp: NLL decrease threshold (default 1e-6 N)");
  f->add_option("--nll-score", fit.nll_score, "mapdp: joint or loo")->check(CLI::IsMember({"joint", "loo"}));
  f->add_flag("--shuffle", fit.shuffle, "visit points in a fresh random order each sweep");
  f->add_option("--max-iters", fit.max_iters, "gibbs: sweep limit");
  f->add_option("--burn-in", fit.burn_in, "gibbs: sweeps discarded before sampling");
  f->add_option("--thin", fit.thin, "gibbs: keep every n-th sample");
  f->add_option("--raftery", fit.raftery, "gibbs: q r s of the Raftery-Lewis stopping rule")->expected(3);
  f->add_option("--lambda", fit.lambda, "dpmeans: new-cluster penalty");
  f->add_flag("--end-sweep-on-new-cluster", fit.end_sweep_on_new, "dpmeans: restart the sweep after opening a cluster");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "score assignments against truth labels");
  e->add_option("--truth", ev.truth, "truth CSV (row,cluster); repeat per replicate")->required();
  e->add_option("--assignments", ev.assignments, "assignments CSV; repeat per replicate")->required();
  e->add_option("--method", ev.method, "method name for the cluster-size tables");
  e->add_option("--model", ev.model, "model JSON, enables leave-one-out NLL");
  e->add_option("--data", ev.data, "data CSV the model was fitted on");
  e->add_option("--out", ev.out, "output directory");

  AlphaArgs al;
  auto* a = app.add_subcommand("alpha", "choose the concentration parameter");
  a->add_option("--method", al.method)->check(CLI::IsMember({"newton", "grid", "cv"}));
  a->add_option("--N", al.n, "newton: observations");
  a->add_option("--K", al.k, "newton: non-empty clusters");
  a->add_option("--alpha-prior", al.alpha_prior)->check(CLI::IsMember({"inverse-gamma", "gamma"}));
  a->add_option("--shape", al.shape, "gamma prior shape");
  a->add_option("--rate", al.rate, "gamma prior rate");
  a->add_option("--input", al.input.path, "grid/cv: data CSV");
  a->add_flag("--header", al.input.header);
  a->add_option("--label-column", al.input.label_column);
  al.prior.add(a);
  a->add_option("--candidates", al.candidates, "grid/cv: candidate values")->delimiter(',');
  a->add_option("--folds", al.folds, "cv: number of folds");
  a->add_option("--restarts", al.restarts, "MAP-DPM restarts per fit");
  a->add_option("--seed", al.seed);
  a->add_option("--jobs", al.jobs, "worker threads (default CRPMAP_JOBS or all cores)");
  a->add_option("--out", al.out, "output directory");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "score new points under a fitted model");
  p->add_option("--model", pr.model, "model JSON written by fit")->required();
  pr.input.add(p);
  p->add_option("--mode", pr.mode)->check(CLI::IsMember({"marginal", "modal", "both"}));
  p->add_option("--out", pr.out, "output directory");

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment-crp", "synthetic CRP benchmark of MAP-DPM against Gibbs");
  x->add_option("--replicates", ex.config.replicates);
  x->add_option("--alpha", ex.config.alpha);
  x->add_option("--n", ex.config.n);
  x->add_option("--dim", ex.config.dim);
  x->add_option("--m0", ex.config.prior.m0)->delimiter(',');
  x->add_option("--c0", ex.config.prior.c0);
  x->add_option("--b0", ex.config.prior.b0)->delimiter(',');
  x->add_option("--a0", ex.config.prior.a0);
  x->add_option("--test-size", ex.config.test_size);
  x->add_option("--restarts", ex.config.map_restarts, "MAP-DPM random restarts");
  x->add_option("--raftery", ex.raftery, "q r s")->expected(3);
  x->add_option("--max-iters", ex.config.gibbs_max_iters, "Gibbs sweep limit");
  x->add_option("--eval-stride", ex.config.gibbs_eval_stride, "score every n-th Gibbs sample");
  x->add_option("--seed", ex.config.seed);
  x->add_option("--jobs", ex.jobs, "worker threads (default CRPMAP_JOBS or all cores)");
  x->add_option("--out", ex.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& s) {
    return app.exit(s);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  Manifest manifest;
  manifest.command = app.get_subcommands().front()->get_name();
  manifest.argv = argv_of(argc, argv);
  try {
    if (*g) cmd_generate(gen, manifest);
    if (*f) cmd_fit(fit, manifest);
    if (*e) cmd_evaluate(ev, manifest);
    if (*a) cmd_alpha(al, manifest);
    if (*p) cmd_predict(pr, manifest);
    if (*x) cmd_experiment(ex, manifest);
  } catch (const InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "I/O error: " << err.what() << "\n";
    return 2;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return 3;
  } catch (const ConvergenceError& err) {
    std::cerr << "not converged: " << err.what() << "\n";
    return 4;
  }
  return 0;
}
