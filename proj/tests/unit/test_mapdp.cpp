#include <doctest.h>

#include <cmath>
#include <numeric>

#include "crpmap/crp.hpp"
#include "crpmap/eval.hpp"
#include "crpmap/mapdp.hpp"
#include "oracles.hpp"

using namespace crpmap;

namespace {

MapDpConfig config_for(const NGPrior& prior, double alpha) {
  MapDpConfig c;
  c.prior = prior;
  c.alpha = alpha;
  return c;
}

}  // namespace

TEST_CASE("ICM traces never increase the joint NLL") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = 20 + rng.below(150);
    const auto dim = 1 + rng.below(3);
    const Dataset data = oracle::random_blobs(n, dim, 1 + rng.below(6), 6.0, rng);
    MapDpConfig c = config_for(oracle::random_prior(dim, rng), 0.2 + 4.0 * rng.uniform());
    c.epsilon = 1e-300;
    c.max_sweeps = 200;
    Rng init_rng(rep);
    const FitResult fit = fit_mapdp_from(data, c, restart_initializer(data, init_rng), init_rng);
    for (std::size_t s = 1; s < fit.nll_trace.size(); ++s) CHECK(fit.nll_trace[s] <= fit.nll_trace[s - 1] + 1e-9);
    CHECK(fit.partition.is_canonical());
  }
}

TEST_CASE("converged fits are fixed points of a further sweep") {
  Rng rng(32);
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset data = oracle::random_blobs(80, 2, 4, 8.0, rng);
    MapDpConfig c = config_for(oracle::random_prior(2, rng), 1.0);
    c.epsilon = 1e-300;
    c.max_sweeps = 500;
    const FitResult fit = fit_mapdp(data, c);
    REQUIRE(fit.converged);
    CollapsedState state(data, c.prior, c.alpha, fit.partition);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const SweepStats s = mapdp_sweep(state, order);
    CHECK(s.changed == 0);
    CHECK(state.partition().z == fit.partition.z);
  }
}

TEST_CASE("matches a from-scratch reference decision by decision") {
  Rng rng(33);
  for (int rep = 0; rep < 12; ++rep) {
    const auto n = 10 + rng.below(190);
    const auto dim = 1 + rng.below(3);
    const Dataset data = oracle::random_blobs(n, dim, 1 + rng.below(5), 5.0, rng);
    const MapDpConfig base = config_for(oracle::random_prior(dim, rng), 0.3 + 3.0 * rng.uniform());
    MapDpConfig c = base;
    c.max_sweeps = 50;
    const double eps = 1e-6 * static_cast<double>(n);
    Rng init_rng(100 + rep);
    const Partition init = rep % 2 == 0 ? Partition::single_cluster(n) : restart_initializer(data, init_rng);
    std::vector<AssignmentStep> log;
    Rng fit_rng(0);
    const FitResult fit = fit_mapdp_from(data, c, init, fit_rng, &log);
    const oracle::NaiveMapResult ref = oracle::naive_mapdp(data, c.prior, c.alpha, init.z, 50, eps);
    CHECK(fit.sweeps == ref.sweeps);
    CHECK(log == ref.steps);
    CHECK(fit.partition.z == ref.z);
  }
}

TEST_CASE("restart 0 is the single-cluster run and the best restart wins") {
  Rng rng(34);
  const Dataset data = oracle::random_blobs(120, 2, 5, 10.0, rng);
  MapDpConfig c = config_for(NGPrior{{0.0, 0.0}, 0.1, {5.0, 5.0}, 1.0}, 1.0);
  c.restarts = 6;
  c.seed = 77;
  const FitResult fit = fit_mapdp(data, c);
  REQUIRE(fit.restart_nlls.size() == 7);
  double best = fit.restart_nlls[0];
  for (double v : fit.restart_nlls) best = std::min(best, v);
  CHECK(fit.final_nll == best);
  CHECK(fit.total_sweeps >= fit.sweeps);

  MapDpConfig single = c;
  single.restarts = 0;
  CHECK(fit_mapdp(data, single).final_nll == fit.restart_nlls[0]);

  const FitResult again = fit_mapdp(data, c);
  CHECK(again.partition.z == fit.partition.z);
  CHECK(again.restart_nlls == fit.restart_nlls);
}

TEST_CASE("random initial partitions have between 1 and ceil(sqrt N) clusters") {
  Rng rng(35);
  const Dataset data = oracle::random_blobs(50, 1, 2, 1.0, rng);
  for (int rep = 0; rep < 200; ++rep) {
    const Partition p = restart_initializer(data, rng);
    CHECK(p.num_clusters() >= 1);
    CHECK(p.num_clusters() <= 8);
    CHECK(p.is_canonical());
  }
}

TEST_CASE("leave-one-out scoring option records that score") {
  Rng rng(36);
  const Dataset data = oracle::random_blobs(60, 2, 3, 8.0, rng);
  MapDpConfig c = config_for(NGPrior{{0.0, 0.0}, 0.1, {5.0, 5.0}, 1.0}, 1.0);
  c.score = NllScore::leave_one_out;
  const FitResult fit = fit_mapdp(data, c);
  CHECK(fit.final_nll == doctest::Approx(complete_data_nll(data, fit.partition, c.prior, c.alpha)));
}

TEST_CASE("well separated blobs are recovered") {
  Rng rng(37);
  Dataset data{Matrix(90, 2), std::vector<int>(90), {}};
  const double centers[3][2] = {{0.0, 0.0}, {30.0, 0.0}, {0.0, 30.0}};
  for (std::size_t i = 0; i < 90; ++i) {
    (*data.labels)[i] = static_cast<int>(i % 3);
    for (std::size_t d = 0; d < 2; ++d) data.x(i, d) = rng.normal(centers[i % 3][d], 1.0);
  }
  MapDpConfig c = config_for(NGPrior{{10.0, 10.0}, 0.01, {1.0, 1.0}, 1.0}, 1.0);
  c.restarts = 10;
  const FitResult fit = fit_mapdp(data, c);
  CHECK(nmi(*data.labels, fit.partition.z) == doctest::Approx(1.0));
}

TEST_CASE("configuration errors") {
  const Dataset data{Matrix(2, 1, {0.0, 1.0}), std::nullopt, {}};
  MapDpConfig c = config_for(NGPrior{{0.0}, 1.0, {1.0}, 1.0}, 1.0);
  c.alpha = 0.0;
  CHECK_THROWS_AS(fit_mapdp(data, c), InputError);
  c.alpha = 1.0;
  c.prior.m0 = {0.0, 0.0};
  c.prior.b0 = {1.0, 1.0};
  CHECK_THROWS_AS(fit_mapdp(data, c), InputError);
}
