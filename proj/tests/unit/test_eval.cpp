#include <doctest.h>

#include <cmath>
#include <numeric>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "crpmap/eval.hpp"
#include "crpmap/predictive.hpp"
#include "oracles.hpp"

using namespace crpmap;

TEST_CASE("information measures against reference values") {
  // Values from an independent machine-learning library (natural logarithms).
  const std::vector<int> u{0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 3, 3};
  const std::vector<int> v{0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2, 0};
  CHECK(nmi(u, v, NmiVariant::sum) == doctest::Approx(0.43792650250286175).epsilon(1e-12));
  CHECK(nmi(u, v, NmiVariant::max) == doctest::Approx(0.39926606757737293).epsilon(1e-12));
  CHECK(ami(u, v) == doctest::Approx(0.1803218758765606).epsilon(1e-10));

  const std::vector<int> a{0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<int> b{0, 0, 1, 1, 1, 2, 2, 2, 0, 0};
  CHECK(mutual_information(a, b) == doctest::Approx(0.42973260214435793).epsilon(1e-12));
  CHECK(nmi(a, b) == doctest::Approx(0.3946483716358942).epsilon(1e-12));
  CHECK(ami(a, b) == doctest::Approx(0.17152423540072848).epsilon(1e-10));
}

TEST_CASE("measures agree with the contingency-table definitions") {
  Rng rng(61);
  for (int rep = 0; rep < 30; ++rep) {
    const auto n = 2 + rng.below(60);
    std::vector<int> u(n), v(n);
    const auto ku = 1 + rng.below(6), kv = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = static_cast<int>(rng.below(ku));
      v[i] = static_cast<int>(rng.below(kv));
    }
    CHECK(entropy(u) == doctest::Approx(oracle::entropy(u)).epsilon(1e-12).scale(1.0));
    CHECK(mutual_information(u, v) == doctest::Approx(oracle::mutual_information(u, v)).epsilon(1e-12).scale(1.0));
    if (oracle::entropy(u) > 0 && oracle::entropy(v) > 0) {
      CHECK(nmi(u, v) == doctest::Approx(oracle::nmi_sum(u, v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("identity, relabeling and symmetry") {
  Rng rng(62);
  std::vector<int> u(50), perm{3, 0, 2, 1}, w(50), v(50);
  for (std::size_t i = 0; i < 50; ++i) {
    u[i] = static_cast<int>(rng.below(4));
    w[i] = perm[static_cast<std::size_t>(u[i])] + 10;
    v[i] = static_cast<int>(rng.below(3));
  }
  CHECK(nmi(u, w) == doctest::Approx(1.0));
  CHECK(nmi(u, w, NmiVariant::max) == doctest::Approx(1.0));
  CHECK(ami(u, w) == doctest::Approx(1.0));
  CHECK(nmi(u, v) == doctest::Approx(nmi(v, u)));
  CHECK(ami(u, v) == doctest::Approx(ami(v, u)));
  CHECK(ami(u, v) <= nmi(u, v, NmiVariant::max) + 1e-12);
}

TEST_CASE("independent labelings score zero") {
  // Every row block meets every column block equally often.
  std::vector<int> u, v;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 4; ++b)
      for (int r = 0; r < 2; ++r) u.push_back(a), v.push_back(b);
  CHECK(mutual_information(u, v) == doctest::Approx(0.0).scale(1.0));
  CHECK(nmi(u, v) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("degenerate labelings") {
  const std::vector<int> one(5, 0), two{0, 0, 1, 1, 1};
  CHECK(nmi(one, one) == 1.0);
  CHECK(ami(one, one) == 1.0);
  CHECK(nmi(one, two) == 0.0);
  CHECK(nmi(two, one, NmiVariant::max) == 0.0);
  CHECK_THROWS_AS(nmi(one, std::vector<int>{0, 0}), InputError);
  CHECK_THROWS_AS(nmi(std::vector<int>{}, std::vector<int>{}), InputError);
}

TEST_CASE("chance-level AMI is near zero on average") {
  Rng rng(63);
  double total = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<int> u(100), v(100);
    for (int i = 0; i < 100; ++i) {
      u[i] = static_cast<int>(rng.below(5));
      v[i] = static_cast<int>(rng.below(7));
    }
    total += ami(u, v);
  }
  CHECK(std::abs(total / 200.0) < 0.005);
}

TEST_CASE("expected mutual information by exhaustive averaging over permutations") {
  // Small margins: average I over all distinct arrangements of v relative to u.
  std::vector<int> u{0, 0, 1, 1, 2, 2, 2};
  std::vector<int> v{0, 0, 0, 1, 1, 2, 2};
  std::vector<int> vp = v;
  std::sort(vp.begin(), vp.end());
  double total = 0.0, count = 0.0;
  do {
    total += oracle::mutual_information(u, vp);
    count += 1.0;
  } while (std::next_permutation(vp.begin(), vp.end()));
  const std::vector<std::size_t> rows{2, 2, 3}, cols{3, 2, 2};
  CHECK(expected_mutual_information(rows, cols) == doctest::Approx(total / count).epsilon(1e-12));
}

TEST_CASE("mixture weights and predictions") {
  const NGPrior prior{{0.0}, 1.0, {1.0}, 2.0};
  SufficientStats a(1), b(1);
  for (int i = 0; i < 2; ++i) a.add(std::vector<double>{-3.0});
  b.add(std::vector<double>{3.0});
  const FittedModel model{prior, 1.0, {a, b}};
  const auto w = mixture_weights(model);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.25));

  CHECK(predict_modal(std::vector<double>{-3.0}, model).cluster == 0);
  CHECK(predict_modal(std::vector<double>{3.0}, model).cluster == 1);

  const FittedModel empty{prior, 2.0, {}};
  CHECK(mixture_weights(empty) == std::vector<double>{1.0});
  CHECK(predict_modal(std::vector<double>{0.1}, empty).cluster == 0);
  CHECK(predict_marginal(std::vector<double>{0.1}, empty) ==
        doctest::Approx(log_marginal(std::vector<double>{0.1}, prior)));
  CHECK_THROWS_AS(predict_marginal(std::vector<double>{0.1, 0.2}, model), InputError);
}

TEST_CASE("one-dimensional predictive integrates to one") {
  const NGPrior prior{{0.5}, 0.2, {2.0}, 1.5};
  SufficientStats a(1), b(1);
  for (double x : {-2.0, -1.5, -2.4}) a.add(std::vector<double>{x});
  for (double x : {4.0, 4.2}) b.add(std::vector<double>{x});
  const FittedModel model{prior, 0.8, {a, b}};
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double mass = integrator.integrate(
      [&](double t) {
        // x = t / (1 - t^2) maps (-1, 1) onto the real line.
        const double x = t / (1.0 - t * t);
        const double jac = (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t));
        return std::exp(predict_marginal(std::vector<double>{x}, model)) * jac;
      },
      -1.0, 1.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("leave-one-out NLL") {
  const NGPrior prior{{0.0}, 1.0, {1.0}, 1.0};
  const Dataset single{Matrix(1, 1, {0.7}), std::nullopt, {}};
  // N = 1: the model without the point is empty, so only the new-cluster term remains.
  CHECK(loo_nll(single, Partition::single_cluster(1), prior, 2.0) ==
        doctest::Approx(-log_marginal(std::vector<double>{0.7}, prior)));

  Rng rng(64);
  const Dataset data = oracle::random_blobs(40, 2, 3, 5.0, rng);
  const NGPrior p2{{0.0, 0.0}, 0.5, {2.0, 2.0}, 1.0};
  const Partition part = Partition::from_labels(*data.labels);
  std::vector<int> relabeled = part.z;
  for (int& z : relabeled) z = 7 - z;
  const Partition other = Partition::from_labels(relabeled);
  CHECK(loo_nll(data, part, p2, 1.0) == doctest::Approx(loo_nll(data, other, p2, 1.0)).epsilon(1e-12));

  // Direct: remove each point, rebuild the model from the remaining points, score it.
  double direct = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    FittedModel m{p2, 1.0, {}};
    const auto stats = cluster_stats(data, part);
    m.clusters = stats;
    m.clusters[static_cast<std::size_t>(part.z[i])].remove(data.point(i));
    std::vector<SufficientStats> kept;
    for (const auto& s : m.clusters)
      if (s.count > 0) kept.push_back(s);
    m.clusters = kept;
    direct -= predict_marginal(data.point(i), m);
  }
  CHECK(loo_nll(data, part, p2, 1.0) == doctest::Approx(direct / 40.0).epsilon(1e-12));
}

TEST_CASE("report bundles the measures") {
  const std::vector<int> t{0, 0, 1, 1, 2}, e{0, 0, 1, 1, 1};
  const MetricReport r = compare_labelings(t, e);
  CHECK(r.n_clusters_true == 3);
  CHECK(r.n_clusters_est == 2);
  CHECK(r.delta_k == -1);
  CHECK(r.nmi_sum == doctest::Approx(nmi(t, e)));
}
