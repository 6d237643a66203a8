#include <doctest.h>

#include <cmath>
#include <map>

#include "crpmap/crp.hpp"
#include "crpmap/numeric.hpp"
#include "oracles.hpp"

using namespace crpmap;

TEST_CASE("set partition enumeration gives the Bell numbers") {
  const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 1; n <= 8; ++n) CHECK(oracle::set_partitions(n).size() == bell[n]);
}

TEST_CASE("partition probabilities sum to one and match sequential seating") {
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (std::size_t n = 1; n <= 6; ++n) {
      double total = 0.0;
      for (const auto& z : oracle::set_partitions(n)) {
        const double lp = crp_log_joint(Partition::from_labels(z), alpha);
        CHECK(lp == doctest::Approx(oracle::crp_log_chain(z, alpha)).epsilon(1e-12));
        total += std::exp(lp);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("joint of a hand-worked partition") {
  // {0,1},{2}: a^2 Gamma(a) Gamma(2) Gamma(1) / Gamma(a + 3) with a = 2 gives 4 / (2*3*4) = 1/6.
  const std::vector<std::size_t> counts{2, 1};
  CHECK(std::exp(crp_log_joint(counts, 2.0)) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("seating conditional") {
  const std::vector<std::size_t> counts{3, 1};
  const auto p = crp_conditional(counts, 4, 2.0);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(1.0 / 6.0));
  CHECK(p[2] == doctest::Approx(1.0 / 3.0));
  const auto first = crp_conditional({}, 0, 0.7);
  REQUIRE(first.size() == 1);
  CHECK(first[0] == doctest::Approx(1.0));
}

TEST_CASE("sampled partitions follow the CRP law") {
  Rng rng(9);
  const CrpConfig config{1.5, 4};
  std::map<std::vector<int>, double> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) freq[sample_partition(config, rng).z] += 1.0 / draws;
  double tv = 0.0;
  for (const auto& z : oracle::set_partitions(4)) {
    tv += 0.5 * std::abs(freq[z] - std::exp(crp_log_joint(Partition::from_labels(z), 1.5)));
  }
  CHECK(tv < 0.01);
}

TEST_CASE("generated datasets") {
  GeneratorConfig config{{3.0, 200}, NGPrior{{1.0, 1.0}, 0.1, {10.0, 10.0}, 1.0}, 2, 5};
  const GeneratedData a = generate_dataset(config);
  const GeneratedData b = generate_dataset(config);
  CHECK(a.data.size() == 200);
  CHECK(a.data.dim() == 2);
  CHECK(a.data.x == b.data.x);
  CHECK(a.truth.is_canonical());
  CHECK_NOTHROW(a.truth.check());
  CHECK(*a.data.labels == a.truth.z);
  CHECK(a.components.size() == a.truth.num_clusters());
  config.seed = 6;
  CHECK_FALSE(generate_dataset(config).data.x == a.data.x);
}

TEST_CASE("component precision uses b0 as a rate") {
  Rng rng(12);
  const NGPrior prior{{0.0}, 0.5, {4.0}, 3.0};
  double tau = 0.0, mu2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ComponentParams c = draw_component(prior, rng);
    tau += c.precision[0];
    mu2 += c.mean[0] * c.mean[0];
  }
  CHECK(tau / n == doctest::Approx(0.75).epsilon(0.02));
  // Marginally mu is Student-t with variance b0 / (c0 (a0 - 1)) = 4.
  CHECK(mu2 / n == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("CRP continuation seats new customers in the training id space") {
  GeneratorConfig config{{3.0, 100}, NGPrior{{1.0, 1.0}, 0.1, {10.0, 10.0}, 1.0}, 2, 1};
  const GeneratedData train = generate_dataset(config);
  Rng rng(2);
  const GeneratedData test = continue_crp(train, 3.0, 300, config.prior, rng);
  CHECK(test.data.size() == 300);
  CHECK(test.components.size() >= train.components.size());
  std::size_t reused = 0;
  for (int l : *test.data.labels) {
    CHECK(l >= 0);
    CHECK(static_cast<std::size_t>(l) < test.components.size());
    reused += static_cast<std::size_t>(l) < train.components.size();
  }
  // New tables take roughly alpha / (alpha + n) of customers.
  CHECK(reused > 250);
}
