#include <doctest.h>

#include <cmath>
#include <vector>

#include "crpmap/rng.hpp"

using namespace crpmap;

TEST_CASE("engine is the standard 64-bit Mersenne Twister") {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next_u64();
  CHECK(rng.next_u64() == 9981545732273789042ULL);
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  const Rng root(42);
  Rng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(s1.next_u64() != s2.next_u64());
  CHECK(Rng::derive_seed(42, 1) != Rng::derive_seed(43, 1));
}

TEST_CASE("uniform variates stay in range") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const auto k = rng.below(7);
    CHECK(k < 7);
  }
}

TEST_CASE("bounded integers are uniform") {
  Rng rng(2);
  std::vector<int> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[rng.below(5)];
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - n / 5.0) * (h - n / 5.0) / (n / 5.0);
  CHECK(chi2 < 20.0);  // 4 dof, p < 0.001
}

TEST_CASE("normal and gamma moments") {
  Rng rng(3);
  const int n = 200000;
  double s = 0, ss = 0, g = 0, gg = 0, h = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(2.0, 3.0);
    s += z;
    ss += z * z;
    const double t = rng.gamma(2.5, 4.0);  // mean 0.625, variance 0.15625
    g += t;
    gg += t * t;
    h += rng.gamma(0.3, 1.0);  // shape below one takes the boosting path
  }
  const double mean = s / n;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
  CHECK(ss / n - mean * mean == doctest::Approx(9.0).epsilon(0.02));
  const double gmean = g / n;
  CHECK(gmean == doctest::Approx(0.625).epsilon(0.01));
  CHECK(gg / n - gmean * gmean == doctest::Approx(0.15625).epsilon(0.03));
  CHECK(h / n == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("categorical draws follow the weights") {
  Rng rng(4);
  const std::vector<double> w{1.0, 0.0, 3.0, 6.0};
  std::vector<double> logw;
  for (double v : w) logw.push_back(std::log(v) + 1000.0);  // large offsets must not overflow
  std::vector<int> a(4, 0), b(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    ++a[rng.categorical(w)];
    ++b[rng.categorical_log(logw)];
  }
  CHECK(a[1] == 0);
  CHECK(b[1] == 0);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a[k] / double(n) == doctest::Approx(w[k] / 10.0).epsilon(0.03));
    CHECK(b[k] / double(n) == doctest::Approx(w[k] / 10.0).epsilon(0.03));
  }
}
