#include <doctest.h>

#include <random>
#include <vector>

#include "sigverify/dispersion.hpp"
#include "sigverify/errors.hpp"
#include "support/oracles.hpp"

using sigverify::mom_dispersion;

TEST_CASE("MoM hand cases") {
  CHECK(mom_dispersion(std::vector<double>{5, 5, 5, 5}) == 0.0);
  CHECK(mom_dispersion(std::vector<double>{0, 0, 10}) == 10.0);
  CHECK(mom_dispersion(std::vector<double>{0, 0, 10}, 1.1926) == doctest::Approx(11.926));
  CHECK(mom_dispersion(std::vector<double>{1, 4}) == 3.0);
  CHECK_THROWS_AS(mom_dispersion(std::vector<double>{1}), sigverify::DispersionError);
  CHECK_THROWS_AS(mom_dispersion(std::vector<double>{}), sigverify::DispersionError);
}

TEST_CASE("MoM matches the double-median oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 40);
  std::uniform_int_distribution<int> coarse(-5, 5);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(size(rng)));
    // Half the trials use small integers so ties are common.
    for (auto& v : x) v = trial % 2 ? normal(rng) : coarse(rng);
    CHECK(mom_dispersion(x) == oracle::mom(x));
  }
}

TEST_CASE("MoM translation invariance and scale equivariance") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(2 + trial % 11);
    for (auto& v : x) v = std::ldexp(std::round(u(rng) * 64), -6);  // dyadic: exact shifts
    const double t = std::ldexp(std::round(u(rng) * 16), -4);
    const double a = trial % 3 == 0 ? -2.0 : 4.0;
    std::vector<double> shifted = x, scaled = x;
    for (auto& v : shifted) v += t;
    for (auto& v : scaled) v *= a;
    CHECK(mom_dispersion(shifted) == mom_dispersion(x));
    CHECK(mom_dispersion(scaled) == std::abs(a) * mom_dispersion(x));
  }
}
