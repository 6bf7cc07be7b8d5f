#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "support.hpp"
#include "treerecon/entropy.hpp"

using namespace treerecon;

TEST_CASE("relative_entropy") {
  const Belief a({0.2, 0.3, 0.5});
  CHECK(relative_entropy(a, a) == 0.0);
  CHECK(relative_entropy(Belief({1.0, 0.0}), Belief({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::isinf(relative_entropy(Belief({0.5, 0.5}), Belief({1.0, 0.0}))));
}

TEST_CASE("symmetrized_entropy") {
  const Belief half({0.5, 0.5});
  CHECK(symmetrized_entropy(half, half) == 0.0);
  CHECK(symmetrized_entropy(Belief({0.9, 0.1}), half) == doctest::Approx(0.4 * std::log(9.0)).epsilon(1e-14));
  CHECK(symmetrized_entropy(Belief({0.9, 0.1}), half) == doctest::Approx(0.878890).epsilon(1e-6));
  CHECK(std::isinf(symmetrized_entropy(Belief({1.0, 0.0}), half)));
}

TEST_CASE("symmetrized_entropy: nonnegative, zero only at alpha, equals S(p|a)+S(a|p)") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t q = 2 + rng() % 6;
    const Belief a = Belief::normalized(testing::random_simplex_point(rng, q, 1e-3));
    const Belief p = Belief::normalized(testing::random_simplex_point(rng, q, 1e-6));
    const double l = symmetrized_entropy(p, a);
    CHECK(l >= 0.0);
    if (p.distance_inf(a) > 1e-12) CHECK(l > 0.0);
    CHECK(std::abs(l - (relative_entropy(p, a) + relative_entropy(a, p))) <= 1e-12 * std::max(1.0, l));

    std::vector<double> delta(q);
    for (std::size_t i = 0; i < q; ++i) delta[i] = p[i] - a[i];
    CHECK(std::abs(symmetrized_entropy_delta(delta, a.values()) - l) <= 1e-12 * std::max(1.0, l));
  }
}

TEST_CASE("relative_entropy is convex in its first argument") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t q = 2 + rng() % 5;
    const Belief a = Belief::normalized(testing::random_simplex_point(rng, q, 1e-3));
    const auto p1 = testing::random_simplex_point(rng, q, 1e-4);
    const auto p2 = testing::random_simplex_point(rng, q, 1e-4);
    const double lam = uniform01(rng);
    std::vector<double> mix(q);
    for (std::size_t i = 0; i < q; ++i) mix[i] = lam * p1[i] + (1 - lam) * p2[i];
    CHECK(relative_entropy(mix, a.values()) <=
          lam * relative_entropy(p1, a.values()) + (1 - lam) * relative_entropy(p2, a.values()) + 1e-12);
  }
}

TEST_CASE("second-order behaviour near alpha") {
  // L(alpha + eps v) / eps^2 -> sum v_i^2 / alpha_i, with O(eps) error.
  std::mt19937_64 rng(23);
  for (int t = 0; t < 50; ++t) {
    const std::size_t q = 2 + rng() % 5;
    const auto a = testing::random_simplex_point(rng, q, 0.05);
    std::vector<double> v(q);
    double mean = 0.0;
    for (double& x : v) {
      x = standard_normal(rng);
      mean += x / static_cast<double>(q);
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      v[i] -= mean;
      quad += v[i] * v[i] / a[i];
    }
    for (double eps : {1e-3, 1e-4}) {
      std::vector<double> d(q);
      for (std::size_t i = 0; i < q; ++i) d[i] = eps * v[i];
      const double ratio = symmetrized_entropy_delta(d, a) / (eps * eps);
      CHECK(std::abs(ratio - quad) <= 200 * eps * quad);
    }
  }
}
