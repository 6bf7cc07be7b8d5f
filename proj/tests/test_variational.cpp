#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "treerecon/error.hpp"
#include "treerecon/variational.hpp"

using namespace treerecon;

namespace {

// Independent q = 2 route: the scalar form of the binary-channel constant,
//   (d2 - d1) log( ((1 - d2) + p (d2 - d1)) / (d2 - p (d2 - d1)) * d1 / (1 - d2) )
//   ------------------------------------------------------------------------------
//                     log( p / (1 - p) * d1 / (1 - d2) )
// maximized by brute force over a fine grid with local grid refinement.
double scalar_binary_sup(double d1, double d2) {
  const double a = d2 - d1;
  auto f = [&](double p) {
    const double den = std::log(p / (1 - p) * d1 / (1 - d2));
    if (std::abs(den) < 1e-9) return 0.0;
    return a * std::log(((1 - d2) + p * a) / (d2 - p * a) * d1 / (1 - d2)) / den;
  };
  const int n = 1'000'000;
  double best = 0.0;
  double best_p = 0.5;
  for (int k = 1; k < n; ++k) {
    const double p = static_cast<double>(k) / n;
    const double v = f(p);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  // Zoom: ten rounds of a 200-point grid around the incumbent.
  double half = 1.0 / n;
  for (int round = 0; round < 10; ++round) {
    const double center = best_p;
    for (int k = -100; k <= 100; ++k) {
      const double p = center + half * k / 100.0;
      if (p <= 0 || p >= 1) continue;
      const double v = f(p);
      if (v > best) {
        best = v;
        best_p = p;
      }
    }
    half /= 50.0;
  }
  // The stationary point p = alpha is a removable singularity of the scalar
  // form; its limit is the squared eigenvalue.
  return std::max(best, a * a);
}

Channel exact_binary(double d1, double d2) { return binary_channel(d1, d2); }

}  // namespace

TEST_CASE("ratio: centre singularity, boundary zero, bounded by tanh^2") {
  const auto ising = potts_channel(2, 1.0);
  try {
    ratio(ising.stationary(), ising);
    FAIL("expected CenterSingularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CenterSingularity);
  }
  CHECK(ratio(Belief({1.0, 0.0}), ising) == 0.0);
  CHECK(ratio(Belief({0.0, 1.0}), binary_channel(0.3, 0.1)) == 0.0);

  const double t2 = std::pow(std::tanh(1.0), 2);
  CHECK(ratio(Belief({0.9, 0.1}), ising) <= t2);
  CHECK(ratio(Belief({0.9, 0.1}), ising) > 0.0);
}

TEST_CASE("near_center_limit") {
  for (double beta : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(near_center_limit(potts_channel(2, beta)) ==
          doctest::Approx(std::pow(std::tanh(beta), 2)).epsilon(1e-12));
  }
  CHECK(near_center_limit(potts_channel(3, 0.0)) <= 1e-15);
  CHECK(near_center_limit(binary_channel(0.3, 0.7)) == doctest::Approx(0.16).epsilon(1e-12));
  // Asymmetric binary channels: still the squared eigenvalue.
  CHECK(near_center_limit(binary_channel(0.3, 0.1)) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("near_center_limit matches the ratio along shrinking displacements") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t q = 2 + rng() % 4;
    const auto ch = testing::random_channel(rng, q, 0.05);
    const double limit = near_center_limit(ch);
    // Random directions never beat the limit (up to O(eps)).
    for (int s = 0; s < 20; ++s) {
      std::vector<double> v(q);
      double mean = 0.0;
      for (double& x : v) mean += (x = standard_normal(rng)) / static_cast<double>(q);
      std::vector<double> p(q);
      for (std::size_t i = 0; i < q; ++i) p[i] = ch.stationary()[i] + 1e-5 * (v[i] - mean);
      CHECK(ratio(Belief::normalized(p), ch) <= limit + 1e-3);
    }
  }
}

TEST_CASE("compute_c: Ising closed form") {
  for (double beta : {0.1, 0.5, 1.0, 2.0}) {
    const auto r = compute_c(potts_channel(2, beta));
    CHECK(std::abs(r.value - std::pow(std::tanh(beta), 2)) <= 1e-6);
    CHECK(r.trace.grid_points >= 100000);
  }
  CHECK(std::abs(compute_c(potts_channel(2, 0.5)).value - 0.213552) <= 1e-6);
}

TEST_CASE("compute_c: binary channels against the scalar form") {
  for (double d2 : {0.1, 0.2, 0.4, 0.5, 0.6, 0.8, 0.9}) {
    const double expected = scalar_binary_sup(0.3, d2);
    const auto r = compute_c(exact_binary(0.3, d2));
    CHECK(std::abs(r.value - expected) <= 1e-6);
  }
  for (auto [d1, d2] : {std::pair{0.05, 0.6}, {0.8, 0.15}, {0.4, 0.45}}) {
    CHECK(std::abs(compute_c(exact_binary(d1, d2)).value - scalar_binary_sup(d1, d2)) <= 1e-6);
  }
}

TEST_CASE("compute_c: reported value dominates its argmax and the centre limit") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 12; ++t) {
    const std::size_t q = 2 + rng() % 3;
    const auto ch = testing::random_channel(rng, q, 0.05);
    OptimizerSettings s;
    s.seed = static_cast<std::uint64_t>(t);
    const auto r = compute_c(ch, s);
    CHECK(r.value >= r.trace.near_center_limit - 1e-12);
    CHECK(r.value >= 0.0);
    if (r.argmax.distance_inf(ch.stationary()) > kCenterTolerance) {
      CHECK(r.value >= ratio(r.argmax, ch) - 1e-9);
    }
    if (q >= 3) {
      CHECK(r.trace.starts == 64);
      CHECK(r.trace.converged_starts > 0);
    }
  }
}

TEST_CASE("compute_c: Potts q = 3 exceeds the squared eigenvalue") {
  const auto ch = potts_channel(3, 1.0);
  const auto r = compute_c(ch);
  const double e = std::exp(2.0);
  const double lam = (e - 1) / (e + 2);
  CHECK(r.value > lam * lam + 1e-3);
  CHECK_FALSE(r.trace.near_center_is_max);
  CHECK(r.value >= ratio(r.argmax, ch) - 1e-9);
}

TEST_CASE("compute_c: zero-information channel") {
  CHECK(compute_c(potts_channel(3, 0.0)).value <= 1e-15);
  CHECK(compute_c(potts_channel(2, 0.0)).value <= 1e-15);
}

TEST_CASE("compute_c: starts are independent of thread count") {
  const auto ch = potts_channel(4, 0.9);
  OptimizerSettings one;
  one.threads = 1;
  OptimizerSettings four = one;
  four.threads = 4;
  const auto a = compute_c(ch, one);
  const auto b = compute_c(ch, four);
  CHECK(a.value == b.value);
  CHECK(a.argmax == b.argmax);
  CHECK(a.trace.iterations == b.trace.iterations);
}

TEST_CASE("compute_c: NoConvergence when the budget is too small") {
  OptimizerSettings s;
  s.max_iters = 2;
  try {
    compute_c(potts_channel(3, 1.0), s);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("boundary decay") {
  std::mt19937_64 rng(51);
  int tested = 0;
  for (int t = 0; t < 40 && tested < 10; ++t) {
    const std::size_t q = 2 + rng() % 3;
    const auto ch = testing::random_channel(rng, q, 0.02);
    const auto c = compute_c(ch).value;
    if (c <= 0.01) continue;
    ++tested;
    auto p = testing::random_simplex_point(rng, q, 0.0);
    p[rng() % q] = 1e-9;
    CHECK(ratio(Belief::normalized(p), ch) < 0.5 * c);
  }
  CHECK(tested > 0);
}

TEST_CASE("potts_cbar") {
  SUBCASE("q = 2: c-bar equals tanh(beta)") {
    for (double beta : {0.2, 0.7, 1.5}) {
      CHECK(std::abs(potts_cbar(2, beta) - std::tanh(beta)) <= 1e-6);
    }
  }
  SUBCASE("beta = 0 gives zero constant") {
    CHECK(potts_cbar(3, 0.0) == 0.0);
    CHECK(compute_c(potts_channel(3, 0.0)).value <= 1e-15);
  }
  SUBCASE("q = 3, beta = 1: c = lambda * c-bar, computed independently") {
    const double e = std::exp(2.0);
    const double lam = (e - 1) / (e + 2);
    CHECK(std::abs(compute_c(potts_channel(3, 1.0)).value - lam * potts_cbar(3, 1.0)) <= 1e-6);
  }
  SUBCASE("pointwise ratio identity") {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 200; ++t) {
      const std::size_t q = 2 + rng() % 4;
      const double beta = 2.0 * uniform01(rng);
      const double e = std::exp(2 * beta);
      const double lam = (e - 1) / (e + static_cast<double>(q) - 1);
      const auto p = Belief::normalized(testing::random_simplex_point(rng, q, 1e-3));
      CHECK(std::abs(ratio(p, potts_channel(q, beta)) - lam * potts_cbar_ratio(p.values(), beta)) <= 1e-12);
    }
  }
}

TEST_CASE("permutation invariance for equidistribution-reversible kernels") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 6; ++t) {
    const std::size_t q = 3 + rng() % 2;
    const auto ch = make_channel(testing::random_symmetric_doubly_stochastic(rng, q));
    const double c = compute_c(ch).value;
    for (int s = 0; s < 3; ++s) {
      const auto pi = testing::random_permutation(rng, q);
      CHECK(std::abs(compute_c(permute_channel(ch, pi)).value - c) <= 1e-6);
    }
  }
}

TEST_CASE("convexity along mixtures with common alpha") {
  std::mt19937_64 rng(81);
  for (int t = 0; t < 6; ++t) {
    const std::size_t q = 3;
    const Matrix base = testing::random_symmetric_doubly_stochastic(rng, q);
    const auto m1 = make_channel(base);
    const auto m2 = permute_channel(m1, testing::random_permutation(rng, q));
    const double c1 = compute_c(m1).value;
    const double c2 = compute_c(m2).value;
    for (double lam : {0.25, 0.5, 0.8}) {
      const auto mix = make_channel(lam * m1.matrix() + (1 - lam) * m2.matrix());
      CHECK(compute_c(mix).value <= lam * c1 + (1 - lam) * c2 + 1e-5);
    }
  }
}
