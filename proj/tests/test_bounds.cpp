#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "treerecon/bounds.hpp"
#include "treerecon/error.hpp"

using namespace treerecon;

namespace {

const std::vector<double> kDelta2 = {0.1, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

bool consistent(const Verdicts& v) {
  const bool nonrec = v.fk == Verdict::NonReconstruction ||
                      v.mp.value_or(Verdict::Inconclusive) == Verdict::NonReconstruction ||
                      v.martin.value_or(Verdict::Inconclusive) == Verdict::NonReconstruction;
  return !(nonrec && v.ks == Verdict::Reconstruction);
}

}  // namespace

TEST_CASE("fk_criterion") {
  const auto ising = fk_criterion(potts_channel(2, 0.5), 2.0);
  CHECK(ising.verdict == Verdict::NonReconstruction);
  CHECK(ising.margin == doctest::Approx(1 - 2 * std::pow(std::tanh(0.5), 2)).epsilon(1e-6));

  CHECK(fk_criterion(binary_channel(0.3, 0.1), 17).verdict == Verdict::NonReconstruction);
  CHECK(fk_criterion(binary_channel(0.3, 0.1), 18).verdict == Verdict::Inconclusive);

  try {
    fk_criterion(binary_channel(0.3, 0.1), 0.5);
    FAIL("expected BadInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadInput);
  }
}

TEST_CASE("ks_constant") {
  CHECK(ks_constant(binary_channel(0.3, 0.1)) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(ks_constant(binary_channel(0.3, 0.7)) == doctest::Approx(0.16).epsilon(1e-12));
  CHECK(ks_constant(binary_channel(0.4, 0.4)) <= 1e-20);
  CHECK(ks_criterion(binary_channel(0.3, 0.1), 26).verdict == Verdict::Reconstruction);
  CHECK(ks_criterion(binary_channel(0.3, 0.1), 25).verdict == Verdict::Inconclusive);
}

TEST_CASE("mp_constant and martin_constant") {
  CHECK(mp_constant(0.3, 0.1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(mp_constant(0.3, 0.9) == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(mp_constant(0.3, 0.3) == 0.0);
  CHECK(std::round(martin_constant(0.3, 0.1) * 1000) / 1000 == doctest::Approx(0.065));
  CHECK(std::round(martin_constant(0.3, 0.5) * 10000) / 10000 == doctest::Approx(0.0417));
  CHECK(martin_constant(0.25, 0.25) == 0.0);
  CHECK_THROWS_AS(mp_constant(0.0, 0.5), Error);
  CHECK_THROWS_AS(martin_constant(0.3, 1.0), Error);
}

TEST_CASE("bound_report: MP and Martin only for q = 2") {
  const auto binary = bound_report(binary_channel(0.3, 0.1), 17);
  CHECK(binary.mp.has_value());
  CHECK(binary.martin.has_value());
  CHECK(binary.verdicts.fk == Verdict::NonReconstruction);

  const auto potts = bound_report(potts_channel(3, 0.5), 2);
  CHECK_FALSE(potts.mp.has_value());
  CHECK_FALSE(potts.martin.has_value());
  CHECK_FALSE(potts.verdicts.mp.has_value());
}

TEST_CASE("table1 ordering KS <= FK <= Martin <= MP for d1 = 0.3") {
  const auto rows = table1(0.3, kDelta2);
  REQUIRE(rows.size() == kDelta2.size());
  for (const auto& r : rows) {
    CHECK(r.ks <= r.fk + 1e-6);
    CHECK(r.fk <= *r.martin + 1e-6);
    CHECK(*r.martin <= *r.mp + 1e-6);
  }
}

TEST_CASE("symmetric collapse when d1 + d2 = 1") {
  for (double d1 : {0.1, 0.25, 0.3, 0.45}) {
    const double d2 = 1 - d1;
    const auto r = bound_report(binary_channel(d1, d2), 1);
    const double expected = (d2 - d1) * (d2 - d1);
    CHECK(std::abs(r.fk - expected) <= 1e-6);
    CHECK(std::abs(r.ks - expected) <= 1e-6);
    CHECK(std::abs(*r.martin - expected) <= 1e-6);
    CHECK(std::abs(*r.mp - expected) <= 1e-6);
  }
}

TEST_CASE("constants are invariant under global relabelling (d1, d2) -> (1 - d2, 1 - d1)") {
  // Swapping the two state labels maps [[1-a, a], [1-b, b]] to
  // [[b, 1-b], [a, 1-a]], i.e. (d1, d2) -> (1 - b, 1 - a).
  for (auto [d1, d2] : {std::pair{0.3, 0.1}, {0.3, 0.9}, {0.15, 0.4}}) {
    const auto a = bound_report(binary_channel(d1, d2), 1);
    const auto b = bound_report(binary_channel(1 - d2, 1 - d1), 1);
    CHECK(std::abs(a.fk - b.fk) <= 1e-6);
    CHECK(std::abs(a.ks - b.ks) <= 1e-6);
    CHECK(std::abs(*a.mp - *b.mp) <= 1e-6);
    CHECK(std::abs(*a.martin - *b.martin) <= 1e-6);
  }
}

TEST_CASE("constants are invariant under (d1, d2) -> (1 - d1, 1 - d2)") {
  for (auto [d1, d2] : {std::pair{0.3, 0.1}, {0.3, 0.9}, {0.15, 0.4}, {0.05, 0.6}}) {
    const auto a = bound_report(binary_channel(d1, d2), 1);
    const auto b = bound_report(binary_channel(1 - d1, 1 - d2), 1);
    CHECK(std::abs(a.fk - b.fk) <= 1e-6);
    CHECK(std::abs(a.ks - b.ks) <= 1e-6);
    CHECK(std::abs(*a.mp - *b.mp) <= 1e-6);
    CHECK(std::abs(*a.martin - *b.martin) <= 1e-6);
  }
}

TEST_CASE("verdicts never contradict each other") {
  std::mt19937_64 rng(91);
  for (int t = 0; t < 40; ++t) {
    const double d1 = 0.02 + 0.96 * uniform01(rng);
    const double d2 = 0.02 + 0.96 * uniform01(rng);
    const auto ch = binary_channel(d1, d2);
    for (double d : {1.0, 2.0, 5.0, 20.0, 100.0}) CHECK(consistent(bound_report(ch, d).verdicts));
  }
  for (int t = 0; t < 6; ++t) {
    const auto ch = testing::random_channel(rng, 3, 0.02);
    for (double d : {1.0, 3.0, 10.0}) CHECK(consistent(bound_report(ch, d).verdicts));
  }
}

TEST_CASE("verdict strings round-trip") {
  for (auto v : {Verdict::NonReconstruction, Verdict::Reconstruction, Verdict::Inconclusive}) {
    CHECK(verdict_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(verdict_from_string("maybe"), Error);
}
