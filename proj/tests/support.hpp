#pragma once

// Shared generators for the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "treerecon/channel.hpp"
#include "treerecon/rng.hpp"

namespace treerecon::testing {

inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t q,
                                                double floor = 0.0) {
  std::vector<double> p(q);
  double total = 0.0;
  for (double& x : p) {
    x = standard_exponential(rng);
    total += x;
  }
  for (double& x : p) x = (1.0 - floor * static_cast<double>(q)) * x / total + floor;
  return p;
}

inline Channel random_channel(std::mt19937_64& rng, std::size_t q, double floor = 0.02) {
  Matrix m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < q; ++i) {
    const auto row = random_simplex_point(rng, q, floor);
    for (std::size_t j = 0; j < q; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return make_channel(m);
}

inline std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t q) {
  std::vector<std::size_t> pi(q);
  std::iota(pi.begin(), pi.end(), 0);
  for (std::size_t i = q; i-- > 1;) std::swap(pi[i], pi[rng() % (i + 1)]);
  return pi;
}

// Symmetric, doubly stochastic, strictly positive: a mixture of symmetrized
// permutation matrices plus a uniform floor. Reversible for the uniform law.
inline Matrix random_symmetric_doubly_stochastic(std::mt19937_64& rng, std::size_t q,
                                                 std::size_t terms = 3) {
  const auto n = static_cast<Eigen::Index>(q);
  Matrix m = Matrix::Constant(n, n, 0.1 / static_cast<double>(q));
  const auto w = random_simplex_point(rng, terms);
  for (std::size_t t = 0; t < terms; ++t) {
    const auto pi = random_permutation(rng, q);
    for (std::size_t i = 0; i < q; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pi[i])) += 0.45 * w[t];
      m(static_cast<Eigen::Index>(pi[i]), static_cast<Eigen::Index>(i)) += 0.45 * w[t];
    }
  }
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace treerecon::testing
