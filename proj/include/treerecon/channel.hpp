#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include <nlohmann/json.hpp>

#include "treerecon/belief.hpp"

namespace treerecon {

using Matrix = Eigen::MatrixXd;

// A row-stochastic q x q transition matrix with strictly positive entries,
// together with its stationary distribution alpha and the time reversal
//   rev(i, j) = alpha(j) M(j, i) / alpha(i).
// Immutable once built; obtain one through make_channel or a family factory.
class Channel {
 public:
  std::size_t q() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  const Belief& stationary() const noexcept { return alpha_; }
  const Matrix& reversed() const noexcept { return rev_; }

  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  friend Channel make_channel(const Matrix& matrix);
  Channel(Matrix m, Belief alpha, Matrix rev)
      : m_(std::move(m)), alpha_(std::move(alpha)), rev_(std::move(rev)) {}

  Matrix m_;
  Belief alpha_;
  Matrix rev_;
};

// Tolerance on row sums of user supplied matrices; rows are renormalized
// exactly after passing the check.
inline constexpr double kRowSumTolerance = 1e-9;

// Errors: BadDimension (non-square, q < 2), NonPositiveEntry, NotStochastic.
Channel make_channel(const Matrix& matrix);
Channel make_channel(const std::vector<std::vector<double>>& rows);
inline Channel make_channel(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& r : rows) v.emplace_back(r);
  return make_channel(v);
}

// Unique alpha with alpha M = alpha. Direct solve of (M^T - I) alpha = 0 with
// the normalization row; power iteration if the solve is singular.
// Throws NoConvergence if the residual ||alpha M - alpha||_inf stays > 1e-12.
Belief stationary_distribution(const Matrix& matrix);

Matrix reverse(const Channel& channel);

// Modulus of the second largest (in modulus) eigenvalue of M.
double second_eigenvalue(const Channel& channel);

// Symmetric Potts kernel: e^{2 beta} on the diagonal, 1 elsewhere, rows
// normalized by e^{2 beta} + q - 1.
Channel potts_channel(std::size_t q, double beta);

// [[1 - d1, d1], [1 - d2, d2]], both parameters strictly inside (0, 1).
Channel binary_channel(double delta1, double delta2);

// M_pi(i, j) = M(i, pi^{-1}(j)) with pi given as images: pi[j] is where j goes.
Channel permute_channel(const Channel& channel,
                        const std::vector<std::size_t>& pi);

// p M for a row vector p.
std::vector<double> propagate(std::span<const double> p, const Matrix& m);

// {"q": n, "matrix": [[...]]} | {"family": "potts", "q": n, "beta": b}
// | {"family": "binary", "delta1": a, "delta2": b}
Channel channel_from_json(const nlohmann::json& j);
nlohmann::json channel_to_json(const Channel& channel);

}  // namespace treerecon
