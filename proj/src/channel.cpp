#include "treerecon/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "treerecon/error.hpp"

namespace treerecon {

namespace {

constexpr double kStationaryResidual = 1e-12;
constexpr int kPowerIterationBudget = 200000;

double stationary_residual(const std::vector<double>& a, const Matrix& m) {
  const auto am = propagate(a, m);
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(am[i] - a[i]));
  return r;
}

std::vector<double> power_step(const std::vector<double>& a, const Matrix& m) {
  auto next = propagate(a, m);
  double total = 0.0;
  for (double x : next) total += x;
  for (double& x : next) x /= total;
  return next;
}

}  // namespace

std::vector<double> propagate(std::span<const double> p, const Matrix& m) {
  const auto q = static_cast<std::size_t>(m.rows());
  std::vector<double> out(q, 0.0);
  for (std::size_t k = 0; k < q; ++k) {
    const double pk = p[k];
    for (std::size_t i = 0; i < q; ++i) {
      out[i] += pk * m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

Belief stationary_distribution(const Matrix& matrix) {
  const Eigen::Index q = matrix.rows();
  if (q < 2 || matrix.cols() != q) {
    throw Error(ErrorCode::BadDimension, "stationary distribution needs a square matrix with q >= 2");
  }

  // Doubly stochastic kernels: keep the exactly uniform vector.
  std::vector<double> uniform(static_cast<std::size_t>(q), 1.0 / static_cast<double>(q));
  if (stationary_residual(uniform, matrix) <= 1e-15) return Belief::uniform(uniform.size());

  Matrix a = matrix.transpose() - Matrix::Identity(q, q);
  a.row(q - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
  rhs(q - 1) = 1.0;

  std::vector<double> alpha;
  Eigen::FullPivLU<Matrix> lu(a);
  if (lu.isInvertible()) {
    const Eigen::VectorXd x = lu.solve(rhs);
    alpha.assign(x.data(), x.data() + q);
    bool ok = true;
    for (double v : alpha) ok = ok && std::isfinite(v) && v > 0.0;
    if (ok) {
      double total = 0.0;
      for (double v : alpha) total += v;
      for (double& v : alpha) v /= total;
      // Two power steps absorb the rounding of the solve.
      alpha = power_step(power_step(alpha, matrix), matrix);
    } else {
      alpha.clear();
    }
  }

  if (alpha.empty() || stationary_residual(alpha, matrix) > kStationaryResidual) {
    alpha.assign(static_cast<std::size_t>(q), 1.0 / static_cast<double>(q));
    int it = 0;
    for (; it < kPowerIterationBudget; ++it) {
      alpha = power_step(alpha, matrix);
      if (stationary_residual(alpha, matrix) <= kStationaryResidual) break;
    }
    if (it == kPowerIterationBudget) {
      throw Error(ErrorCode::NoConvergence, "stationary distribution did not reach residual 1e-12");
    }
  }
  return Belief::normalized(std::move(alpha));
}

Channel make_channel(const Matrix& matrix) {
  const Eigen::Index q = matrix.rows();
  if (q < 2 || matrix.cols() != q) {
    throw Error(ErrorCode::BadDimension,
                "channel matrix must be square with q >= 2, got " + std::to_string(matrix.rows()) +
                    "x" + std::to_string(matrix.cols()));
  }
  Matrix m = matrix;
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      if (!(m(i, j) > 0.0) || !std::isfinite(m(i, j))) {
        throw Error(ErrorCode::NonPositiveEntry,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be > 0");
      }
    }
    const double s = m.row(i).sum();
    if (std::abs(s - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::NotStochastic,
                  "row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
    m.row(i) /= s;
  }

  Belief alpha = stationary_distribution(m);
  Matrix rev(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      rev(i, j) = alpha[static_cast<std::size_t>(j)] * m(j, i) / alpha[static_cast<std::size_t>(i)];
    }
  }
  return Channel(std::move(m), std::move(alpha), std::move(rev));
}

Channel make_channel(const std::vector<std::vector<double>>& rows) {
  const auto q = static_cast<Eigen::Index>(rows.size());
  Matrix m(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != q) {
      throw Error(ErrorCode::BadDimension, "channel matrix must be square");
    }
    for (Eigen::Index j = 0; j < q; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return make_channel(m);
}

Matrix reverse(const Channel& channel) { return channel.reversed(); }

double second_eigenvalue(const Channel& channel) {
  Eigen::EigenSolver<Matrix> solver(channel.matrix(), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eigenvalue iteration failed");
  }
  std::vector<double> moduli;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    moduli.push_back(std::abs(solver.eigenvalues()(i)));
  }
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return moduli[1];
}

Channel potts_channel(std::size_t q, double beta) {
  if (q < 2) throw Error(ErrorCode::BadDimension, "Potts channel needs q >= 2");
  if (!std::isfinite(beta)) throw Error(ErrorCode::BadInput, "beta must be finite");
  const double e = std::exp(2.0 * beta);
  const double z = e + static_cast<double>(q) - 1.0;
  const auto n = static_cast<Eigen::Index>(q);
  Matrix m = Matrix::Constant(n, n, 1.0 / z);
  m.diagonal().setConstant(e / z);
  return make_channel(m);
}

Channel binary_channel(double delta1, double delta2) {
  Matrix m(2, 2);
  m << 1.0 - delta1, delta1, 1.0 - delta2, delta2;
  return make_channel(m);
}

Channel permute_channel(const Channel& channel, const std::vector<std::size_t>& pi) {
  const std::size_t q = channel.q();
  if (pi.size() != q) throw Error(ErrorCode::BadPermutation, "permutation has wrong length");
  std::vector<std::size_t> inverse(q, q);
  for (std::size_t j = 0; j < q; ++j) {
    if (pi[j] >= q || inverse[pi[j]] != q) {
      throw Error(ErrorCode::BadPermutation, "not a bijection on the state space");
    }
    inverse[pi[j]] = j;
  }
  const auto n = static_cast<Eigen::Index>(q);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = channel.matrix()(i, static_cast<Eigen::Index>(inverse[static_cast<std::size_t>(j)]));
    }
  }
  return make_channel(m);
}

Channel channel_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::BadInput, "channel JSON must be an object");
    if (j.contains("family")) {
      const auto family = j.at("family").get<std::string>();
      if (family == "potts") {
        const int q = j.at("q").get<int>();
        if (q < 2) throw Error(ErrorCode::BadDimension, "Potts channel needs q >= 2");
        return potts_channel(static_cast<std::size_t>(q), j.at("beta").get<double>());
      }
      if (family == "binary") {
        return binary_channel(j.at("delta1").get<double>(), j.at("delta2").get<double>());
      }
      throw Error(ErrorCode::BadInput, "unknown channel family '" + family + "'");
    }
    auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    if (j.contains("q") && j.at("q").get<std::size_t>() != rows.size()) {
      throw Error(ErrorCode::BadDimension, "'q' disagrees with the matrix size");
    }
    return make_channel(rows);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("malformed channel JSON: ") + e.what());
  }
}

nlohmann::json channel_to_json(const Channel& channel) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < channel.q(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < channel.q(); ++k) row.push_back(channel(i, k));
    rows.push_back(std::move(row));
  }
  return {{"q", channel.q()}, {"matrix", std::move(rows)}};
}

}  // namespace treerecon
