#include "treerecon/entropy.hpp"

#include <cmath>
#include <limits>

#include "treerecon/error.hpp"

namespace treerecon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::BadDimension, "entropy arguments differ in length");
}

}  // namespace

double relative_entropy(std::span<const double> p, std::span<const double> q) {
  require_same_size(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    s += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative value when p == q.
  return s < 0.0 ? 0.0 : s;
}

double relative_entropy(const Belief& p, const Belief& q) {
  return relative_entropy(p.values(), q.values());
}

double symmetrized_entropy(std::span<const double> p, std::span<const double> alpha) {
  require_same_size(p.size(), alpha.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == alpha[i]) continue;
    if (p[i] == 0.0 || alpha[i] == 0.0) return kInf;
    const double d = p[i] - alpha[i];
    s += d * std::log1p(d / alpha[i]);
  }
  return s;
}

double symmetrized_entropy(const Belief& p, const Belief& alpha) {
  return symmetrized_entropy(p.values(), alpha.values());
}

double symmetrized_entropy_delta(std::span<const double> delta, std::span<const double> alpha) {
  require_same_size(delta.size(), alpha.size());
  double s = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double d = delta[i];
    if (d == 0.0) continue;
    const double x = d / alpha[i];
    if (x <= -1.0) return kInf;
    s += d * std::log1p(x);
  }
  return s;
}

}  // namespace treerecon
