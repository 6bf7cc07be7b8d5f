#pragma once

#include <span>

#include "treerecon/belief.hpp"

namespace treerecon {

// S(p|q) = sum_i p(i) log(p(i)/q(i)), natural log, 0 log 0 = 0.
// +infinity when p(i) > 0 = q(i) for some i.
double relative_entropy(std::span<const double> p, std::span<const double> q);
double relative_entropy(const Belief& p, const Belief& q);

// L(p) = S(p|alpha) + S(alpha|p) = sum_i (p(i) - alpha(i)) log(p(i)/alpha(i)).
// +infinity iff the supports differ.
double symmetrized_entropy(std::span<const double> p, std::span<const double> alpha);
double symmetrized_entropy(const Belief& p, const Belief& alpha);

// Same quantity from the displacement d = p - alpha (alpha > 0), written as
// sum_i d(i) log1p(d(i)/alpha(i)). Stays accurate when p is close to alpha,
// where the direct form loses digits to cancellation.
double symmetrized_entropy_delta(std::span<const double> delta, std::span<const double> alpha);

}  // namespace treerecon
