#include "treerecon/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "treerecon/error.hpp"

namespace treerecon {

namespace {

void check_entries(const std::vector<double>& p) {
  if (p.size() < 2) {
    throw Error(ErrorCode::BadDimension, "belief needs at least 2 states");
  }
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorCode::BadInput, "belief entries must be finite and >= 0");
    }
  }
}

}  // namespace

Belief::Belief(std::vector<double> entries) : p_(std::move(entries)) {
  check_entries(p_);
  const double total = std::accumulate(p_.begin(), p_.end(), 0.0);
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "belief entries sum to " << total;
    throw Error(ErrorCode::BadInput, os.str());
  }
}

Belief Belief::normalized(std::vector<double> weights) {
  check_entries(weights);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::BadInput, "cannot normalize zero or infinite weights");
  }
  for (double& x : weights) x /= total;
  return Belief(std::move(weights), Unchecked{});
}

Belief Belief::uniform(std::size_t q) {
  if (q < 2) throw Error(ErrorCode::BadDimension, "belief needs at least 2 states");
  return Belief(std::vector<double>(q, 1.0 / static_cast<double>(q)), Unchecked{});
}

Belief Belief::point_mass(std::size_t q, std::size_t state) {
  if (q < 2) throw Error(ErrorCode::BadDimension, "belief needs at least 2 states");
  if (state >= q) throw Error(ErrorCode::BadInput, "state out of range");
  std::vector<double> p(q, 0.0);
  p[state] = 1.0;
  return Belief(std::move(p), Unchecked{});
}

double Belief::min_entry() const { return *std::min_element(p_.begin(), p_.end()); }

double Belief::distance_inf(const Belief& other) const {
  if (other.size() != size()) {
    throw Error(ErrorCode::BadDimension, "belief sizes differ");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) d = std::max(d, std::abs(p_[i] - other.p_[i]));
  return d;
}

}  // namespace treerecon
