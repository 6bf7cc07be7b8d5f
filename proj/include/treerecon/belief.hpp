#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treerecon {

// A point of the probability simplex over q >= 2 states.
class Belief {
 public:
  static constexpr double kSumTolerance = 1e-12;

  // Validates nonnegativity, q >= 2 and |sum - 1| <= kSumTolerance.
  // Throws Error(BadDimension) or Error(BadInput).
  explicit Belief(std::vector<double> entries);

  // Validates nonnegativity and a positive finite total, then divides by it.
  static Belief normalized(std::vector<double> weights);
  static Belief uniform(std::size_t q);
  static Belief point_mass(std::size_t q, std::size_t state);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }
  const std::vector<double>& vector() const noexcept { return p_; }

  double min_entry() const;
  double distance_inf(const Belief& other) const;

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  struct Unchecked {};
  Belief(std::vector<double> entries, Unchecked) : p_(std::move(entries)) {}

  std::vector<double> p_;
};

}  // namespace treerecon
