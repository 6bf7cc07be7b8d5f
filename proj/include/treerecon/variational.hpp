#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "treerecon/belief.hpp"
#include "treerecon/channel.hpp"

namespace treerecon {

struct OptimizerSettings {
  int starts = 64;        // multi-start count for q >= 3
  int max_iters = 5000;   // per local search
  double tol = 1e-10;     // objective tolerance
  std::uint64_t seed = 0;
  unsigned threads = 0;   // 0 = hardware concurrency
};

struct MethodTrace {
  int starts = 0;              // local searches run (0 on the q = 2 grid path)
  int converged_starts = 0;
  long iterations = 0;         // summed over starts and the polishing pass
  std::size_t grid_points = 0; // q = 2 only
  double near_center_limit = 0.0;
  double best_interior = 0.0;  // best ratio seen away from the centre
  bool near_center_is_max = false;
};

struct VariationalResult {
  double value = 0.0;  // sup estimate
  Belief argmax;       // best point found away from the centre
  MethodTrace trace;
};

// Distance to alpha below which ratio() refuses to evaluate.
inline constexpr double kCenterTolerance = 1e-12;

// L(p M^rev) / L(p). Zero when p lies on the simplex boundary (L(p) infinite).
// Throws CenterSingularity when ||p - alpha||_inf <= kCenterTolerance.
double ratio(const Belief& p, const Channel& channel);

// sup over directions v (sum v = 0) of lim_{eps -> 0} ratio(alpha + eps v):
// the top generalized eigenvalue of v -> sum (v M^rev)_i^2 / alpha_i against
// v -> sum v_i^2 / alpha_i.
double near_center_limit(const Channel& channel);

// c(M) = sup_{p != alpha} ratio(p). q = 2 uses a dense grid of 2e5 points with
// golden-section refinement; q >= 3 uses multi-start Nelder-Mead over softmax
// coordinates. The near-centre limit is always merged in as a candidate.
VariationalResult compute_c(const Channel& channel, const OptimizerSettings& settings = {});

// The ratio whose supremum defines the Potts constant c-bar(beta, q):
//   sum (q p_i - 1) log(1 + (e^{2 beta} - 1) p_i) / sum (q p_i - 1) log(q p_i).
double potts_cbar_ratio(std::span<const double> p, double beta);

VariationalResult potts_cbar_result(std::size_t q, double beta,
                                    const OptimizerSettings& settings = {});
double potts_cbar(std::size_t q, double beta, const OptimizerSettings& settings = {});

namespace detail {

// Objective on the open simplex, evaluated as a function of the displacement
// delta = p - center. Must return 0 for boundary points.
struct SimplexObjective {
  std::function<double(std::span<const double> p, std::span<const double> delta)> value;
  Belief center;
  double center_limit = 0.0;
};

VariationalResult maximize_over_simplex(const SimplexObjective& objective,
                                        const OptimizerSettings& settings);

}  // namespace detail

}  // namespace treerecon
