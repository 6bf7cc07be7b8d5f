#include "treerecon/variational.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "treerecon/entropy.hpp"
#include "treerecon/error.hpp"
#include "treerecon/parallel.hpp"
#include "treerecon/rng.hpp"

namespace treerecon {

namespace {

// Inside this sup-norm ball around the centre the ratio is 0/0 to working
// precision; points there are scored with the centre limit instead.
constexpr double kCenterBall = 1e-7;
// Clamp for beliefs before taking logs; clamped points count as boundary.
constexpr double kEntryFloor = 1e-300;
constexpr std::size_t kGridPoints = 200000;
constexpr double kVertexPull = 1e-6;
constexpr long kStallIterations = 200;

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// delta M^rev, which equals p M^rev - alpha because alpha is invariant for M^rev.
std::vector<double> push_delta(std::span<const double> delta, const Matrix& rev) {
  return propagate(delta, rev);
}

struct Evaluation {
  double value = 0.0;
  bool in_center = false;
};

// Tracks the best point seen outside the centre ball during one local search.
class ScoredObjective {
 public:
  explicit ScoredObjective(const detail::SimplexObjective& obj)
      : obj_(obj), q_(obj.center.size()), p_(q_), delta_(q_) {}

  Evaluation evaluate(std::span<const double> p) {
    for (std::size_t i = 0; i < q_; ++i) delta_[i] = p[i] - obj_.center[i];
    if (inf_norm(delta_) < kCenterBall) return {obj_.center_limit, true};
    double v = 0.0;
    if (*std::min_element(p.begin(), p.end()) >= kEntryFloor) {
      v = obj_.value(p, delta_);
      if (!std::isfinite(v)) v = 0.0;
    }
    if (!best_p_ || v > best_value_) {
      best_value_ = v;
      best_p_ = std::vector<double>(p.begin(), p.end());
    }
    return {v, false};
  }

  // Softmax with the last logit pinned at 0.
  Evaluation evaluate_logits(const double* x) {
    double mx = 0.0;
    for (std::size_t i = 0; i + 1 < q_; ++i) mx = std::max(mx, x[i]);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < q_; ++i) {
      p_[i] = std::exp(x[i] - mx);
      total += p_[i];
    }
    p_[q_ - 1] = std::exp(-mx);
    total += p_[q_ - 1];
    for (double& v : p_) v /= total;
    return evaluate(p_);
  }

  double best_value() const { return best_value_; }
  const std::optional<std::vector<double>>& best_point() const { return best_p_; }
  std::size_t q() const { return q_; }

 private:
  const detail::SimplexObjective& obj_;
  std::size_t q_;
  std::vector<double> p_;
  std::vector<double> delta_;
  double best_value_ = 0.0;
  std::optional<std::vector<double>> best_p_;
};

struct StartOutcome {
  double best_value = 0.0;
  std::optional<std::vector<double>> best_point;
  bool reached_center = false;
  bool converged = false;
  long iterations = 0;
};

double gsl_objective(const gsl_vector* x, void* params) {
  auto* scored = static_cast<ScoredObjective*>(params);
  return -scored->evaluate_logits(gsl_vector_const_ptr(x, 0)).value;
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// One Nelder-Mead run in logit space. Returns (converged, iterations) and
// leaves the final point in `x`.
std::pair<bool, long> nelder_mead(ScoredObjective& scored, gsl_vector* x, double step,
                                  const OptimizerSettings& settings) {
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;
  const std::size_t n = scored.q() - 1;
  gsl_multimin_function fn{&gsl_objective, n, &scored};
  std::unique_ptr<gsl_vector, VectorDeleter> steps(gsl_vector_alloc(n));
  gsl_vector_set_all(steps.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(minimizer.get(), &fn, x, steps.get());

  // At an interior maximum the objective is quadratic, so a simplex of size s
  // pins the value to ~s^2.
  const double size_tol = std::sqrt(settings.tol);
  long it = 0;
  bool converged = false;
  double best = gsl_multimin_fminimizer_minimum(minimizer.get());
  long stalled = 0;
  while (it < settings.max_iters) {
    ++it;
    if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(minimizer.get());
    if (gsl_multimin_test_size(size, size_tol) == GSL_SUCCESS) {
      converged = true;
      break;
    }
    // Flat objectives never shrink the simplex; stop once the value stalls.
    const double f = gsl_multimin_fminimizer_minimum(minimizer.get());
    if (best - f > settings.tol) {
      best = f;
      stalled = 0;
    } else if (++stalled >= kStallIterations) {
      converged = true;
      break;
    }
  }
  gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(minimizer.get()));
  return {converged, it};
}

std::vector<double> start_point(std::size_t index, std::size_t q, const Belief& center,
                                std::size_t perturbed_starts, std::uint64_t seed) {
  std::vector<double> p(q);
  if (index < q) {
    std::fill(p.begin(), p.end(), kVertexPull);
    p[index] = 1.0 - kVertexPull * static_cast<double>(q - 1);
    return p;
  }
  auto rng = make_stream(seed, index, /*tag=*/0x5354415254ULL);
  if (index < q + perturbed_starts) {
    double total = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      p[i] = center[i] * std::exp(0.5 * standard_normal(rng));
      total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
  }
  // Dirichlet(1, ..., 1) via normalized exponentials.
  double total = 0.0;
  for (double& v : p) {
    v = standard_exponential(rng);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

StartOutcome run_start(const detail::SimplexObjective& objective, std::size_t index,
                       std::size_t perturbed_starts, const OptimizerSettings& settings) {
  const std::size_t q = objective.center.size();
  ScoredObjective scored(objective);
  const auto p0 = start_point(index, q, objective.center, perturbed_starts, settings.seed);

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(q - 1));
  for (std::size_t i = 0; i + 1 < q; ++i) {
    gsl_vector_set(x.get(), i, std::log(p0[i] / p0[q - 1]));
  }

  StartOutcome out;
  auto [converged, iters] = nelder_mead(scored, x.get(), 1.0, settings);
  out.iterations = iters;
  if (converged) {
    // Restart from the end point; Nelder-Mead can collapse early.
    auto [polished, more] = nelder_mead(scored, x.get(), 0.1, settings);
    out.iterations += more;
    converged = polished;
  }
  out.converged = converged;
  out.reached_center = scored.evaluate_logits(gsl_vector_const_ptr(x.get(), 0)).in_center;
  out.best_value = scored.best_value();
  out.best_point = scored.best_point();
  return out;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < 200 && (b - a) > 1e-15; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

VariationalResult maximize_binary(const detail::SimplexObjective& objective) {
  ScoredObjective scored(objective);
  std::vector<double> p(2);
  auto eval_t = [&](double t) {
    p[0] = t;
    p[1] = 1.0 - t;
    return scored.evaluate(p).value;
  };

  std::size_t best_k = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < kGridPoints; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(kGridPoints);
    const double v = eval_t(t);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double h = 1.0 / static_cast<double>(kGridPoints);
  const double lo = std::max(h * 1e-3, (static_cast<double>(best_k) - 0.5) * h);
  const double hi = std::min(1.0 - h * 1e-3, (static_cast<double>(best_k) + 1.5) * h);
  eval_t(golden_section_max(eval_t, lo, hi));

  MethodTrace trace;
  trace.grid_points = kGridPoints;
  trace.near_center_limit = objective.center_limit;
  trace.best_interior = scored.best_value();
  trace.near_center_is_max = objective.center_limit >= scored.best_value();
  const double value = std::max(objective.center_limit, scored.best_value());
  return {value, Belief::normalized(*scored.best_point()), trace};
}

}  // namespace

namespace detail {

VariationalResult maximize_over_simplex(const SimplexObjective& objective,
                                        const OptimizerSettings& settings) {
  const std::size_t q = objective.center.size();
  if (q == 2) return maximize_binary(objective);
  if (settings.starts < 1 || settings.max_iters < 1 || !(settings.tol > 0.0)) {
    throw Error(ErrorCode::BadInput, "optimizer needs starts >= 1, max_iters >= 1, tol > 0");
  }

  const auto starts = static_cast<std::size_t>(settings.starts);
  const std::size_t perturbed = starts / 4;
  std::vector<StartOutcome> outcomes(starts);
  parallel_for(starts, settings.threads, [&](std::size_t i) {
    outcomes[i] = run_start(objective, i, perturbed, settings);
  });

  MethodTrace trace;
  trace.starts = settings.starts;
  trace.near_center_limit = objective.center_limit;
  std::optional<std::vector<double>> argmax;
  double best_interior = 0.0;
  for (const auto& o : outcomes) {
    trace.iterations += o.iterations;
    if (o.converged) ++trace.converged_starts;
    if (o.best_point && (!argmax || o.best_value > best_interior)) {
      best_interior = o.best_value;
      argmax = o.best_point;
    }
  }
  if (trace.converged_starts == 0) {
    throw Error(ErrorCode::NoConvergence,
                "no local search met the tolerance within " + std::to_string(settings.max_iters) +
                    " iterations");
  }
  if (!argmax) argmax = objective.center.vector();

  trace.best_interior = best_interior;
  trace.near_center_is_max = objective.center_limit >= best_interior;
  const double value = std::max(objective.center_limit, best_interior);
  return {value, Belief::normalized(*argmax), trace};
}

}  // namespace detail

double ratio(const Belief& p, const Channel& channel) {
  const auto& alpha = channel.stationary();
  if (p.size() != channel.q()) throw Error(ErrorCode::BadDimension, "belief size differs from q");
  if (p.distance_inf(alpha) <= kCenterTolerance) {
    throw Error(ErrorCode::CenterSingularity, "numerator and denominator vanish at alpha");
  }
  std::vector<double> delta(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) delta[i] = p[i] - alpha[i];
  const double denom = symmetrized_entropy_delta(delta, alpha.values());
  if (std::isinf(denom)) return 0.0;
  return symmetrized_entropy_delta(push_delta(delta, channel.reversed()), alpha.values()) / denom;
}

double near_center_limit(const Channel& channel) {
  const auto n = static_cast<Eigen::Index>(channel.q());
  const auto& alpha = channel.stationary();
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::sqrt(alpha[static_cast<std::size_t>(i)]);

  // With v = D^{1/2} u the quadratic forms become |B u|^2 and |u|^2 where
  // B(i, j) = sqrt(alpha_i / alpha_j) M(i, j); the constraint sum v = 0 is u _|_ s.
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = s(i) / s(j) * channel.matrix()(i, j);
  }
  const Matrix proj = Matrix::Identity(n, n) - s * s.transpose();
  const Matrix form = proj * (b.transpose() * b) * proj;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (form + form.transpose()),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigen solve failed");
  }
  return std::max(0.0, solver.eigenvalues().maxCoeff());
}

VariationalResult compute_c(const Channel& channel, const OptimizerSettings& settings) {
  const auto& alpha = channel.stationary();
  const Matrix& rev = channel.reversed();
  detail::SimplexObjective objective{
      [&alpha, &rev](std::span<const double>, std::span<const double> delta) {
        const double denom = symmetrized_entropy_delta(delta, alpha.values());
        if (!(denom > 0.0) || std::isinf(denom)) return 0.0;
        return symmetrized_entropy_delta(push_delta(delta, rev), alpha.values()) / denom;
      },
      alpha, near_center_limit(channel)};
  return detail::maximize_over_simplex(objective, settings);
}

namespace {

double cbar_from_delta(std::span<const double> delta, double beta) {
  const double q = static_cast<double>(delta.size());
  const double em1 = std::expm1(2.0 * beta);
  const double shift = 1.0 + em1 / q;
  double num = 0.0;
  double den = 0.0;
  for (double d : delta) {
    const double x = q * d;  // q p_i - 1
    if (x == 0.0) continue;
    if (x <= -1.0) return 0.0;  // p_i = 0: denominator is infinite
    // log(1 + (e-1) p_i) minus its value at p_i = 1/q; the constant drops out
    // of the sum because sum (q p_i - 1) = 0.
    num += x * std::log1p(em1 * d / shift);
    den += x * std::log1p(x);
  }
  if (!(den > 0.0)) return 0.0;
  return num / den;
}

}  // namespace

double potts_cbar_ratio(std::span<const double> p, double beta) {
  std::vector<double> delta(p.size());
  const double u = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) delta[i] = p[i] - u;
  if (inf_norm(delta) <= kCenterTolerance) {
    throw Error(ErrorCode::CenterSingularity, "numerator and denominator vanish at uniform");
  }
  return cbar_from_delta(delta, beta);
}

VariationalResult potts_cbar_result(std::size_t q, double beta, const OptimizerSettings& settings) {
  if (q < 2) throw Error(ErrorCode::BadDimension, "Potts constant needs q >= 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::BadInput, "beta must be finite and >= 0");
  }
  // Near the uniform point both sums are quadratic: numerator
  // ~ q^2 (e-1)/(e+q-1) |d|^2 and denominator ~ q^2 |d|^2.
  const double em1 = std::expm1(2.0 * beta);
  const double limit = em1 / (em1 + static_cast<double>(q));
  detail::SimplexObjective objective{
      [beta](std::span<const double>, std::span<const double> delta) {
        return cbar_from_delta(delta, beta);
      },
      Belief::uniform(q), limit};
  return detail::maximize_over_simplex(objective, settings);
}

double potts_cbar(std::size_t q, double beta, const OptimizerSettings& settings) {
  return potts_cbar_result(q, beta, settings).value;
}

}  // namespace treerecon
