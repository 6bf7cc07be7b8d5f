#include "treerecon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "treerecon/error.hpp"
#include "treerecon/parallel.hpp"

namespace treerecon {

namespace {

void require_branching(double branching) {
  if (!(branching >= 1.0) || !std::isfinite(branching)) {
    throw Error(ErrorCode::BadInput, "branching number must be finite and >= 1");
  }
}

void require_binary_params(double delta1, double delta2) {
  auto ok = [](double d) { return d > 0.0 && d < 1.0; };
  if (!ok(delta1) || !ok(delta2)) {
    throw Error(ErrorCode::BadInput, "binary channel parameters must lie in (0, 1)");
  }
}

Verdict upper_bound_verdict(double branching, double constant) {
  return branching * constant <= 1.0 ? Verdict::NonReconstruction : Verdict::Inconclusive;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::NonReconstruction: return "non-reconstruction proven";
    case Verdict::Reconstruction: return "reconstruction proven";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "non-reconstruction proven") return Verdict::NonReconstruction;
  if (s == "reconstruction proven") return Verdict::Reconstruction;
  if (s == "inconclusive") return Verdict::Inconclusive;
  throw Error(ErrorCode::BadInput, "unknown verdict '" + std::string(s) + "'");
}

Criterion fk_criterion(const Channel& channel, double branching, const OptimizerSettings& settings) {
  require_branching(branching);
  const double c = compute_c(channel, settings).value;
  const double product = branching * c;
  return {c, product < 1.0 ? Verdict::NonReconstruction : Verdict::Inconclusive, 1.0 - product};
}

double ks_constant(const Channel& channel) {
  const double l2 = second_eigenvalue(channel);
  return l2 * l2;
}

Criterion ks_criterion(const Channel& channel, double branching) {
  require_branching(branching);
  const double ks = ks_constant(channel);
  const double product = branching * ks;
  return {ks, product > 1.0 ? Verdict::Reconstruction : Verdict::Inconclusive, 1.0 - product};
}

double mp_constant(double delta1, double delta2) {
  require_binary_params(delta1, delta2);
  const double diff = delta2 - delta1;
  return diff * diff / std::min(delta1 + delta2, 2.0 - delta1 - delta2);
}

double martin_constant(double delta1, double delta2) {
  require_binary_params(delta1, delta2);
  const double r = std::sqrt((1.0 - delta1) * delta2) - std::sqrt((1.0 - delta2) * delta1);
  return r * r;
}

BoundReport bound_report(const Channel& channel, double branching,
                         const OptimizerSettings& settings, std::string channel_desc) {
  require_branching(branching);
  BoundReport r;
  r.channel_desc = std::move(channel_desc);
  r.branching = branching;

  const auto c = compute_c(channel, settings);
  r.fk = c.value;
  r.fk_near_center = c.trace.near_center_is_max;
  r.verdicts.fk = branching * r.fk < 1.0 ? Verdict::NonReconstruction : Verdict::Inconclusive;

  const auto ks = ks_criterion(channel, branching);
  r.ks = ks.constant;
  r.verdicts.ks = ks.verdict;

  if (channel.q() == 2) {
    const double d1 = channel(0, 1);
    const double d2 = channel(1, 1);
    r.mp = mp_constant(d1, d2);
    r.martin = martin_constant(d1, d2);
    r.verdicts.mp = upper_bound_verdict(branching, *r.mp);
    r.verdicts.martin = upper_bound_verdict(branching, *r.martin);
  }
  return r;
}

std::string describe_binary(double delta1, double delta2) {
  std::ostringstream os;
  os << "binary(" << delta1 << "," << delta2 << ")";
  return os.str();
}

std::vector<BoundReport> table1(double delta1, const std::vector<double>& delta2_list,
                                double branching, const OptimizerSettings& settings) {
  for (double d2 : delta2_list) require_binary_params(delta1, d2);
  std::vector<std::optional<BoundReport>> rows(delta2_list.size());
  OptimizerSettings inner = settings;
  inner.threads = 1;
  parallel_for(rows.size(), settings.threads, [&](std::size_t i) {
    const double d2 = delta2_list[i];
    rows[i] = bound_report(binary_channel(delta1, d2), branching, inner, describe_binary(delta1, d2));
  });
  std::vector<BoundReport> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(*r));
  return out;
}

}  // namespace treerecon
