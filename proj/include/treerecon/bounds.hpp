#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treerecon/channel.hpp"
#include "treerecon/variational.hpp"

namespace treerecon {

// FK, MP and Martin criteria can only prove non-reconstruction; KS can only
// prove reconstruction. Failure of a criterion proves nothing.
enum class Verdict { NonReconstruction, Reconstruction, Inconclusive };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct Criterion {
  double constant = 0.0;  // the channel constant the criterion multiplies by d
  Verdict verdict = Verdict::Inconclusive;
  double margin = 0.0;    // 1 - d * constant
};

struct Verdicts {
  Verdict fk = Verdict::Inconclusive;
  Verdict ks = Verdict::Inconclusive;
  std::optional<Verdict> mp;
  std::optional<Verdict> martin;
};

struct BoundReport {
  std::string channel_desc;
  double fk = 0.0;
  double ks = 0.0;
  std::optional<double> mp;      // q = 2 only
  std::optional<double> martin;  // q = 2 only
  double branching = 1.0;
  Verdicts verdicts;
  bool fk_near_center = false;   // the near-centre limit attained the sup
};

// Non-reconstruction proven iff branching * c(M) < 1 (strict).
Criterion fk_criterion(const Channel& channel, double branching,
                       const OptimizerSettings& settings = {});

// lambda_2^2. Reconstruction proven iff d * lambda_2^2 > 1.
double ks_constant(const Channel& channel);
Criterion ks_criterion(const Channel& channel, double branching);

// (d2 - d1)^2 / min(d1 + d2, 2 - d1 - d2); non-reconstruction iff d * value <= 1.
double mp_constant(double delta1, double delta2);
// (sqrt((1 - d1) d2) - sqrt((1 - d2) d1))^2; non-reconstruction iff d * value <= 1.
double martin_constant(double delta1, double delta2);

BoundReport bound_report(const Channel& channel, double branching,
                         const OptimizerSettings& settings = {},
                         std::string channel_desc = {});

// One report per delta2 for binary channels [[1-d1, d1], [1-d2, d2]], in
// input order. Rows are evaluated in parallel.
std::vector<BoundReport> table1(double delta1, const std::vector<double>& delta2_list,
                                double branching = 1.0,
                                const OptimizerSettings& settings = {});

// Short label used in reports, e.g. "binary(0.3,0.1)".
std::string describe_binary(double delta1, double delta2);

}  // namespace treerecon
