#include "treerecon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "treerecon/entropy.hpp"
#include "treerecon/error.hpp"
#include "treerecon/parallel.hpp"
#include "treerecon/rng.hpp"
#include "treerecon/variational.hpp"

namespace treerecon {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap, const char* what) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > cap / base) {
      throw Error(ErrorCode::EnumerationTooLarge,
                  std::string(what) + " exceeds the budget of " + std::to_string(cap));
    }
    r *= base;
  }
  return r;
}

void require_internal(const SampledTree& tree, NodeId v) {
  if (v >= tree.size()) throw Error(ErrorCode::BadInput, "node out of range");
  if (tree.is_leaf(v)) throw Error(ErrorCode::BadInput, "node " + std::to_string(v) + " is a leaf");
}

// Digits of xi, most significant first.
void decode(std::size_t xi, std::size_t q, std::vector<std::size_t>& digits) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    digits[k] = xi % q;
    xi /= q;
  }
}

// For each child w of v: positions of w's leaves inside v's leaf list.
std::vector<std::vector<std::size_t>> child_leaf_positions(const BoundaryLaw& parent,
                                                           const std::vector<BoundaryLaw>& kids) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& kid : kids) {
    std::vector<std::size_t> pos;
    for (NodeId leaf : kid.leaves) {
      const auto it = std::find(parent.leaves.begin(), parent.leaves.end(), leaf);
      pos.push_back(static_cast<std::size_t>(it - parent.leaves.begin()));
    }
    out.push_back(std::move(pos));
  }
  return out;
}

std::size_t sub_index(const std::vector<std::size_t>& digits, const std::vector<std::size_t>& pos,
                      std::size_t q) {
  std::size_t idx = 0;
  for (std::size_t p : pos) idx = idx * q + digits[p];
  return idx;
}

std::vector<BoundaryLaw> children_laws(const SampledTree& tree, const Channel& channel, NodeId v,
                                       const EnumerationBudget& budget) {
  std::vector<BoundaryLaw> kids;
  for (NodeId w : tree.children(v)) kids.push_back(enumerate_boundary_laws(tree, channel, w, budget));
  return kids;
}

}  // namespace

BoundaryLaw enumerate_boundary_laws(const SampledTree& tree, const Channel& channel, NodeId v,
                                    const EnumerationBudget& budget) {
  if (v >= tree.size()) throw Error(ErrorCode::BadInput, "node out of range");
  const std::size_t q = channel.q();
  const auto nodes = tree.subtree(v);
  BoundaryLaw law;
  law.node = v;
  law.q = q;
  law.leaves = tree.leaves_under(v);
  law.configs = checked_power(q, law.leaves.size(), budget.max_configs, "boundary configurations");
  checked_power(q, nodes.size(), budget.max_joint, "joint subtree assignments");

  // Position of each node's parent in `nodes`, and each leaf's digit place.
  const std::size_t n = nodes.size();
  std::vector<std::size_t> parent_pos(n, 0);
  for (std::size_t k = 1; k < n; ++k) {
    const auto it = std::find(nodes.begin(), nodes.end(), tree.parent(nodes[k]));
    parent_pos[k] = static_cast<std::size_t>(it - nodes.begin());
  }
  std::vector<std::size_t> place(n, 0);
  std::vector<bool> is_leaf(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (!tree.is_leaf(nodes[k])) continue;
    is_leaf[k] = true;
    const auto li = static_cast<std::size_t>(
        std::find(law.leaves.begin(), law.leaves.end(), nodes[k]) - law.leaves.begin());
    std::size_t mult = 1;
    for (std::size_t r = li + 1; r < law.leaves.size(); ++r) mult *= q;
    place[k] = mult;
  }

  law.conditional.assign(q, std::vector<double>(law.configs, 0.0));
  std::vector<std::vector<double>> comp(q, std::vector<double>(law.configs, 0.0));
  std::vector<std::size_t> spin(n, 0);
  std::vector<double> weight(n, 1.0);

  for (std::size_t j = 0; j < q; ++j) {
    spin.assign(n, 0);
    spin[0] = j;
    weight[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) weight[k] = weight[k - 1] * channel(spin[parent_pos[k]], spin[k]);

    while (true) {
      std::size_t xi = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (is_leaf[k]) xi += spin[k] * place[k];
      }
      // Neumaier step into (conditional, comp).
      double& s = law.conditional[j][xi];
      double& c = comp[j][xi];
      const double x = weight[n - 1];
      const double t = s + x;
      c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
      s = t;

      // Odometer over positions 1..n-1; position 0 is pinned to j.
      std::size_t k = n;
      while (k > 1 && spin[k - 1] == q - 1) --k;
      if (k == 1) break;
      ++spin[k - 1];
      for (std::size_t r = k; r < n; ++r) spin[r] = 0;
      for (std::size_t r = k - 1; r < n; ++r) {
        weight[r] = weight[r - 1] * channel(spin[parent_pos[r]], spin[r]);
      }
    }
    for (std::size_t xi = 0; xi < law.configs; ++xi) law.conditional[j][xi] += comp[j][xi];
  }

  const auto& alpha = channel.stationary();
  law.marginal.assign(law.configs, 0.0);
  law.posterior.assign(law.configs * q, 0.0);
  for (std::size_t xi = 0; xi < law.configs; ++xi) {
    double pxi = 0.0;
    for (std::size_t j = 0; j < q; ++j) pxi += alpha[j] * law.conditional[j][xi];
    law.marginal[xi] = pxi;
    for (std::size_t j = 0; j < q; ++j) {
      law.posterior[xi * q + j] = alpha[j] * law.conditional[j][xi] / pxi;
    }
  }
  return law;
}

double expected_root_entropy(const BoundaryLaw& law, const Channel& channel) {
  CompensatedSum acc;
  for (std::size_t xi = 0; xi < law.configs; ++xi) {
    acc.add(law.marginal[xi] * symmetrized_entropy(law.posterior_at(xi), channel.stationary().values()));
  }
  return acc.value();
}

double check_propagation(const SampledTree& tree, const Channel& channel, NodeId v,
                         const EnumerationBudget& budget) {
  require_internal(tree, v);
  const std::size_t q = channel.q();
  const auto law = enumerate_boundary_laws(tree, channel, v, budget);
  const auto kids = children_laws(tree, channel, v, budget);
  const auto positions = child_leaf_positions(law, kids);

  std::vector<std::size_t> digits(law.leaves.size());
  double worst = 0.0;
  for (std::size_t xi = 0; xi < law.configs; ++xi) {
    decode(xi, q, digits);
    for (std::size_t j = 0; j < q; ++j) {
      double product = 1.0;
      for (std::size_t c = 0; c < kids.size(); ++c) {
        const std::size_t sub = sub_index(digits, positions[c], q);
        double mix = 0.0;
        for (std::size_t i = 0; i < q; ++i) mix += channel(j, i) * kids[c].conditional[i][sub];
        product *= mix;
      }
      worst = std::max(worst, std::abs(law.conditional[j][xi] - product));
    }
  }
  return worst;
}

IdentityCheck check_lemma1(const SampledTree& tree, const Channel& channel, NodeId v,
                           const EnumerationBudget& budget) {
  require_internal(tree, v);
  const auto law = enumerate_boundary_laws(tree, channel, v, budget);
  const auto& alpha = channel.stationary();
  IdentityCheck out;
  out.lhs = expected_root_entropy(law, channel);
  CompensatedSum rhs;
  for (std::size_t x1 = 0; x1 < law.q; ++x1) {
    for (std::size_t x2 = 0; x2 < law.q; ++x2) {
      if (x1 == x2) continue;
      CompensatedSum s;
      for (std::size_t xi = 0; xi < law.configs; ++xi) {
        const double a = law.conditional[x2][xi];
        if (a == 0.0) continue;
        s.add(a * std::log(a / law.conditional[x1][xi]));
      }
      rhs.add(alpha[x1] * alpha[x2] * s.value());
    }
  }
  out.rhs = rhs.value();
  out.abs_diff = std::abs(out.lhs - out.rhs);
  return out;
}

RecursionCheck check_main_recursion(const SampledTree& tree, const Channel& channel, NodeId v,
                                    const EnumerationBudget& budget) {
  require_internal(tree, v);
  const std::size_t q = channel.q();
  const auto law = enumerate_boundary_laws(tree, channel, v, budget);
  const auto kids = children_laws(tree, channel, v, budget);
  const auto positions = child_leaf_positions(law, kids);
  const auto alpha = channel.stationary().values();

  RecursionCheck out;
  CompensatedSum lhs;
  CompensatedSum rhs;
  std::vector<std::size_t> digits(law.leaves.size());
  for (std::size_t xi = 0; xi < law.configs; ++xi) {
    decode(xi, q, digits);
    const double at_v = symmetrized_entropy(law.posterior_at(xi), alpha);
    double children = 0.0;
    for (std::size_t c = 0; c < kids.size(); ++c) {
      const std::size_t sub = sub_index(digits, positions[c], q);
      const auto pushed = propagate(kids[c].posterior_at(sub), channel.reversed());
      children += symmetrized_entropy(pushed, alpha);
    }
    lhs.add(law.marginal[xi] * at_v);
    rhs.add(law.marginal[xi] * children);
    const double gap = std::abs(at_v - children);
    out.max_pointwise_gap = std::max(out.max_pointwise_gap, gap);
    if (gap > kPointwiseTolerance) ++out.pointwise_violations;
  }
  out.lhs = lhs.value();
  out.rhs = rhs.value();
  out.abs_diff = std::abs(out.lhs - out.rhs);
  return out;
}

double check_bayes_vs_recursion(const SampledTree& tree, const Channel& channel, NodeId v,
                                const EnumerationBudget& budget) {
  require_internal(tree, v);
  const std::size_t q = channel.q();
  const auto law = enumerate_boundary_laws(tree, channel, v, budget);
  Configuration config;
  config.spins.assign(tree.size(), 0);
  std::vector<std::size_t> digits(law.leaves.size());
  double worst = 0.0;
  for (std::size_t xi = 0; xi < law.configs; ++xi) {
    decode(xi, q, digits);
    for (std::size_t k = 0; k < law.leaves.size(); ++k) {
      config.spins[law.leaves[k]] = static_cast<std::uint32_t>(digits[k]);
    }
    const auto field = belief_recursion(tree, channel, leaf_beliefs(tree, config, q));
    const auto rec = field.row(v);
    const auto bayes = law.posterior_at(xi);
    for (std::size_t j = 0; j < q; ++j) worst = std::max(worst, std::abs(rec[j] - bayes[j]));
  }
  return worst;
}

LyapunovCheck check_lyapunov_bound(const SampledTree& tree, const Channel& channel, NodeId v,
                                   double c, const EnumerationBudget& budget) {
  require_internal(tree, v);
  LyapunovCheck out;
  out.c = c;
  out.lhs = expected_root_entropy(enumerate_boundary_laws(tree, channel, v, budget), channel);
  double sum = 0.0;
  for (NodeId w : tree.children(v)) {
    if (tree.is_leaf(w)) {
      sum = std::numeric_limits<double>::infinity();
      break;
    }
    sum += expected_root_entropy(enumerate_boundary_laws(tree, channel, w, budget), channel);
  }
  out.children_sum = sum;
  out.margin = (c == 0.0 && std::isinf(sum)) ? -out.lhs : c * sum - out.lhs;
  return out;
}

// ---- suite ----

InstanceReport check_instance(std::size_t index, const Channel& channel, const TreeSpec& spec,
                              const SampledTree& tree, double c, const EnumerationBudget& budget) {
  InstanceReport r{index, channel, spec, tree.size(), tree.leaves().size(), c, {}};
  std::vector<NodeId> targets{0};
  for (NodeId w : tree.children(0)) {
    if (!tree.is_leaf(w)) targets.push_back(w);
  }
  for (NodeId v : targets) {
    NodeReport n;
    n.node = v;
    n.propagation = check_propagation(tree, channel, v, budget);
    n.bayes = check_bayes_vs_recursion(tree, channel, v, budget);
    n.lemma1 = check_lemma1(tree, channel, v, budget);
    n.recursion = check_main_recursion(tree, channel, v, budget);
    bool internal_children = true;
    for (NodeId w : tree.children(v)) internal_children = internal_children && !tree.is_leaf(w);
    if (internal_children) {
      n.lyapunov_checked = true;
      n.lyapunov = check_lyapunov_bound(tree, channel, v, c, budget);
    }
    r.checks.push_back(n);
  }
  return r;
}

SuiteSummary summarize(const std::vector<InstanceReport>& reports, const SuiteTolerances& tol) {
  SuiteSummary s;
  s.instances = reports.size();
  s.min_lyapunov_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : reports) {
    for (const auto& n : r.checks) {
      ++s.node_checks;
      s.max_recursion = std::max(s.max_recursion, n.recursion.abs_diff);
      s.max_lemma1 = std::max(s.max_lemma1, n.lemma1.abs_diff);
      s.max_propagation = std::max(s.max_propagation, n.propagation);
      s.max_bayes = std::max(s.max_bayes, n.bayes);
      s.max_pointwise_gap = std::max(s.max_pointwise_gap, n.recursion.max_pointwise_gap);
      if (n.lyapunov_checked) s.min_lyapunov_margin = std::min(s.min_lyapunov_margin, n.lyapunov.margin);
    }
  }
  s.pass_recursion = s.max_recursion <= tol.recursion;
  s.pass_lemma1 = s.max_lemma1 <= tol.lemma1;
  s.pass_propagation = s.max_propagation <= tol.propagation;
  s.pass_bayes = s.max_bayes <= tol.bayes;
  s.pass_lyapunov = s.min_lyapunov_margin >= -tol.lyapunov;
  s.pass_witness = s.max_pointwise_gap > tol.witness;
  return s;
}

std::vector<InstanceReport> run_random_suite(const SuiteOptions& options) {
  constexpr std::uint64_t kSuiteStream = 0x5355495445ULL;
  std::vector<std::optional<InstanceReport>> slots(options.instances);
  parallel_for(options.instances, options.threads, [&](std::size_t i) {
    auto rng = make_stream(options.seed, i, kSuiteStream);
    const std::size_t q = 2 + (rng() % 2);
    Matrix m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    for (std::size_t a = 0; a < q; ++a) {
      std::vector<double> row(q);
      double total = 0.0;
      for (double& x : row) {
        x = standard_exponential(rng);
        total += x;
      }
      // Keep every entry >= 0.05 / q.
      for (std::size_t b = 0; b < q; ++b) {
        m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            0.95 * row[b] / total + 0.05 / static_cast<double>(q);
      }
    }
    const Channel channel = make_channel(m);

    const std::size_t depth = 1 + (rng() % 3);
    const auto spec = TreeSpec::galton_watson({0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3}, depth);
    std::optional<SampledTree> tree;
    do {
      tree = sample_tree(spec, rng);
    } while (tree->leaves().size() > options.max_leaves);

    OptimizerSettings opt;
    opt.seed = options.seed;
    opt.threads = 1;
    const double c = compute_c(channel, opt).value;
    slots[i] = check_instance(i, channel, spec, *tree, c, options.budget);
  });
  std::vector<InstanceReport> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace treerecon
