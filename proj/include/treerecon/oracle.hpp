#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "treerecon/channel.hpp"
#include "treerecon/tree.hpp"

namespace treerecon {

struct EnumerationBudget {
  std::size_t max_configs = 1'000'000;  // q^{#leaves below v}
  std::size_t max_joint = 100'000'000;  // q^{#nodes below and including v}
};

// Exact laws of the boundary configuration xi below node v.
// xi is indexed lexicographically over leaves_under(v), first leaf most
// significant: index = sum_k spin(leaf_k) q^{L-1-k}.
struct BoundaryLaw {
  NodeId node = 0;
  std::size_t q = 0;
  std::vector<NodeId> leaves;
  std::size_t configs = 0;
  // conditional[j][xi] = Q_v^j(xi) = P(boundary = xi | spin(v) = j)
  std::vector<std::vector<double>> conditional;
  // marginal[xi] = P_v(xi) = sum_j alpha(j) Q_v^j(xi)
  std::vector<double> marginal;
  // posterior[xi * q + j] = P(spin(v) = j | boundary = xi), by Bayes
  std::vector<double> posterior;

  std::span<const double> posterior_at(std::size_t xi) const {
    return {posterior.data() + xi * q, q};
  }
};

// Brute force over every spin assignment of the subtree of v (the definition
// of Q_v^j, not the factorized product over children). Throws
// EnumerationTooLarge past either budget.
BoundaryLaw enumerate_boundary_laws(const SampledTree& tree, const Channel& channel, NodeId v,
                                    const EnumerationBudget& budget = {});

// Max over (j, xi) of |Q_v^j(xi) - prod_w sum_i M(j, i) Q_w^i(xi_w)|.
double check_propagation(const SampledTree& tree, const Channel& channel, NodeId v,
                         const EnumerationBudget& budget = {});

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_diff = 0.0;
};

// lhs = sum_xi P(xi) L(pi_v^xi);
// rhs = sum_{x1, x2} alpha(x1) alpha(x2) S(Q_v^{x2} | Q_v^{x1}). v must be internal.
IdentityCheck check_lemma1(const SampledTree& tree, const Channel& channel, NodeId v,
                           const EnumerationBudget& budget = {});

struct RecursionCheck {
  double lhs = 0.0;  // E L(pi_v)
  double rhs = 0.0;  // sum_w E L(pi_w M^rev)
  double abs_diff = 0.0;
  std::size_t pointwise_violations = 0;  // xi with gap > kPointwiseTolerance
  double max_pointwise_gap = 0.0;
};

inline constexpr double kPointwiseTolerance = 1e-9;

RecursionCheck check_main_recursion(const SampledTree& tree, const Channel& channel, NodeId v,
                                    const EnumerationBudget& budget = {});

// Max over xi of |Bayes posterior at v - belief_recursion output at v|.
double check_bayes_vs_recursion(const SampledTree& tree, const Channel& channel, NodeId v,
                                const EnumerationBudget& budget = {});

struct LyapunovCheck {
  double lhs = 0.0;           // E L(pi_v)
  double children_sum = 0.0;  // sum_w E L(pi_w); infinite if a child is a leaf
  double c = 0.0;
  double margin = 0.0;        // c * children_sum - lhs
};

// E L(pi_v) <= c * sum_w E L(pi_w) for the supplied constant c.
LyapunovCheck check_lyapunov_bound(const SampledTree& tree, const Channel& channel, NodeId v,
                                   double c, const EnumerationBudget& budget = {});

// Expected symmetrized entropy at v, sum_xi P(xi) L(pi_v^xi).
double expected_root_entropy(const BoundaryLaw& law, const Channel& channel);

// ---- randomized suite ----

struct SuiteOptions {
  std::size_t instances = 50;
  std::size_t max_leaves = 6;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  EnumerationBudget budget;
};

struct SuiteTolerances {
  double recursion = 1e-10;
  double lemma1 = 1e-10;
  double propagation = 1e-12;
  double bayes = 1e-12;
  double lyapunov = 1e-9;
  double witness = 1e-3;  // some instance must break the identity pointwise by more
};

struct NodeReport {
  NodeId node = 0;
  double propagation = 0.0;
  double bayes = 0.0;
  IdentityCheck lemma1;
  RecursionCheck recursion;
  bool lyapunov_checked = false;  // false when a child is a leaf
  LyapunovCheck lyapunov;
};

struct InstanceReport {
  std::size_t index = 0;
  Channel channel;
  TreeSpec spec;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  double c = 0.0;
  std::vector<NodeReport> checks;
};

struct SuiteSummary {
  std::size_t instances = 0;
  std::size_t node_checks = 0;
  double max_recursion = 0.0;
  double max_lemma1 = 0.0;
  double max_propagation = 0.0;
  double max_bayes = 0.0;
  double min_lyapunov_margin = 0.0;
  double max_pointwise_gap = 0.0;
  bool pass_recursion = true;
  bool pass_lemma1 = true;
  bool pass_propagation = true;
  bool pass_bayes = true;
  bool pass_lyapunov = true;
  bool pass_witness = true;
};

// Checks at the root and at every internal depth-1 node.
InstanceReport check_instance(std::size_t index, const Channel& channel, const TreeSpec& spec,
                              const SampledTree& tree, double c, const EnumerationBudget& budget);

SuiteSummary summarize(const std::vector<InstanceReport>& reports,
                       const SuiteTolerances& tol = {});

// Random positive channels with q in {2, 3}, Galton-Watson trees of depth 1..3
// and offspring in {1, 2, 3}, rejected until they have at most max_leaves leaves.
std::vector<InstanceReport> run_random_suite(const SuiteOptions& options);

}  // namespace treerecon
