#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treerecon/belief.hpp"
#include "treerecon/channel.hpp"

namespace treerecon {

using NodeId = std::size_t;

// Offspring law plus truncation depth N.
struct TreeSpec {
  enum class Kind { Regular, GaltonWatson };

  Kind kind = Kind::Regular;
  std::size_t d = 2;        // regular trees
  std::vector<double> pmf;  // Galton-Watson: pmf[k] = P(k children)
  std::size_t depth = 1;

  static TreeSpec regular(std::size_t d, std::size_t depth);
  static TreeSpec galton_watson(std::vector<double> pmf, std::size_t depth);

  // Throws BadTreeSpec: d >= 1, depth >= 1, pmf sums to 1 within 1e-12,
  // no mass at 0 children.
  void validate() const;
  double mean_offspring() const;
  std::string to_string() const;  // inverse of parse_tree_spec, without depth
};

// "regular:d=2" or "gw:1=0.25,2=0.5,3=0.25" (k=P(k children)).
TreeSpec parse_tree_spec(std::string_view text, std::size_t depth);

// A finite rooted tree whose leaves all sit at depth N. Nodes are numbered in
// breadth-first order: node 0 is the root, children of a node are contiguous
// and always have larger ids than their parent.
class SampledTree {
 public:
  static constexpr NodeId kNoParent = static_cast<NodeId>(-1);

  // Builds the tree breadth first, asking offspring(v) for every node above
  // depth N. Throws TreeTooLarge past max_nodes, BadTreeSpec on a zero count.
  template <class Offspring>
  static SampledTree build(std::size_t depth, Offspring&& offspring, std::size_t max_nodes);

  std::size_t size() const noexcept { return parent_.size(); }
  std::size_t depth() const noexcept { return depth_; }
  NodeId parent(NodeId v) const { return parent_[v]; }
  std::size_t node_depth(NodeId v) const { return level_[v]; }
  std::size_t child_count(NodeId v) const { return child_count_[v]; }
  NodeId first_child(NodeId v) const { return first_child_[v]; }
  bool is_leaf(NodeId v) const { return level_[v] == depth_; }
  std::span<const NodeId> leaves() const noexcept { return leaves_; }

  std::vector<NodeId> children(NodeId v) const;
  // Leaves below v (v itself if it is a leaf), in increasing id order.
  std::vector<NodeId> leaves_under(NodeId v) const;
  // All nodes of the subtree rooted at v in breadth-first order, v first.
  std::vector<NodeId> subtree(NodeId v) const;

  friend bool operator==(const SampledTree&, const SampledTree&) = default;

 private:
  std::size_t depth_ = 0;
  std::vector<NodeId> parent_;
  std::vector<std::size_t> level_;
  std::vector<NodeId> first_child_;
  std::vector<std::size_t> child_count_;
  std::vector<NodeId> leaves_;
};

inline constexpr std::size_t kDefaultNodeBudget = 5'000'000;

SampledTree sample_tree(const TreeSpec& spec, std::uint64_t seed,
                        std::size_t max_nodes = kDefaultNodeBudget);
SampledTree sample_tree(const TreeSpec& spec, std::mt19937_64& rng,
                        std::size_t max_nodes = kDefaultNodeBudget);

// Spins are 0-based internally: spin s stands for state s + 1.
struct Configuration {
  std::vector<std::uint32_t> spins;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// Root spin from alpha, each child from its parent's row of M.
Configuration broadcast(const SampledTree& tree, const Channel& channel, std::uint64_t seed);
void broadcast(const SampledTree& tree, const Channel& channel, std::mt19937_64& rng,
               Configuration& out);

// Partial map node -> Belief over a fixed tree, stored densely.
class BeliefField {
 public:
  BeliefField(std::size_t nodes, std::size_t q)
      : q_(q), data_(nodes * q, 0.0), present_(nodes, false) {}

  std::size_t q() const noexcept { return q_; }
  std::size_t nodes() const noexcept { return present_.size(); }
  bool contains(NodeId v) const { return v < present_.size() && present_[v]; }
  std::size_t count() const;

  void set(NodeId v, const Belief& b);
  Belief at(NodeId v) const;  // throws BadInput if absent
  std::span<const double> row(NodeId v) const { return {data_.data() + v * q_, q_}; }
  std::span<double> mutable_row(NodeId v) {
    present_[v] = true;
    return {data_.data() + v * q_, q_};
  }

 private:
  std::size_t q_;
  std::vector<double> data_;
  std::vector<bool> present_;
};

// Point mass at the observed spin for every leaf; nothing else.
BeliefField leaf_beliefs(const SampledTree& tree, const Configuration& config, std::size_t q);

// Upward recursion
//   pi_v(j) ~ alpha(j) prod_{w child of v} sum_i M(j, i) pi_w(i) / alpha(i),
// accumulated in log space and normalized. Returns beliefs on every node;
// leaves keep their input. Throws NumericalUnderflow on non-finite logs and
// BadInput if a leaf belief is missing.
BeliefField belief_recursion(const SampledTree& tree, const Channel& channel,
                             const BeliefField& leaves);

enum class AverageMode { Annealed, Quenched };

std::string_view to_string(AverageMode m);
AverageMode parse_average_mode(std::string_view s);

struct MonteCarloOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  AverageMode mode = AverageMode::Annealed;
  unsigned threads = 0;
  std::size_t max_nodes = kDefaultNodeBudget;
};

struct MonteCarloEstimate {
  std::size_t depth = 0;
  double mean = 0.0;
  double std_error = 0.0;  // 0 when samples == 1
  std::size_t samples = 0;
};

// Mean and standard error of L(pi_root) over independent (tree, boundary)
// draws. Annealed mode resamples Galton-Watson trees per draw; quenched mode
// fixes one tree. Sample i always uses the RNG stream (seed, i), so the
// estimate does not depend on the thread count.
MonteCarloEstimate mc_root_entropy(const TreeSpec& spec, const Channel& channel,
                                   const MonteCarloOptions& options);

}  // namespace treerecon

#include "treerecon/detail/tree_build.hpp"
