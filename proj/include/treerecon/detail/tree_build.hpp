#pragma once

#include <string>

#include "treerecon/error.hpp"

namespace treerecon {

template <class Offspring>
SampledTree SampledTree::build(std::size_t depth, Offspring&& offspring, std::size_t max_nodes) {
  if (depth < 1) throw Error(ErrorCode::BadTreeSpec, "depth must be >= 1");
  SampledTree t;
  t.depth_ = depth;
  t.parent_.push_back(kNoParent);
  t.level_.push_back(0);

  // Nodes are appended in BFS order, so a single forward sweep sees every
  // parent before its children.
  for (NodeId v = 0; v < t.parent_.size(); ++v) {
    t.first_child_.push_back(t.parent_.size());
    if (t.level_[v] == depth) {
      t.child_count_.push_back(0);
      t.leaves_.push_back(v);
      continue;
    }
    const std::size_t k = offspring(v);
    if (k == 0) throw Error(ErrorCode::BadTreeSpec, "node above the boundary has no children");
    if (t.parent_.size() + k > max_nodes) {
      throw Error(ErrorCode::TreeTooLarge,
                  "tree exceeds the node budget of " + std::to_string(max_nodes));
    }
    t.child_count_.push_back(k);
    for (std::size_t c = 0; c < k; ++c) {
      t.parent_.push_back(v);
      t.level_.push_back(t.level_[v] + 1);
    }
  }
  return t;
}

}  // namespace treerecon
