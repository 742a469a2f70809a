#pragma once
#include <vector>

#include "adlab/spread.hpp"

namespace adlab::detail {

// infection tree rooted at a local index
struct Rooted {
  std::vector<int> parent;
  std::vector<int> depth;
  std::vector<int> order;  // BFS order from the root
};

Rooted root_at(const Snapshot& s, int root);
std::vector<int> tree_centers(const Snapshot& s);
// recorded virtual source when present, else the tree centre
int center_of(const Snapshot& s);

}  // namespace adlab::detail
