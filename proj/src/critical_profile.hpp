#pragma once

#include <vector>

namespace stochmatch {

// Critical ranks of u's neighbors: mu[i] is the rank of the offline vertex
// that neighbors[i] takes in a Ranking run with u removed, or 1 if it stays
// unmatched there. Neighbors are listed in arrival order. in_s marks the
// members of the configuration S under study; it is left false by
// critical_ranks() and set by the caller.
struct CriticalProfile {
  int u = -1;
  std::vector<int> neighbors;
  std::vector<double> mu;
  std::vector<bool> in_s;
};

}  // namespace stochmatch
