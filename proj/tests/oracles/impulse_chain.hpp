#pragma once

// Stationary impulse problem on a 1-D lattice: the state only moves by
// impulses whose jumps are whole multiples of the lattice spacing. The value
// is the shortest-path fixed point
//   v(i) = min( k(i)/lambda, min_j l_j + v(clamp(i + s_j)) )
// solved by Bellman-Ford relaxation.

#include <algorithm>
#include <functional>
#include <vector>

namespace oracle {

inline std::vector<double> impulse_chain_values(int nodes, const std::function<double(int)>& stay_cost,
                                                const std::vector<int>& shifts, const std::vector<double>& costs) {
  std::vector<double> v(nodes);
  for (int i = 0; i < nodes; ++i) v[i] = stay_cost(i);
  for (int round = 0; round < nodes + 1; ++round) {
    bool changed = false;
    for (int i = 0; i < nodes; ++i)
      for (std::size_t j = 0; j < shifts.size(); ++j) {
        int t = std::clamp(i + shifts[j], 0, nodes - 1);
        double cand = costs[j] + v[t];
        if (cand < v[i]) {
          v[i] = cand;
          changed = true;
        }
      }
    if (!changed) break;
  }
  return v;
}

}  // namespace oracle
