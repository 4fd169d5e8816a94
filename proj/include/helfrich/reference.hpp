#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

namespace helfrich::reference {

/// Minimum transport cost by enumerating every vertex of the transport
/// polytope: each basic feasible solution is supported on a spanning tree of
/// the bipartite graph, so we try all (m+n-1)-subsets of cells.
inline double brute_force_transport(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::function<double(int, int)>& cost) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  const int cells = m * n, basis = m + n - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(basis);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == basis) {
      std::vector<double> ra = a, rb = b;
      std::vector<bool> used(basis, false);
      std::vector<double> flow(basis, 0.0);
      int remaining = basis;
      while (remaining > 0) {
        bool progress = false;
        for (int t = 0; t < basis && !progress; ++t) {
          if (used[t]) continue;
          const int i = pick[t] / n, j = pick[t] % n;
          int deg_i = 0, deg_j = 0;
          for (int s = 0; s < basis; ++s) {
            if (used[s]) continue;
            if (pick[s] / n == i) ++deg_i;
            if (pick[s] % n == j) ++deg_j;
          }
          if (deg_i == 1) {
            flow[t] = ra[i];
            rb[j] -= ra[i];
            ra[i] = 0;
          } else if (deg_j == 1) {
            flow[t] = rb[j];
            ra[i] -= rb[j];
            rb[j] = 0;
          } else {
            continue;
          }
          used[t] = true;
          --remaining;
          progress = true;
        }
        if (!progress) return;  // contains a cycle
      }
      double c = 0.0;
      for (int t = 0; t < basis; ++t) {
        if (flow[t] < -1e-13) return;
        c += std::max(flow[t], 0.0) * cost(pick[t] / n, pick[t] % n);
      }
      best = std::min(best, c);
      return;
    }
    for (int k = start; k <= cells - (basis - depth); ++k) {
      pick[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace helfrich::reference
