#pragma once

// Primal network simplex for the balanced transportation problem on a
// bipartite arc set, with a block-search pivot rule and the
// thread/successor spanning-tree representation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "core.hpp"

namespace helfrich::ot {

struct Arc {
  int source;  // row index
  int target;  // column index
  double cost;
};

struct NetworkSimplexResult {
  std::vector<double> flow;  // per input arc
  std::vector<double> row_potential;
  std::vector<double> col_potential;  // cost(i,j) - row(i) - col(j) >= 0 at optimum
  double artificial_flow = 0.0;  // > 0 iff the arc set cannot carry the supplies
  long pivots = 0;
};

class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const Arc> arcs,
                 long max_pivots = -1)
      : rows_(static_cast<int>(supply.size())), cols_(static_cast<int>(demand.size())), max_pivots_(max_pivots) {
    node_num_ = rows_ + cols_;
    arc_num_ = static_cast<int>(arcs.size());
    const int all_arcs = arc_num_ + node_num_;
    const int all_nodes = node_num_ + 1;
    source_.resize(all_arcs);
    target_.resize(all_arcs);
    cost_.resize(all_arcs);
    flow_.assign(all_arcs, 0.0);
    state_.assign(all_arcs, kStateLower);
    supply_.resize(all_nodes, 0.0);
    pi_.assign(all_nodes, 0.0);
    parent_.resize(all_nodes);
    pred_.resize(all_nodes);
    thread_.resize(all_nodes);
    rev_thread_.resize(all_nodes);
    succ_num_.resize(all_nodes);
    last_succ_.resize(all_nodes);
    pred_dir_.resize(all_nodes);

    double max_cost = 0.0;
    for (int e = 0; e < arc_num_; ++e) {
      const Arc& a = arcs[e];
      source_[e] = a.source;
      target_[e] = rows_ + a.target;
      cost_[e] = a.cost;
      max_cost = std::max(max_cost, std::abs(a.cost));
    }
    for (int i = 0; i < rows_; ++i) supply_[i] = supply[i];
    for (int j = 0; j < cols_; ++j) supply_[rows_ + j] = -demand[j];
    art_cost_ = (max_cost + 1.0) * (node_num_ + 1);
    scale_ = max_cost + 1.0;
    block_size_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(std::max(arc_num_, 1)))));
  }

  NetworkSimplexResult run() {
    init_tree();
    long pivots = 0;
    while (find_entering_arc()) {
      if (max_pivots_ >= 0 && pivots >= max_pivots_) throw NumericalError("network simplex exceeded its pivot budget");
      find_join_node();
      const bool change = find_leaving_arc();
      change_flow(change);
      if (change) {
        update_tree_structure();
        update_potential();
      }
      ++pivots;
    }
    NetworkSimplexResult out;
    out.pivots = pivots;
    out.flow.assign(flow_.begin(), flow_.begin() + arc_num_);
    for (double& f : out.flow) f = std::max(f, 0.0);
    for (int e = arc_num_; e < arc_num_ + node_num_; ++e) out.artificial_flow += std::max(flow_[e], 0.0);
    out.row_potential.resize(rows_);
    out.col_potential.resize(cols_);
    // reduced cost is cost + pi(source) - pi(target)
    for (int i = 0; i < rows_; ++i) out.row_potential[i] = -pi_[i];
    for (int j = 0; j < cols_; ++j) out.col_potential[j] = pi_[rows_ + j];
    return out;
  }

 private:
  static constexpr signed char kStateTree = 0;
  static constexpr signed char kStateLower = 1;
  static constexpr int kDirUp = 1;
  static constexpr int kDirDown = -1;

  void init_tree() {
    root_ = node_num_;
    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    supply_[root_] = 0.0;
    pi_[root_] = 0.0;
    for (int u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kStateTree;
      if (supply_[u] >= 0.0) {
        pred_dir_[u] = kDirUp;
        pi_[u] = 0.0;
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = supply_[u];
        cost_[e] = 0.0;
      } else {
        pred_dir_[u] = kDirDown;
        pi_[u] = art_cost_;
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -supply_[u];
        cost_[e] = art_cost_;
      }
    }
    next_arc_ = 0;
  }

  double reduced(int e) const { return state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]); }

  bool find_entering_arc() {
    const double threshold = -1e-12 * scale_;
    double best = threshold;
    int cnt = block_size_;
    int e;
    for (e = next_arc_; e != arc_num_; ++e) {
      const double c = reduced(e);
      if (c < best) {
        best = c;
        in_arc_ = e;
      }
      if (--cnt == 0) {
        if (best < threshold) goto found;
        cnt = block_size_;
      }
    }
    for (e = 0; e != next_arc_; ++e) {
      const double c = reduced(e);
      if (c < best) {
        best = c;
        in_arc_ = e;
      }
      if (--cnt == 0) {
        if (best < threshold) goto found;
        cnt = block_size_;
      }
    }
    if (!(best < threshold)) return false;
  found:
    next_arc_ = e == arc_num_ ? 0 : e;
    return true;
  }

  void find_join_node() {
    int u = source_[in_arc_], v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v])
        u = parent_[u];
      else
        v = parent_[v];
    }
    join_ = u;
  }

  // All arcs are uncapacitated, so only flow decreases limit the step.
  bool find_leaving_arc() {
    const int first = source_[in_arc_], second = target_[in_arc_];
    double delta = std::numeric_limits<double>::infinity();
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      if (pred_dir_[u] == kDirUp) {
        const double d = std::max(flow_[pred_[u]], 0.0);
        if (d < delta) {
          delta = d;
          u_out_ = u;
          result = 1;
        }
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      if (pred_dir_[u] == kDirDown) {
        const double d = std::max(flow_[pred_[u]], 0.0);
        if (d <= delta) {
          delta = d;
          u_out_ = u;
          result = 2;
        }
      }
    }
    if (result == 0) throw NumericalError("network simplex: unbounded cycle (negative-cost cycle without limit)");
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    delta_ = delta;
    return true;
  }

  void change_flow(bool change) {
    if (delta_ > 0.0) {
      const double val = state_[in_arc_] * delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
    }
    if (change) {
      state_[in_arc_] = kStateTree;
      flow_[pred_[u_out_]] = 0.0;
      state_[pred_[u_out_]] = kStateLower;
    }
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[u_in_];
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        const int next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);
        const int before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;
        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;
        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;
      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int rows_, cols_, node_num_, arc_num_;
  long max_pivots_;
  int root_ = 0;
  double art_cost_ = 0.0;
  double scale_ = 1.0;
  int block_size_ = 10;
  int next_arc_ = 0;

  std::vector<int> source_, target_;
  std::vector<double> cost_, flow_;
  std::vector<signed char> state_;
  std::vector<double> supply_, pi_;
  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_, pred_dir_;
  std::vector<int> dirty_revs_;

  int in_arc_ = -1, join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
  double delta_ = 0.0;
};

}  // namespace helfrich::ot
