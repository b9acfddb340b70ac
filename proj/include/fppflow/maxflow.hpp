// Dinic's blocking-flow max-flow on integer capacities.
#pragma once

#include <algorithm>
#include <limits>
#include <vector>

namespace fppflow {

template <typename Cap>
class Dinic {
 public:
  explicit Dinic(int n) : adj_(static_cast<std::size_t>(n)), level_(static_cast<std::size_t>(n)), it_(static_cast<std::size_t>(n)) {}

  /// Adds u->v with capacity `cap` and v->u with `rev_cap`; returns the id
  /// of the forward arc (the reverse arc is id ^ 1).
  int add_edge(int u, int v, Cap cap, Cap rev_cap = 0) {
    int id = static_cast<int>(to_.size());
    to_.push_back(v);
    cap_.push_back(cap);
    to_.push_back(u);
    cap_.push_back(rev_cap);
    adj_[u].push_back(id);
    adj_[v].push_back(id + 1);
    return id;
  }

  int size() const noexcept { return static_cast<int>(adj_.size()); }
  Cap residual(int arc) const { return cap_[arc]; }

  Cap run(int s, int t) {
    Cap total = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      total += blocking_flow(s, t);
    }
    return total;
  }

  /// Vertices reachable from s through arcs with positive residual capacity.
  std::vector<char> reachable(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int a : adj_[v]) {
        int w = to_[a];
        if (cap_[a] > 0 && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return seen;
  }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int> queue{s};
    level_[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int v = queue[head];
      for (int a : adj_[v]) {
        int w = to_[a];
        if (cap_[a] > 0 && level_[w] < 0) {
          level_[w] = level_[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return level_[t] >= 0;
  }

  // Iterative DFS with current-arc pointers; dead ends get level -1.
  Cap blocking_flow(int s, int t) {
    Cap total = 0;
    std::vector<int> path;
    int v = s;
    while (true) {
      if (v == t) {
        Cap f = std::numeric_limits<Cap>::max();
        for (int a : path) f = std::min(f, cap_[a]);
        std::size_t cut_at = path.size();
        for (std::size_t k = 0; k < path.size(); ++k) {
          cap_[path[k]] -= f;
          cap_[path[k] ^ 1] += f;
          if (cap_[path[k]] == 0 && cut_at == path.size()) cut_at = k;
        }
        total += f;
        path.resize(cut_at);
        v = path.empty() ? s : to_[path.back()];
        continue;
      }
      auto& i = it_[v];
      const auto& out = adj_[v];
      while (i < out.size()) {
        int a = out[i];
        if (cap_[a] > 0 && level_[to_[a]] == level_[v] + 1) break;
        ++i;
      }
      if (i < out.size()) {
        path.push_back(out[i]);
        v = to_[out[i]];
        continue;
      }
      level_[v] = -1;
      if (path.empty()) break;
      int a = path.back();
      path.pop_back();
      v = to_[a ^ 1];
      ++it_[v];
    }
    return total;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> to_;
  std::vector<Cap> cap_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace fppflow
