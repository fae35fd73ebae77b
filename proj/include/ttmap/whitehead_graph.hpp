#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ttmap {

// Small simple graph with named vertices.
class WhiteheadGraph {
 public:
  std::vector<std::string> names;
  std::set<std::pair<int, int>> edges;

  int add_vertex(const std::string& n) {
    names.push_back(n);
    return static_cast<int>(names.size()) - 1;
  }
  int index(const std::string& n) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<int>(i);
    return -1;
  }
  void add_edge(int a, int b) {
    if (a == b) throw std::invalid_argument("loop in Whitehead graph");
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  bool has_edge(int a, int b) const { return edges.count({std::min(a, b), std::max(a, b)}) > 0; }
  bool has_edge(const std::string& a, const std::string& b) const {
    int i = index(a), j = index(b);
    return i >= 0 && j >= 0 && has_edge(i, j);
  }
  int num_vertices() const { return static_cast<int>(names.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(names.size());
    for (auto [a, b] : edges) adj[a].push_back(b), adj[b].push_back(a);
    return adj;
  }
  int degree(int v) const {
    int d = 0;
    for (auto [a, b] : edges) d += (a == v) + (b == v);
    return d;
  }
  std::vector<int> valences() const {
    std::vector<int> v;
    for (int i = 0; i < num_vertices(); ++i) v.push_back(degree(i));
    std::sort(v.rbegin(), v.rend());
    return v;
  }

  std::vector<std::vector<int>> components() const {
    auto adj = adjacency();
    std::vector<int> comp(names.size(), -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < num_vertices(); ++s) {
      if (comp[s] >= 0) continue;
      out.emplace_back();
      std::vector<int> st{s};
      comp[s] = static_cast<int>(out.size()) - 1;
      while (!st.empty()) {
        int v = st.back();
        st.pop_back();
        out.back().push_back(v);
        for (int w : adj[v])
          if (comp[w] < 0) comp[w] = comp[s], st.push_back(w);
      }
      std::sort(out.back().begin(), out.back().end());
    }
    return out;
  }
  bool connected() const { return num_vertices() > 0 && components().size() == 1; }

  WhiteheadGraph induced(const std::vector<int>& vs) const {
    WhiteheadGraph h;
    std::map<int, int> idx;
    for (int v : vs) idx[v] = h.add_vertex(names[v]);
    for (auto [a, b] : edges)
      if (idx.count(a) && idx.count(b)) h.add_edge(idx[a], idx[b]);
    return h;
  }

  // Biconnected blocks as edge sets (vertex index pairs), plus cut vertices.
  struct BlockData {
    std::vector<std::vector<std::pair<int, int>>> blocks;
    std::set<int> cut_vertices;
  };
  BlockData block_data() const {
    auto adj = adjacency();
    int n = num_vertices();
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<std::pair<int, int>> stack;
    BlockData out;
    int timer = 0;
    std::function<void(int, int)> dfs = [&](int u, int parent) {
      disc[u] = low[u] = timer++;
      int children = 0;
      for (int w : adj[u]) {
        if (w == parent) continue;
        if (disc[w] < 0) {
          ++children;
          stack.push_back({u, w});
          dfs(w, u);
          low[u] = std::min(low[u], low[w]);
          if ((parent < 0 && children > 1) || (parent >= 0 && low[w] >= disc[u])) out.cut_vertices.insert(u);
          if (low[w] >= disc[u]) {
            std::vector<std::pair<int, int>> blk;
            while (true) {
              auto e = stack.back();
              stack.pop_back();
              blk.push_back({std::min(e.first, e.second), std::max(e.first, e.second)});
              if (e == std::make_pair(u, w)) break;
            }
            std::sort(blk.begin(), blk.end());
            out.blocks.push_back(blk);
          }
        } else if (disc[w] < disc[u]) {
          stack.push_back({u, w});
          low[u] = std::min(low[u], disc[w]);
        }
      }
    };
    for (int s = 0; s < n; ++s)
      if (disc[s] < 0) dfs(s, -1);
    return out;
  }
  std::set<int> cut_vertices() const { return block_data().cut_vertices; }

  // Block decomposition of a connected graph.
  std::vector<WhiteheadGraph> blocks() const {
    if (!connected()) throw std::invalid_argument("cut point decomposition needs a connected graph");
    std::vector<WhiteheadGraph> out;
    if (edges.empty()) {
      out.push_back(*this);
      return out;
    }
    for (auto& blk : block_data().blocks) {
      std::set<int> vs;
      for (auto [a, b] : blk) vs.insert(a), vs.insert(b);
      WhiteheadGraph h;
      std::map<int, int> idx;
      for (int v : vs) idx[v] = h.add_vertex(names[v]);
      for (auto [a, b] : blk) h.add_edge(idx[a], idx[b]);
      out.push_back(h);
    }
    return out;
  }

  std::string dot(const std::string& name = "W") const {
    std::ostringstream os;
    os << "graph \"" << name << "\" {\n";
    for (auto& n : names) os << "  \"" << n << "\";\n";
    for (auto [a, b] : edges) os << "  \"" << names[a] << "\" -- \"" << names[b] << "\";\n";
    os << "}\n";
    return os.str();
  }
};

// Exhaustive isomorphism test for small graphs.
inline bool isomorphic(const WhiteheadGraph& g, const WhiteheadGraph& h) {
  int n = g.num_vertices();
  if (n != h.num_vertices() || g.num_edges() != h.num_edges()) return false;
  if (g.valences() != h.valences()) return false;
  std::vector<int> dg(n), dh(n);
  for (int i = 0; i < n; ++i) dg[i] = g.degree(i), dh[i] = h.degree(i);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return dg[a] > dg[b]; });
  std::vector<int> map(n, -1);
  std::vector<bool> used(n, false);
  std::function<bool(int)> go = [&](int k) {
    if (k == n) return true;
    int v = order[k];
    for (int w = 0; w < n; ++w) {
      if (used[w] || dh[w] != dg[v]) continue;
      bool ok = true;
      for (int j = 0; j < k && ok; ++j) {
        int u = order[j];
        if (g.has_edge(u, v) != h.has_edge(map[u], w)) ok = false;
      }
      if (!ok) continue;
      map[v] = w, used[w] = true;
      if (go(k + 1)) return true;
      map[v] = -1, used[w] = false;
    }
    return false;
  };
  return go(0);
}

// Multiset isomorphism of two lists of graphs.
inline bool isomorphic_collections(std::vector<WhiteheadGraph> a, std::vector<WhiteheadGraph> b) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (auto& x : a) {
    bool found = false;
    for (size_t j = 0; j < b.size() && !found; ++j)
      if (!used[j] && isomorphic(x, b[j])) used[j] = found = true;
    if (!found) return false;
  }
  return true;
}

}  // namespace ttmap
