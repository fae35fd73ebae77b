#pragma once

#include "nielsen.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ttmap {

struct IdealComponent {
  WhiteheadGraph graph;
  Rational index;
  bool anomalous = false;           // exactly two vertices
  std::vector<int> principal;       // principal vertices contributing to it
  std::vector<WhiteheadGraph> local;  // SW(v) pieces, named as in graph
};

struct IdealWhiteheadGraph {
  GraphSelfMap map;                 // the input, subdivided at iNp endpoints
  std::vector<NielsenPath> inps;
  std::vector<int> principal;
  std::vector<IdealComponent> components;

  int num_vertices() const {
    int n = 0;
    for (auto& c : components) n += c.graph.num_vertices();
    return n;
  }
};

// W(phi) as the union of the SW(v) over principal v, with the initial
// directions of the two legs of each iNp identified.
inline IdealWhiteheadGraph ideal_whitehead_graph(const GraphSelfMap& f) {
  NielsenData nd = nielsen_data(f, {1});
  if (!nd.rotationless) throw precondition_error("ideal Whitehead graph needs a rotationless map");
  IdealWhiteheadGraph iw;
  iw.map = nd.search.map;
  iw.inps = nd.search.by_period[1];
  iw.principal = nd.principal;
  const GraphSelfMap& g = iw.map;
  const MarkedGraph& G = g.graph;

  std::vector<Dir> dirs;
  std::map<Dir, int> id;
  for (int v : iw.principal)
    for (Dir d : fixed_directions(g, v)) {
      id[d] = static_cast<int>(dirs.size());
      dirs.push_back(d);
    }
  std::vector<int> parent(dirs.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (auto& np : iw.inps) {
    Dir d1 = np.alpha.front(), d2 = np.beta.front();
    if (!id.count(d1) || !id.count(d2)) throw std::logic_error("iNp leg does not start in a fixed direction");
    parent[find(id[d1])] = find(id[d2]);
  }
  // names: labels of the identified directions, smallest first, joined by "="
  std::map<int, std::vector<std::string>> labels;
  for (size_t i = 0; i < dirs.size(); ++i) labels[find(static_cast<int>(i))].push_back(G.label(dirs[i]));
  std::map<int, std::string> name;
  for (auto& [r, ls] : labels) {
    std::sort(ls.begin(), ls.end());
    std::string s;
    for (auto& l : ls) s += (s.empty() ? "" : "=") + l;
    name[r] = s;
  }
  WhiteheadGraph all;
  std::map<int, int> vidx;
  for (auto& [r, s] : name) vidx[r] = all.add_vertex(s);
  std::vector<std::pair<int, WhiteheadGraph>> sws;
  for (int v : iw.principal) {
    WhiteheadGraph sw = stable_whitehead_graph(g, v);
    WhiteheadGraph named;
    for (auto& n : sw.names) named.add_vertex(name[find(id[G.dir(n)])]);
    named.edges = sw.edges;
    for (auto [a, b] : sw.edges) all.add_edge(vidx[find(id[G.dir(sw.names[a])])], vidx[find(id[G.dir(sw.names[b])])]);
    sws.push_back({v, named});
  }
  for (auto& comp : all.components()) {
    IdealComponent c;
    c.graph = all.induced(comp);
    int n = c.graph.num_vertices();
    c.index = Rational(1) - ratio(n, 2);
    c.anomalous = n == 2;
    for (auto& [v, sw] : sws)
      if (sw.num_vertices() && c.graph.index(sw.names[0]) >= 0) {
        c.principal.push_back(v);
        c.local.push_back(sw);
      }
    iw.components.push_back(c);
  }
  return iw;
}

struct IndexReport {
  std::vector<Rational> index_type;  // increasing
  Rational total;
  Rational bound;                    // 1 - r
  bool inequality_ok = false;
  bool strict = false;
  bool parageometric_label = false;  // equality case
  bool anomalous = false;
};

inline IndexReport index_type(const IdealWhiteheadGraph& iw, int rank) {
  IndexReport r;
  r.total = 0;
  for (auto& c : iw.components) {
    r.index_type.push_back(c.index);
    r.total += c.index;
    r.anomalous = r.anomalous || c.anomalous;
  }
  std::sort(r.index_type.begin(), r.index_type.end());
  r.bound = Rational(1 - rank);
  r.inequality_ok = r.total >= r.bound;
  r.strict = r.total > r.bound;
  r.parageometric_label = r.total == r.bound;
  return r;
}

inline IndexReport index_type(const GraphSelfMap& f) { return index_type(ideal_whitehead_graph(f), f.graph.rank()); }

inline std::vector<WhiteheadGraph> cut_point_decomposition(const WhiteheadGraph& w) {
  if (!w.connected()) throw precondition_error("cut point decomposition needs a connected graph");
  return w.blocks();
}

struct NongeometricEvidence {
  bool no_periodic_inp = false;
  std::vector<int> periods_checked;
  std::optional<bool> expansion_factors_differ;
  double lambda = 0, lambda_inverse = 0;
  std::string verdict;  // "nongeometric" or "inconclusive"
};

// Sufficient conditions for nongeometricity: no periodic iNp, or different
// expansion factors for the map and a representative of the inverse.
inline NongeometricEvidence nongeometric_evidence(const GraphSelfMap& f, const std::optional<GraphSelfMap>& f_inverse = std::nullopt) {
  NongeometricEvidence ev;
  IntMatrix m = transition_matrix(f);
  bool irreducible = strongly_connected(m);
  PFData pf = irreducible ? pf_eigenvalue(m) : PFData{};
  ev.lambda = pf.lambda;
  if (irreducible && is_train_track(f).train_track && pf.lambda > 1) {
    GraphSelfMap n = affine_normalize(f);
    // f^k with k the lcm of all periods of vertices and directions fixes every
    // periodic vertex and direction; periods k and 2k are searched.
    auto dd = direction_dynamics(n);
    long k = 1;
    for (int p : dd.period)
      if (p) k = std::lcm(k, (long)p);
    auto per = periodic_vertices(n);
    for (int v = 0; v < n.graph.num_vertices(); ++v) {
      if (!per[v]) continue;
      int p = 1;
      for (int x = n.vmap[v]; x != v; x = n.vmap[x]) ++p;
      k = std::lcm(k, (long)p);
    }
    ev.periods_checked = {static_cast<int>(k), static_cast<int>(2 * k)};
    ev.no_periodic_inp = find_inps(n, ev.periods_checked).all().empty();
  }
  if (f_inverse && irreducible) {
    IntMatrix mi = transition_matrix(*f_inverse);
    if (strongly_connected(mi)) {
      PFData pi = pf_eigenvalue(mi);
      ev.lambda_inverse = pi.lambda;
      ev.expansion_factors_differ = !same_root(pf.root, pi.root);
    }
  }
  bool ng = ev.no_periodic_inp || (ev.expansion_factors_differ && *ev.expansion_factors_differ);
  ev.verdict = ng ? "nongeometric" : "inconclusive";
  return ev;
}

}  // namespace ttmap
