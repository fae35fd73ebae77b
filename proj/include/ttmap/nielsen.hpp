#pragma once

#include "train_track.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ttmap {

// sigma = alpha * reversed(beta); alpha and beta legal, ending at the illegal turn.
struct NielsenPath {
  Path alpha, beta;
  int period = 1;

  Path sigma() const { return concat(alpha, reversed(beta)); }
  // junction directions: (reverse of alpha's last edge, reverse of beta's last edge)
  Turn turn() const { return make_turn(rev(alpha.back()), rev(beta.back())); }
};

struct InpSearch {
  GraphSelfMap map;                 // input subdivided so that iNp endpoints are vertices
  std::vector<Path> relabel;        // input direction -> path in map.graph
  std::vector<int> new_vertices;
  std::map<int, std::vector<NielsenPath>> by_period;

  // each path once, at the least period searched
  std::vector<NielsenPath> all() const {
    std::vector<NielsenPath> out;
    std::set<Path> seen;
    for (auto& [p, v] : by_period)
      for (auto& np : v) {
        Path s = np.sigma();
        if (seen.count(s) || seen.count(reversed(s))) continue;
        seen.insert(s);
        out.push_back(np);
      }
    return out;
  }
  std::set<int> endpoints() const {
    std::set<int> out;
    for (auto& np : all()) {
      out.insert(map.graph.tail(np.alpha.front()));
      out.insert(map.graph.tail(np.beta.front()));
    }
    return out;
  }
};

namespace detail {

// Interior points of edges fixed by h = f^p, as (edge, parameter), sorted.
inline std::map<int, std::vector<Length>> interior_fixed_points(const GraphSelfMap& h, const Algebraic& mu) {
  const MarkedGraph& g = h.graph;
  std::map<int, std::vector<Length>> out;
  for (int e = 0; e < g.num_edges(); ++e) {
    const Length& L = g.edges[e].length;
    Length o(0);
    std::vector<Length> ts;
    for (Dir d : h.emap[e]) {
      if (edge_of(d) == e) {
        Length t = forward(d) ? o / (mu - Length(1)) : (L + o) / (mu + Length(1));
        if (t.sign() > 0 && t < L) ts.push_back(t);
      }
      o += g.length(d);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (!ts.empty()) out[e] = ts;
  }
  return out;
}

inline bool is_prefix(const Path& p, const Path& q, size_t from = 0) {
  if (q.size() < from + p.size()) return false;
  return std::equal(p.begin(), p.end(), q.begin() + from);
}

// Pairs (a, b) of legal paths from a common vertex, starting with the two
// directions of an illegal turn, with h(a) = c a and h(b) = c b.
inline std::vector<std::pair<Path, Path>> inp_legs(const GraphSelfMap& h, double bound, size_t max_states) {
  const MarkedGraph& g = h.graph;
  GateStructure gs = gates(h);
  std::vector<double> len(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) len[e] = g.edges[e].length.to_double();
  auto plen = [&](const Path& p) {
    double s = 0;
    for (Dir d : p) s += len[edge_of(d)];
    return s;
  };
  auto legal_path = [&](const Path& p) {
    for (size_t i = 0; i + 1 < p.size(); ++i) {
      Turn t = turn_at(p, i);
      if (degenerate(t) || !gs.legal(t)) return false;
    }
    return true;
  };
  auto continuations = [&](const Path& p) {
    std::vector<Dir> out;
    Dir last = p.back();
    for (Dir e : g.directions_at(g.head(last))) {
      Turn t = make_turn(rev(last), e);
      if (!degenerate(t) && gs.legal(t)) out.push_back(e);
    }
    return out;
  };
  enum Status { DONE, DEAD, FORCE, BRANCH };
  auto side = [&](const Path& a, const Path& ha, size_t k, Path& forced) {
    Path rem(ha.begin() + k, ha.end());
    if (rem.size() > a.size()) {
      if (!is_prefix(a, rem)) return DEAD;
      forced = rem;
      return FORCE;
    }
    if (!is_prefix(rem, a)) return DEAD;
    return rem.size() == a.size() ? DONE : BRANCH;
  };

  std::vector<std::pair<Path, Path>> found;
  std::vector<std::pair<Path, Path>> stack;
  std::set<Turn> ill;
  for (auto& gt : gs.gates)
    for (size_t i = 0; i < gt.size(); ++i)
      for (size_t j = i + 1; j < gt.size(); ++j) ill.insert(make_turn(gt[i], gt[j]));
  for (auto it = ill.rbegin(); it != ill.rend(); ++it) stack.push_back({{it->first}, {it->second}});
  double slack = bound * 1e-9 + 1e-12;
  size_t states = 0;
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    if (++states > max_states) throw std::runtime_error("Nielsen path search exceeded its state budget");
    if (plen(a) + plen(b) > bound + slack) continue;
    if (!legal_path(a) || !legal_path(b)) continue;
    Path ha = h.apply_raw(a), hb = h.apply_raw(b);
    size_t k = 0;
    while (k < ha.size() && k < hb.size() && ha[k] == hb[k]) ++k;
    auto branch = [&](bool on_a) {
      Path& p = on_a ? a : b;
      auto cs = continuations(p);
      for (auto it = cs.rbegin(); it != cs.rend(); ++it) {
        Path q = p;
        q.push_back(*it);
        if (on_a) stack.push_back({q, b});
        else stack.push_back({a, q});
      }
    };
    if (k < ha.size() && k < hb.size()) {
      if (k == 0) continue;
      Path fa, fb;
      Status sa = side(a, ha, k, fa), sb = side(b, hb, k, fb);
      if (sa == DEAD || sb == DEAD) continue;
      if (sa == FORCE) {
        stack.push_back({fa, b});
        continue;
      }
      if (sb == FORCE) {
        stack.push_back({a, fb});
        continue;
      }
      if (sa == DONE && sb == DONE) {
        found.push_back({a, b});
        continue;
      }
      branch(sa == BRANCH);
    } else {
      branch(ha.size() <= hb.size());
    }
  }
  return found;
}

inline std::vector<NielsenPath> search_on(const GraphSelfMap& f, int period, size_t max_states) {
  GraphSelfMap h = iterate(f, period);
  double bound = 2 * f.graph.total_length().to_double() + 2 * f.graph.max_edge_length().to_double();
  std::vector<NielsenPath> out;
  for (auto& [a, b] : inp_legs(h, bound, max_states)) out.push_back({reversed(a), reversed(b), period});
  auto key = [&](const NielsenPath& n) { return f.graph.path_str(n.sigma()); };
  std::sort(out.begin(), out.end(), [&](const NielsenPath& x, const NielsenPath& y) { return key(x) < key(y); });
  return out;
}

}  // namespace detail

inline void require_expanding(const GraphSelfMap& f, Algebraic& lam) {
  auto l = affine_stretch(f);
  if (!l) throw precondition_error("Nielsen path search needs an affine (eigen) metric");
  if (*l <= Algebraic(1)) throw precondition_error("Nielsen path search needs expansion factor > 1");
  lam = *l;
}

// Indivisible Nielsen paths of f^p for each p in periods.
inline InpSearch find_inps(const GraphSelfMap& f, const std::vector<int>& periods = {1, 2},
                           size_t max_states = 5000000) {
  require_train_track(f);
  Algebraic lam;
  require_expanding(f, lam);
  // Endpoints of iNps of f^p lie in Fix(f^p). Subdivide there, search, and keep
  // the f-orbits of the endpoints actually used.
  std::vector<std::pair<int, Length>> used;
  for (int p : periods) {
    if (p < 1) throw std::invalid_argument("period must be positive");
    GraphSelfMap h = iterate(f, p);
    auto cuts = detail::interior_fixed_points(h, lam.pow(p));
    if (cuts.empty()) continue;
    std::vector<std::pair<int, Length>> coord;
    for (auto& [e, ts] : cuts)
      for (auto& t : ts) coord.push_back({e, t});
    MapSubdivision ms = subdivide_map(f, cuts, lam);
    std::map<int, size_t> vidx;
    for (size_t i = 0; i < ms.new_vertices.size(); ++i) vidx[ms.new_vertices[i]] = i;
    auto found = detail::search_on(ms.map, p, max_states);
    std::set<int> ends;
    for (auto& np : found) {
      for (int v : {ms.map.graph.tail(np.alpha.front()), ms.map.graph.tail(np.beta.front())}) {
        int x = v;
        for (int i = 0; i < p; ++i) {
          if (vidx.count(x)) ends.insert(x);
          x = ms.map.vmap[x];
        }
      }
    }
    for (int v : ends) used.push_back(coord[vidx[v]]);
  }
  std::map<int, std::vector<Length>> cuts;
  for (auto& [e, t] : used) cuts[e].push_back(t);
  for (auto& [e, ts] : cuts) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }
  InpSearch r;
  MapSubdivision ms = subdivide_map(f, cuts, lam);
  r.map = ms.map;
  r.relabel = ms.relabel;
  r.new_vertices = ms.new_vertices;
  for (int p : periods) {
    r.by_period[p] = detail::search_on(r.map, p, max_states);
    for (auto& np : r.by_period[p]) {
      Path s = np.sigma();
      if (iterate(r.map, p).apply(s) != s) throw std::logic_error("Nielsen path postcondition failed");
    }
  }
  return r;
}

// Least k <= max_iter such that f^k_#(sigma) is a periodic Nielsen path of
// period at most max_period.
inline std::optional<int> is_pre_nielsen(const GraphSelfMap& f, const Path& sigma, int max_iter, int max_period = 2) {
  f.graph.check_path(sigma);
  Path t = reduce(sigma);
  std::vector<GraphSelfMap> powers;
  for (int p = 1; p <= max_period; ++p) powers.push_back(iterate(f, p));
  for (int k = 0; k <= max_iter; ++k) {
    if (t.empty()) return std::nullopt;
    for (auto& h : powers)
      if (h.apply(t) == t) return k;
    t = f.apply(t);
  }
  return std::nullopt;
}

struct NielsenData {
  InpSearch search;
  std::vector<int> principal;
  bool rotationless = false;
};

inline NielsenData nielsen_data(const GraphSelfMap& f, const std::vector<int>& periods = {1, 2}) {
  NielsenData d;
  d.search = find_inps(f, periods);
  d.principal = principal_vertices(d.search.map, d.search.endpoints());
  d.rotationless = is_rotationless(d.search.map, d.principal);
  return d;
}

struct NielsenClasses {
  GraphSelfMap map;
  std::vector<std::vector<int>> classes;             // fixed vertices of map
  std::vector<NielsenPath> witnesses;                 // period one iNps
};

inline NielsenClasses nielsen_classes(const GraphSelfMap& f) {
  NielsenData d = nielsen_data(f);
  if (!d.rotationless) throw precondition_error("Nielsen classes need a rotationless map");
  NielsenClasses nc;
  nc.map = d.search.map;
  nc.witnesses = d.search.by_period[1];
  const MarkedGraph& g = nc.map.graph;
  std::vector<int> parent(g.num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (auto& np : nc.witnesses) parent[find(g.tail(np.alpha.front()))] = find(g.tail(np.beta.front()));
  std::map<int, std::vector<int>> groups;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (nc.map.vmap[v] == v) groups[find(v)].push_back(v);
  for (auto& [r, vs] : groups) nc.classes.push_back(vs);
  return nc;
}

}  // namespace ttmap
