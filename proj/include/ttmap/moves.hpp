#pragma once

#include "ideal_whitehead.hpp"
#include "io.hpp"
#include "morphism.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttmap {

// ---------------------------------------------------------------- folds

struct MapSplit {
  GraphSelfMap map;
  std::vector<Path> relabel;  // old direction -> new path
  int vertex = -1;            // the new vertex
};

// Subdivides the edge of d so that its initial piece maps onto the first k
// edges of g(d).
inline MapSplit split_map_edge(const GraphSelfMap& f, Dir d, size_t k) {
  const MarkedGraph& g = f.graph;
  Path im = f.image(d);
  if (k == 0 || k >= im.size()) throw std::domain_error("split index out of range");
  Path pre(im.begin(), im.begin() + k), rest(im.begin() + k, im.end());
  Length t = g.length(d) * g.path_length(pre) / g.path_length(im);
  Subdivision sd = split_direction(g, d, t);
  GraphSelfMap h{sd.graph, f.vmap, {}};
  h.vmap.push_back(g.head(pre.back()));
  h.emap.resize(h.graph.num_edges());
  for (int e = 0; e < g.num_edges(); ++e)
    if (e != edge_of(d)) h.emap[e] = apply_relabel(sd.relabel, f.emap[e]);
  const Path& pieces = sd.relabel[d];
  for (int i = 0; i < 2; ++i) {
    Path img = apply_relabel(sd.relabel, i == 0 ? pre : rest);
    Dir pc = pieces[i];
    h.emap[edge_of(pc)] = forward(pc) ? img : reversed(img);
  }
  h.validate();
  return {h, sd.relabel, sd.new_vertices[0]};
}

struct MapFold {
  GraphSelfMap map;
  GraphMorphism p;  // input graph -> output graph
  Dir folded;       // the identified edge, from the fold vertex
};

inline MapFold fold(const GraphSelfMap& f, Dir d1, Dir d2) {
  const MarkedGraph& g = f.graph;
  if (d1 == d2 || edge_of(d1) == edge_of(d2)) throw precondition_error("fold needs two distinct edges");
  if (g.tail(d1) != g.tail(d2))
    throw precondition_error(g.label(d1) + " and " + g.label(d2) + " do not start at a common vertex");
  if (f.image(d1) != f.image(d2))
    throw precondition_error("fold needs g(" + g.label(d1) + ") = g(" + g.label(d2) + "), got " +
                             g.path_str(f.image(d1)) + " and " + g.path_str(f.image(d2)));
  Identification id = identify(g, d1, d2);
  GraphSelfMap h{id.graph, std::vector<int>(id.graph.num_vertices(), -1), std::vector<Path>(id.graph.num_edges())};
  for (int v = 0; v < g.num_vertices(); ++v) {
    int img = id.vert[f.vmap[v]];
    if (h.vmap[id.vert[v]] >= 0 && h.vmap[id.vert[v]] != img) throw std::logic_error("fold vertex images disagree");
    h.vmap[id.vert[v]] = img;
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    Dir nd = id.dir[2 * e];
    Path img = reduce(detail::map_dirs(id.dir, f.emap[e]));
    h.emap[edge_of(nd)] = forward(nd) ? img : reversed(img);
  }
  h.validate();
  MapFold r{h, {g, id.graph, id.vert, {}}, id.dir[d1]};
  for (int e = 0; e < g.num_edges(); ++e) r.p.emap.push_back({id.dir[2 * e]});
  return r;
}

// Subdivide as needed and fold the initial segments of d1 and d2 whose images
// are the first `limit` edges of the common image prefix (all of it by default).
inline MapFold fold_maximal(const GraphSelfMap& f, Dir d1, Dir d2, size_t limit = SIZE_MAX) {
  const MarkedGraph& g = f.graph;
  if (g.tail(d1) != g.tail(d2) || d1 == d2)
    throw precondition_error(g.label(d1) + " and " + g.label(d2) + " are not distinct directions at one vertex");
  auto common = [](const Path& a, const Path& b) {
    size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    return k;
  };
  size_t k = common(f.image(d1), f.image(d2));
  if (k == 0) throw precondition_error("Dg(" + g.label(d1) + ") != Dg(" + g.label(d2) + ")");
  k = std::min(k, limit);
  GraphSelfMap h = f;
  std::vector<Path> rel(g.num_dirs());
  for (Dir d = 0; d < g.num_dirs(); ++d) rel[d] = {d};
  Dir a = d1, b = d2;
  auto cut = [&](Dir x, size_t at) {
    MapSplit s = split_map_edge(h, x, at);
    for (auto& p : rel) p = apply_relabel(s.relabel, p);
    a = s.relabel[a].front();
    b = s.relabel[b].front();
    h = std::move(s.map);
  };
  if (k < h.image(a).size()) cut(a, k);
  k = h.image(a).size();
  if (k < h.image(b).size()) cut(b, k);
  MapFold r = fold(h, a, b);
  GraphMorphism p{g, r.map.graph, {}, {}};
  for (int v = 0; v < g.num_vertices(); ++v) p.vmap.push_back(r.p.vmap[v]);
  for (int e = 0; e < g.num_edges(); ++e) p.emap.push_back(r.p.apply(rel[2 * e]));
  r.p = p;
  return r;
}

// The Nielsen path through the unique illegal turn of sigma.
inline NielsenPath split_at_illegal_turn(const GraphSelfMap& f, const Path& sigma, int period = 1) {
  GateStructure gs = gates(f);
  std::optional<size_t> at;
  for (size_t i = 0; i + 1 < sigma.size(); ++i)
    if (!gs.legal(turn_at(sigma, i))) {
      if (at) throw std::logic_error("path has more than one illegal turn");
      at = i;
    }
  if (!at) throw std::logic_error("path has no illegal turn");
  NielsenPath np;
  np.alpha = Path(sigma.begin(), sigma.begin() + *at + 1);
  np.beta = reversed(Path(sigma.begin() + *at + 1, sigma.end()));
  np.period = period;
  return np;
}

struct Collapse {
  GraphSelfMap map;
  GraphMorphism p;
};

// Identifies E1 with E2 for a Nielsen path E1 ~E2 of period one, or of period
// two reversed by g.
inline Collapse nielsen_collapse(const GraphSelfMap& f, const NielsenPath& np) {
  const MarkedGraph& g = f.graph;
  if (np.alpha.size() != 1 || np.beta.size() != 1)
    throw precondition_error("collapse needs a Nielsen path E1 ~E2 of two single edges; fold or subdivide first (got " +
                             g.path_str(np.sigma()) + ")");
  Dir e1 = np.alpha[0], e2 = np.beta[0];
  if (edge_of(e1) == edge_of(e2) || g.head(e1) != g.head(e2))
    throw precondition_error("E1 and E2 must be distinct edges with a common terminal vertex");
  if (g.length(e1) != g.length(e2)) throw precondition_error("E1 and E2 have different lengths");
  Path g1 = f.image(e1), g2 = f.image(e2);
  bool ok = (g1.front() == e1 && g2.front() == e2) || (g1.front() == e2 && g2.front() == e1);
  if (!ok || !std::equal(g1.begin() + 1, g1.end(), g2.begin() + 1, g2.end()))
    throw precondition_error(g.path_str(np.sigma()) + " is not a Nielsen path of period one or reversed of period two");
  Identification id = identify(g, rev(e1), rev(e2));
  GraphSelfMap h{id.graph, std::vector<int>(id.graph.num_vertices(), -1), std::vector<Path>(id.graph.num_edges())};
  for (int v = 0; v < g.num_vertices(); ++v) {
    int img = id.vert[f.vmap[v]];
    if (h.vmap[id.vert[v]] >= 0 && h.vmap[id.vert[v]] != img) throw std::logic_error("collapse vertex images disagree");
    h.vmap[id.vert[v]] = img;
  }
  std::vector<bool> set(h.graph.num_edges(), false);
  for (int e = 0; e < g.num_edges(); ++e) {
    Dir nd = id.dir[2 * e];
    Path img = reduce(detail::map_dirs(id.dir, f.emap[e]));
    if (!forward(nd)) img = reversed(img);
    if (set[edge_of(nd)] && h.emap[edge_of(nd)] != img) throw std::logic_error("collapse edge images disagree");
    h.emap[edge_of(nd)] = img;
    set[edge_of(nd)] = true;
  }
  h.validate();
  Collapse c{h, {g, id.graph, id.vert, {}}};
  for (int e = 0; e < g.num_edges(); ++e) c.p.emap.push_back({id.dir[2 * e]});
  return c;
}

struct CollapseRun {
  GraphSelfMap map;
  std::vector<std::string> steps;
  int folds = 0;
};

// Folds at the illegal turn of an iNp until both legs are single edges, then
// collapses it.
inline CollapseRun reduce_and_collapse(const GraphSelfMap& f, NielsenPath np, int max_folds = 1000) {
  CollapseRun run{f, {}, 0};
  while (np.alpha.size() > 1 || np.beta.size() > 1) {
    if (run.folds++ >= max_folds) throw std::logic_error("Nielsen path did not shrink to two edges");
    const MarkedGraph& g = run.map.graph;
    Dir d1 = rev(np.alpha.back()), d2 = rev(np.beta.back());
    run.steps.push_back("fold " + g.label(d1) + " " + g.label(d2));
    MapFold mf = fold_maximal(run.map, d1, d2);
    Path s = mf.p.apply(np.sigma());
    run.map = mf.map;
    np = split_at_illegal_turn(run.map, s, np.period);
  }
  run.steps.push_back("collapse " + run.map.graph.path_str(np.sigma()));
  run.map = nielsen_collapse(run.map, np).map;
  return run;
}

// ---------------------------------------------------------------- splits

namespace detail {

// Checks X1 u X2 = directions at w, X1 n X2 = {x}; returns x.
inline Dir check_partition(const MarkedGraph& g, int w, const std::set<Dir>& X1, const std::set<Dir>& X2) {
  auto ds = g.directions_at(w);
  std::set<Dir> all(ds.begin(), ds.end()), un;
  std::set_union(X1.begin(), X1.end(), X2.begin(), X2.end(), std::inserter(un, un.end()));
  if (un != all) throw precondition_error("X1 and X2 must cover exactly the directions at " + g.vertices[w]);
  std::vector<Dir> in;
  std::set_intersection(X1.begin(), X1.end(), X2.begin(), X2.end(), std::back_inserter(in));
  if (in.size() != 1) throw precondition_error("X1 and X2 must meet in exactly one direction");
  if (X1.size() < 2 || X2.size() < 2) throw precondition_error("X1 and X2 must both be nontrivial");
  return in[0];
}

inline std::set<Dir> dir_set(const std::vector<Dir>& v) { return {v.begin(), v.end()}; }

// Every edge of W lies in one side.
inline void check_whitehead_sides(const MarkedGraph& g, const WhiteheadGraph& W, const std::set<Dir>& X1,
                                  const std::set<Dir>& X2) {
  for (auto [a, b] : W.edges) {
    Dir da = g.dir(W.names[a]), db = g.dir(W.names[b]);
    bool in1 = X1.count(da) && X1.count(db), in2 = X2.count(da) && X2.count(db);
    if (!in1 && !in2)
      throw precondition_error("Whitehead graph edge {" + W.names[a] + "," + W.names[b] + "} crosses the partition");
  }
}

struct VertexSplit {
  MarkedGraph graph;
  GraphMorphism p;     // graph -> input
  std::vector<Path> q;  // input direction -> path in graph
  int w1 = -1, w2 = -1;
  Dir e1 = -1, e2 = -1;
};

// Doubles the edge of x and moves the directions of X2 \ {x} to a new vertex.
inline VertexSplit split_vertex(const MarkedGraph& g, int w, Dir x, const std::set<Dir>& X2) {
  VertexSplit s;
  MarkedGraph& h = s.graph;
  h = g;
  int n = g.num_vertices(), m = g.num_edges(), ex = edge_of(x);
  s.w1 = w;
  s.w2 = n;
  h.vertices[w] = g.fresh_vertex_name(g.vertices[w] + "_1");
  h.vertices.push_back(g.fresh_vertex_name(g.vertices[w] + "_2"));
  for (Dir d : g.directions_at(w))
    if (d != x && X2.count(d)) (forward(d) ? h.edges[edge_of(d)].from : h.edges[edge_of(d)].to) = s.w2;
  Edge e2 = h.edges[ex];
  (forward(x) ? e2.from : e2.to) = s.w2;
  h.edges[ex].label = g.fresh_edge_name(g.edges[ex].label + "_1");
  e2.label = g.fresh_edge_name(g.edges[ex].label + "_2");
  h.edges.push_back(e2);
  s.e1 = x;
  s.e2 = 2 * m + (x & 1);

  s.p = {h, g, {}, {}};
  for (int v = 0; v <= n; ++v) s.p.vmap.push_back(v == n ? w : v);
  for (int e = 0; e <= m; ++e) s.p.emap.push_back({2 * (e == m ? ex : e)});

  Path to2{s.e1, rev(s.e2)}, from2{s.e2, rev(s.e1)};
  s.q.resize(g.num_dirs());
  for (Dir d = 0; d < g.num_dirs(); ++d) {
    Path p;
    if (h.tail(d) == s.w2) p = to2;
    p.push_back(d);
    if (h.head(d) == s.w2) p = concat(p, from2);
    s.q[d] = p;
  }
  h.marking.clear();
  for (auto& l : g.marking) h.marking.push_back(reduce(apply_relabel(s.q, l)));
  return s;
}

}  // namespace detail

struct TTSplit {
  GraphSelfMap map;
  GraphMorphism p;  // map.graph -> input graph
  int w1 = -1, w2 = -1;
  Dir e1 = -1, e2 = -1;  // from w1, w2 to their common terminal vertex
  bool nielsen = false;  // the input fixes w: E1 ~E2 is an iNp; otherwise g(E1) = g(E2)

  NielsenPath path() const { return {{e1}, {e2}, 1}; }
};

// Splits the vertex w along X1 u X2 and lifts the map.
inline TTSplit tt_split(const GraphSelfMap& f, int w, const std::vector<Dir>& X1v, const std::vector<Dir>& X2v) {
  const MarkedGraph& g = f.graph;
  if (w < 0 || w >= g.num_vertices()) throw std::out_of_range("unknown vertex");
  std::set<Dir> X1 = detail::dir_set(X1v), X2 = detail::dir_set(X2v);
  Dir x = detail::check_partition(g, w, X1, X2);
  detail::check_whitehead_sides(g, local_whitehead_graph(f, w), X1, X2);
  auto side_of = [&](const std::set<Dir>& S) {
    if (std::includes(X1.begin(), X1.end(), S.begin(), S.end())) return 1;
    if (std::includes(X2.begin(), X2.end(), S.begin(), S.end())) return 2;
    return 0;
  };
  auto labels = [&](const std::set<Dir>& S) {
    std::string s;
    for (Dir d : S) s += (s.empty() ? "" : ",") + g.label(d);
    return "{" + s + "}";
  };
  std::vector<int> vside(g.num_vertices(), 0);
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (v == w || f.vmap[v] != w) continue;
    std::set<Dir> S;
    for (Dir d : g.directions_at(v)) S.insert(f.Dg(d));
    vside[v] = side_of(S);
    if (!vside[v])
      throw precondition_error("vertex side hypothesis fails at " + g.vertices[v] + ": Dg(W) = " + labels(S) +
                               " lies in neither side");
  }
  bool fixed = f.vmap[w] == w;
  int sigma1 = 1, sigma2 = 2;
  if (fixed) {
    if (f.Dg(x) != x) throw precondition_error("side permutation hypothesis fails: Dg(" + g.label(x) + ") != " + g.label(x));
    std::set<Dir> I1, I2;
    for (Dir d : X1) I1.insert(f.Dg(d));
    for (Dir d : X2) I2.insert(f.Dg(d));
    int s1 = side_of(I1), s2 = side_of(I2);
    if (s1 == 0 || s2 == 0 || s1 == s2)
      throw precondition_error("side permutation hypothesis fails: Dg does not permute the sides, Dg(X1) = " + labels(I1) +
                               ", Dg(X2) = " + labels(I2));
    sigma1 = s1, sigma2 = s2;
  }

  detail::VertexSplit s = detail::split_vertex(g, w, x, X2);
  const MarkedGraph& G = s.graph;
  TTSplit r;
  r.w1 = s.w1, r.w2 = s.w2, r.e1 = s.e1, r.e2 = s.e2, r.nielsen = fixed, r.p = s.p;
  GraphSelfMap& h = r.map;
  h.graph = G;
  auto lift_vertex = [&](int v) { return v; };
  for (int v = 0; v < G.num_vertices(); ++v) {
    if (v == s.w1 || v == s.w2) {
      int sd = v == s.w1 ? sigma1 : sigma2;
      h.vmap.push_back(fixed ? (sd == 1 ? s.w1 : s.w2) : lift_vertex(f.vmap[w]));
    } else if (f.vmap[v] == w) {
      h.vmap.push_back(vside[v] == 2 ? s.w2 : s.w1);
    } else {
      h.vmap.push_back(lift_vertex(f.vmap[v]));
    }
  }
  auto lift = [&](const Path& q, int start, int end, const std::string& what) {
    Path out;
    int cur = start;
    for (size_t i = 0; i < q.size(); ++i) {
      Dir d = q[i], l = d;
      if (d == x) {
        l = cur == s.w2 ? s.e2 : s.e1;
      } else if (d == rev(x)) {
        int target = end;
        if (i + 1 < q.size()) target = G.tail(q[i + 1] == rev(x) ? rev(s.e1) : q[i + 1]);
        l = target == s.w2 ? rev(s.e2) : rev(s.e1);
      }
      if (G.tail(l) != cur)
        throw precondition_error("image of " + what + " does not lift: a turn at " + g.vertices[w] +
                                 " crosses the partition");
      out.push_back(l);
      cur = G.head(l);
    }
    if (cur != end) throw precondition_error("image of " + what + " does not lift to the required endpoint");
    return out;
  };
  for (int e = 0; e < G.num_edges(); ++e) {
    Dir pd = s.p.emap[e][0];
    h.emap.push_back(lift(f.image(pd), h.vmap[G.edges[e].from], h.vmap[G.edges[e].to], G.edges[e].label));
  }
  h.validate();
  for (int e = 0; e < G.num_edges(); ++e)
    if (s.p.apply(h.emap[e]) != f.image(s.p.emap[e][0])) throw std::logic_error("split does not commute with p");
  return r;
}

// The inverse of a split: a Nielsen collapse or a fold.
inline GraphSelfMap undo_split(const TTSplit& s) {
  if (s.nielsen) return nielsen_collapse(s.map, s.path()).map;
  return fold(s.map, rev(s.e1), rev(s.e2)).map;
}

struct MetricSplit {
  MarkedGraph graph;       // H
  MarkedGraph subdivided;  // G with a vertex at distance eps along d
  GraphMorphism h;         // H -> subdivided
  int y1 = -1, y2 = -1, r = -1;
  Dir d1 = -1, d2 = -1, d3 = -1;  // D_1, D_2 from y_1, y_2; D_3 from r
  WhiteheadGraph w1, w2;           // lifted local Whitehead graphs at y_1, y_2
};

inline MetricSplit metric_split(const GraphSelfMap& f, int y, const std::vector<Dir>& X1v, const std::vector<Dir>& X2v,
                                const Length& eps) {
  const MarkedGraph& g = f.graph;
  if (y < 0 || y >= g.num_vertices()) throw std::out_of_range("unknown vertex");
  std::set<Dir> X1 = detail::dir_set(X1v), X2 = detail::dir_set(X2v);
  Dir x = detail::check_partition(g, y, X1, X2);
  if (eps.sign() <= 0 || !(eps < g.length(x))) throw std::domain_error("split length out of range");
  WhiteheadGraph W = local_whitehead_graph(f, y);
  detail::check_whitehead_sides(g, W, X1, X2);

  Subdivision sd = split_direction(g, x, eps);
  auto first = [&](Dir d) { return sd.relabel[d].front(); };
  std::set<Dir> S2;
  for (Dir d : X2) S2.insert(first(d));
  Dir xs = first(x);
  detail::VertexSplit s = detail::split_vertex(sd.graph, y, xs, S2);

  MetricSplit m;
  m.subdivided = sd.graph;
  m.graph = s.graph;
  m.h = s.p;
  m.h.source = s.graph;
  m.y1 = s.w1, m.y2 = s.w2, m.r = sd.new_vertices[0];
  m.d1 = s.e1, m.d2 = s.e2;
  m.d3 = sd.relabel[x][1];
  MarkedGraph& H = m.graph;
  std::string stem = g.edges[edge_of(x)].label;
  std::set<std::string> taken;
  for (int e = 0; e < H.num_edges(); ++e)
    if (e != edge_of(m.d1) && e != edge_of(m.d2) && e != edge_of(m.d3)) taken.insert(H.edges[e].label);
  auto name = [&](const std::string& n) {
    std::string c = n;
    for (int k = 2; taken.count(c); ++k) c = n + "'" + std::to_string(k);
    taken.insert(c);
    return c;
  };
  H.edges[edge_of(m.d1)].label = name(stem + "_1");
  H.edges[edge_of(m.d2)].label = name(stem + "_2");
  H.edges[edge_of(m.d3)].label = name(stem + "_3");
  H.vertices[m.r] = "r";
  for (int v = 0; v < H.num_vertices(); ++v)
    if (v != m.r && H.vertices[v] == "r") H.vertices[m.r] = H.fresh_vertex_name("r");
  m.h.source = H;

  for (int i = 1; i <= 2; ++i) {
    int yi = i == 1 ? m.y1 : m.y2;
    const std::set<Dir>& Xi = i == 1 ? X1 : X2;
    WhiteheadGraph wi;
    for (Dir d : H.directions_at(yi)) wi.add_vertex(H.label(d));
    auto lifted = [&](Dir d) { return H.label(d == x ? (i == 1 ? m.d1 : m.d2) : first(d)); };
    for (auto [a, b] : W.edges) {
      Dir da = g.dir(W.names[a]), db = g.dir(W.names[b]);
      if (Xi.count(da) && Xi.count(db)) wi.add_edge(wi.index(lifted(da)), wi.index(lifted(db)));
    }
    (i == 1 ? m.w1 : m.w2) = wi;
  }
  H.validate();
  return m;
}

struct ObstructionItem {
  std::string vertex;
  std::vector<std::string> required;  // Dg of the directions at the vertex
  bool in1 = false, in2 = false;
};

struct ObstructionReport {
  std::vector<std::string> stable1, stable2;  // periodic directions of X1, X2
  std::vector<ObstructionItem> items;
  bool obstruction = false;
};

// For each u != y with g(u) = y, whether Dg(directions at u) fits in a single
// stable side.
inline ObstructionReport obstruction_report(const GraphSelfMap& f, int y, const std::vector<Dir>& X1v,
                                            const std::vector<Dir>& X2v) {
  const MarkedGraph& g = f.graph;
  std::set<Dir> X1 = detail::dir_set(X1v), X2 = detail::dir_set(X2v);
  detail::check_partition(g, y, X1, X2);
  auto dd = direction_dynamics(f);
  std::set<Dir> S1, S2;
  for (Dir d : X1)
    if (dd.periodic[d]) S1.insert(d);
  for (Dir d : X2)
    if (dd.periodic[d]) S2.insert(d);
  auto names = [&](const std::set<Dir>& S) {
    std::vector<std::string> out;
    for (Dir d : S) out.push_back(g.label(d));
    std::sort(out.begin(), out.end());
    return out;
  };
  ObstructionReport r;
  r.stable1 = names(S1);
  r.stable2 = names(S2);
  for (int u = 0; u < g.num_vertices(); ++u) {
    if (u == y || f.vmap[u] != y) continue;
    std::set<Dir> R;
    for (Dir d : g.directions_at(u)) R.insert(f.Dg(d));
    ObstructionItem it;
    it.vertex = g.vertices[u];
    it.required = names(R);
    it.in1 = std::includes(S1.begin(), S1.end(), R.begin(), R.end());
    it.in2 = std::includes(S2.begin(), S2.end(), R.begin(), R.end());
    r.obstruction = r.obstruction || (!it.in1 && !it.in2);
    r.items.push_back(it);
  }
  return r;
}

// ---------------------------------------------------------------- drivers

inline int gate_excess(const GraphSelfMap& f, const GateStructure& gs, int v) {
  return f.graph.valence(v) - gs.num_gates(v);
}

// Sum over principal vertices and nonprincipal vertices with >= 3 gates.
inline int total_gate_excess(const GraphSelfMap& f, const std::vector<int>& principal) {
  GateStructure gs = gates(f);
  std::set<int> P(principal.begin(), principal.end());
  int t = 0;
  for (int v = 0; v < f.graph.num_vertices(); ++v)
    if (P.count(v) || gs.num_gates(v) >= 3) t += gate_excess(f, gs, v);
  return t;
}

struct GateExcessRun {
  GraphSelfMap map;
  std::vector<int> excess;  // total gate excess before each fold and at the end
  std::vector<std::string> steps;
};

inline GateExcessRun reduce_gate_excess(const GraphSelfMap& f, int max_folds = 1000) {
  NielsenData nd = nielsen_data(f, {1});
  if (!nd.rotationless) throw precondition_error("gate excess reduction needs a rotationless map");
  GateExcessRun run{nd.search.map, {}, {}};
  for (int it = 0;; ++it) {
    const GraphSelfMap& g = run.map;
    const MarkedGraph& G = g.graph;
    NielsenData cur = it == 0 ? nd : nielsen_data(g, {1});
    int t = total_gate_excess(g, cur.principal);
    run.excess.push_back(t);
    if (t == 0) break;
    if (it >= max_folds) throw std::logic_error("gate excess reduction did not terminate");
    GateStructure gs = gates(g);
    auto dg_pair = [&](int v) -> std::optional<std::pair<Dir, Dir>> {
      auto ds = G.directions_at(v);
      for (size_t i = 0; i < ds.size(); ++i)
        for (size_t j = i + 1; j < ds.size(); ++j)
          if (g.Dg(ds[i]) == g.Dg(ds[j])) return std::make_pair(ds[i], ds[j]);
      return std::nullopt;
    };
    std::optional<std::pair<Dir, Dir>> pr;
    int at = -1;
    for (int v : cur.principal)
      if ((pr = dg_pair(v))) {
        at = v;
        break;
      }
    if (!pr) {
      std::set<int> P(cur.principal.begin(), cur.principal.end());
      for (int v = 0; v < G.num_vertices() && at < 0; ++v) {
        if (P.count(v) || gs.num_gates(v) < 3 || gate_excess(g, gs, v) == 0) continue;
        int u = v;
        for (int k = 0; k <= G.num_vertices() && gate_excess(g, gs, g.vmap[u]) > 0; ++k) u = g.vmap[u];
        if (gate_excess(g, gs, g.vmap[u]) > 0) throw std::logic_error("orbit never reaches zero gate excess");
        at = u;
        pr = dg_pair(u);
      }
    }
    if (!pr) throw std::logic_error("positive gate excess without a foldable pair");
    run.steps.push_back("fold " + G.label(pr->first) + " " + G.label(pr->second) + " at " + G.vertices[at]);
    // one image edge at a time, so the fold point is a new vertex with two gates
    run.map = fold_maximal(g, pr->first, pr->second, 1).map;
  }
  return run;
}

struct FinestRun {
  GraphSelfMap map;
  std::vector<std::string> steps;
  std::vector<int> principal_counts;
  int bound = 0;  // edges of the ideal Whitehead graph
};

// Repeated inverse folds and inverse Nielsen collapses until no stable
// Whitehead graph has a cut vertex.
inline FinestRun finest_decomposition(const GraphSelfMap& f, int max_steps = 500) {
  GateExcessRun ge = reduce_gate_excess(f);
  FinestRun run{ge.map, ge.steps, {}, 0};
  for (auto& c : ideal_whitehead_graph(run.map).components) run.bound += c.graph.num_edges();
  auto by_name = [](const std::vector<std::string>& names) {
    std::vector<int> idx(names.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return detail::natural_less(names[a], names[b]); });
    return idx;
  };
  for (int step = 0;; ++step) {
    const GraphSelfMap& g = run.map;
    const MarkedGraph& G = g.graph;
    NielsenData nd = nielsen_data(g, {1});
    if (!nd.rotationless) throw std::logic_error("driver lost the rotationless property");
    int np = static_cast<int>(nd.principal.size());
    run.principal_counts.push_back(np);
    if (np > run.bound) throw std::logic_error("principal vertex count exceeds the singular leaf bound");
    if (step >= max_steps) throw std::logic_error("finest decomposition did not terminate");

    int w = -1;
    std::string cutname;
    std::vector<std::string> pnames;
    for (int v : nd.principal) pnames.push_back(G.vertices[v]);
    for (int i : by_name(pnames)) {
      int v = nd.principal[i];
      WhiteheadGraph sw = stable_whitehead_graph(g, v);
      if (!sw.connected()) throw std::logic_error("stable Whitehead graph at " + G.vertices[v] + " is disconnected");
      auto cuts = sw.cut_vertices();
      if (cuts.empty()) continue;
      std::vector<std::string> cn;
      for (int c : cuts) cn.push_back(sw.names[c]);
      w = v;
      cutname = cn[by_name(cn)[0]];
      break;
    }
    if (w < 0) break;

    WhiteheadGraph W = local_whitehead_graph(g, w);
    Dir x = G.dir(cutname);
    int xi = W.index(cutname);
    std::vector<int> rest;
    for (int i = 0; i < W.num_vertices(); ++i)
      if (i != xi) rest.push_back(i);
    WhiteheadGraph Wx = W.induced(rest);
    auto comps = Wx.components();
    // Sides are fixed by the periodic directions; a component with none
    // follows the side of its eventual periodic image.
    std::set<Dir> periodic;
    for (auto& n : stable_whitehead_graph(g, w).names) periodic.insert(G.dir(n));
    std::vector<std::string> pn;
    for (auto& n : Wx.names)
      if (periodic.count(G.dir(n))) pn.push_back(n);
    std::string least = pn[by_name(pn)[0]];
    std::map<Dir, int> side;
    for (auto& c : comps) {
      bool has = false, first = false;
      for (int i : c) has |= periodic.count(G.dir(Wx.names[i])) > 0, first |= Wx.names[i] == least;
      if (has)
        for (int i : c) side[G.dir(Wx.names[i])] = first ? 1 : 2;
    }
    for (auto& c : comps) {
      Dir d = G.dir(Wx.names[c[0]]);
      if (side.count(d)) continue;
      Dir e = d;
      for (int i = 0; i <= 2 * G.num_edges() && !periodic.count(e); ++i) e = g.Dg(e);
      int sd = side.count(e) ? side[e] : 1;
      for (int i : c) side[G.dir(Wx.names[i])] = sd;
    }
    std::set<Dir> X1{x}, X2{x};
    for (auto& [d, sd] : side) (sd == 1 ? X1 : X2).insert(d);
    auto side_of = [&](const std::set<Dir>& S) {
      if (std::includes(X1.begin(), X1.end(), S.begin(), S.end())) return 1;
      if (std::includes(X2.begin(), X2.end(), S.begin(), S.end())) return 2;
      return 0;
    };

    // V with the transported directions Dg^i at each member
    std::map<int, std::map<Dir, Dir>> V;
    for (int v = 0; v < G.num_vertices(); ++v) {
      if (v == w) continue;
      std::map<Dir, Dir> img;
      for (Dir d : G.directions_at(v)) img[d] = d;
      int u = v;
      for (int i = 1; i <= G.num_vertices(); ++i) {
        for (auto& [d, e] : img) e = g.Dg(e);
        u = g.vmap[u];
        if (u == w) break;
      }
      if (u != w) continue;
      std::set<Dir> S;
      for (auto& [d, e] : img) S.insert(e);
      if (!side_of(S)) V[v] = img;
    }

    TTSplit sp;
    if (V.empty()) {
      run.steps.push_back("split " + G.vertices[w] + " at " + cutname);
      sp = tt_split(g, w, {X1.begin(), X1.end()}, {X2.begin(), X2.end()});
    } else {
      std::set<int> hit;
      for (auto& [u, img] : V) hit.insert(g.vmap[u]);
      std::vector<std::string> cand;
      std::vector<int> cv;
      for (auto& [u, img] : V)
        if (!hit.count(u)) cand.push_back(G.vertices[u]), cv.push_back(u);
      if (cv.empty()) throw std::logic_error("every member of V is an image of another");
      int v = cv[by_name(cand)[0]];
      std::set<Dir> Y1, Y2;
      for (auto& [d, e] : V[v]) {
        if (X1.count(e)) Y1.insert(d);
        if (X2.count(e)) Y2.insert(d);
      }
      run.steps.push_back("inverse fold at " + G.vertices[v]);
      sp = tt_split(g, v, {Y1.begin(), Y1.end()}, {Y2.begin(), Y2.end()});
    }
    run.map = sp.map;
  }
  return run;
}

// ---------------------------------------------------------------- factorization

struct FoldMove {
  std::string kind;  // full_fold, partial_fold, nielsen_collapse, tt_split, metric_split
  std::string d1, d2;
  Length length;
};

struct FoldSequence {
  MarkedGraph source, target;
  std::vector<MarkedGraph> graphs;    // graphs[0] = source; graphs[k + 1] after moves[k]
  std::vector<FoldMove> moves;
  std::vector<GraphMorphism> folds;   // graphs[k] -> graphs[k + 1]
  GraphMorphism residual;             // graphs.back() -> target, an isometry
  bool complete = false;

  // The composite graphs[0] -> target.
  GraphMorphism composite() const {
    GraphMorphism c = residual;
    for (auto it = folds.rbegin(); it != folds.rend(); ++it) c = compose(c, *it);
    return c;
  }
};

// Number of edgelets of the source: pieces of its edges after cutting at
// preimages of target vertices of valence other than 2 and of images of
// source vertices.
inline int combinatorial_length(const GraphMorphism& h) {
  const MarkedGraph& s = h.source;
  const MarkedGraph& t = h.target;
  std::vector<bool> vertex(t.num_vertices(), false);
  for (int v = 0; v < t.num_vertices(); ++v) vertex[v] = t.valence(v) != 2;
  for (int v = 0; v < s.num_vertices(); ++v) vertex[h.vmap[v]] = true;
  int n = 0;
  for (int e = 0; e < s.num_edges(); ++e) {
    const Path& p = h.emap[e];
    ++n;
    for (size_t i = 0; i + 1 < p.size(); ++i) n += vertex[t.head(p[i])] ? 1 : 0;
  }
  return n;
}

// Whether h is an isometry in the metric sense: an immersion covering every
// target edge exactly once, isometric on edges.
inline bool metric_isometry(const GraphMorphism& h) {
  if (!h.edge_isometric()) return false;
  const MarkedGraph& s = h.source;
  for (int v = 0; v < s.num_vertices(); ++v) {
    std::set<Dir> seen;
    for (Dir d : s.directions_at(v))
      if (!seen.insert(h.D(d)).second) return false;
  }
  std::vector<int> cover(h.target.num_edges(), 0);
  for (auto& p : h.emap)
    for (Dir d : p) ++cover[edge_of(d)];
  return std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; });
}

namespace detail {

// The map from the folded graph: each piece of an old edge takes the matching
// stretch of the old edge's image.
inline GraphMorphism residual_after_fold(const GraphMorphism& h, const GraphFold& gf) {
  const MarkedGraph& F = gf.graph;
  const MarkedGraph& T = h.target;
  GraphMorphism r{F, T, std::vector<int>(F.num_vertices(), -1), std::vector<Path>(F.num_edges())};
  std::vector<bool> set(F.num_edges(), false);
  for (int v = 0; v < h.source.num_vertices(); ++v) r.vmap[gf.map.vmap[v]] = h.vmap[v];
  for (int e = 0; e < h.source.num_edges(); ++e) {
    const Path& img = h.emap[e];
    const Path& pieces = gf.map.emap[e];
    size_t pos = 0;
    for (Dir pc : pieces) {
      Length need = F.length(pc), got(0);
      size_t q = pos;
      while (q < img.size() && got < need) got += T.length(img[q++]);
      if (got != need) throw precondition_error("fold point does not map to a vertex");
      Path seg(img.begin() + pos, img.begin() + q);
      Path fw = forward(pc) ? seg : reversed(seg);
      if (set[edge_of(pc)] && r.emap[edge_of(pc)] != fw) throw std::logic_error("folded edges have different images");
      r.emap[edge_of(pc)] = fw;
      set[edge_of(pc)] = true;
      int hv = F.head(pc);
      r.vmap[hv] = T.head(seg.back());
      pos = q;
    }
  }
  r.validate();
  return r;
}

}  // namespace detail

// Complete Stallings folds of an edge isometry, ending at an isometry.
inline FoldSequence stallings_factorize(const GraphMorphism& h0, int max_folds = 10000) {
  h0.validate();
  if (!h0.edge_isometric()) throw precondition_error("factorization needs an edge isometry");
  FoldSequence fs;
  fs.source = h0.source;
  fs.target = h0.target;
  fs.graphs.push_back(h0.source);
  GraphMorphism cur = h0;
  int clen = combinatorial_length(cur);
  while (true) {
    const MarkedGraph& G = cur.source;
    std::optional<std::pair<Dir, Dir>> pr;
    for (int v = 0; v < G.num_vertices() && !pr; ++v) {
      auto ds = G.directions_at(v);
      for (size_t i = 0; i < ds.size() && !pr; ++i)
        for (size_t j = i + 1; j < ds.size() && !pr; ++j)
          if (cur.D(ds[i]) == cur.D(ds[j])) pr = std::make_pair(ds[i], ds[j]);
    }
    if (!pr) break;
    if ((int)fs.moves.size() >= max_folds) throw std::logic_error("factorization did not terminate");
    auto [d1, d2] = *pr;
    Path a = cur.image(d1), b = cur.image(d2);
    Length s(0);
    size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) s += cur.target.length(a[k++]);
    if (edge_of(d1) == edge_of(d2) && !(Length(2) * s < G.length(d1)))
      throw precondition_error("map is not locally injective on edge " + G.edges[edge_of(d1)].label);
    GraphFold gf = fold_graph(G, d1, d2, s);
    GraphMorphism next = detail::residual_after_fold(cur, gf);
    int nlen = combinatorial_length(next);
    if (nlen >= clen) throw std::logic_error("combinatorial length did not decrease");
    bool full = s == G.length(d1) && s == G.length(d2);
    fs.moves.push_back({full ? "full_fold" : "partial_fold", G.label(d1), G.label(d2), s});
    fs.folds.push_back(gf.map);
    fs.graphs.push_back(gf.graph);
    cur = next;
    clen = nlen;
  }
  if (!metric_isometry(cur)) throw precondition_error("map is not a homotopy equivalence: the folded map is not an isometry");
  fs.residual = cur;
  fs.complete = true;
  return fs;
}

inline json fold_sequence_json(const FoldSequence& fs) {
  json j;
  json src = graph_json(fs.source);
  if (src.contains("number_field")) j["number_field"] = src["number_field"];
  j["source"] = src;
  j["target"] = graph_json(fs.target);
  j["complete"] = fs.complete;
  json moves = json::array();
  for (auto& m : fs.moves) moves.push_back({{"kind", m.kind}, {"d1", m.d1}, {"d2", m.d2}, {"length", detail::length_json(m.length)}});
  j["moves"] = moves;
  const MarkedGraph& last = fs.graphs.back();
  json vm = json::object(), em = json::object();
  for (int v = 0; v < last.num_vertices(); ++v) vm[last.vertices[v]] = fs.target.vertices[fs.residual.vmap[v]];
  for (int e = 0; e < last.num_edges(); ++e) em[last.edges[e].label] = path_json(fs.target, fs.residual.emap[e]);
  j["residual"] = {{"vertex_map", vm}, {"edge_map", em}};
  return j;
}

// Rebuilds every intermediate graph from a replay log.
inline FoldSequence replay_fold_sequence(const json& j) {
  FieldPtr field = document_field(j);
  FoldSequence fs;
  fs.source = parse_graph(j.at("source"), field);
  fs.target = parse_graph(j.at("target"), field);
  fs.complete = j.value("complete", false);
  fs.graphs.push_back(fs.source);
  for (auto& m : j.at("moves")) {
    FoldMove mv{m.at("kind").get<std::string>(), m.at("d1").get<std::string>(), m.at("d2").get<std::string>(),
                detail::parse_length(m.at("length"), field)};
    if (mv.kind != "full_fold" && mv.kind != "partial_fold") throw parse_error("cannot replay move kind " + mv.kind);
    const MarkedGraph& G = fs.graphs.back();
    GraphFold gf = fold_graph(G, G.dir(mv.d1), G.dir(mv.d2), mv.length);
    fs.moves.push_back(mv);
    fs.folds.push_back(gf.map);
    fs.graphs.push_back(gf.graph);
  }
  const MarkedGraph& last = fs.graphs.back();
  const json& r = j.at("residual");
  fs.residual = {last, fs.target, {}, {}};
  for (int v = 0; v < last.num_vertices(); ++v) {
    int t = fs.target.find_vertex(r.at("vertex_map").at(last.vertices[v]).get<std::string>());
    if (t < 0) throw parse_error("residual maps to an unknown vertex");
    fs.residual.vmap.push_back(t);
  }
  for (int e = 0; e < last.num_edges(); ++e)
    fs.residual.emap.push_back(detail::parse_path(fs.target, r.at("edge_map").at(last.edges[e].label)));
  fs.residual.validate();
  return fs;
}

// The marked edge isometry (G, lengths |g(E)|, marking m) -> (G, g(m)) given by g.
inline GraphMorphism self_map_morphism(const GraphSelfMap& f) {
  GraphMorphism h{f.graph, f.graph, f.vmap, f.emap};
  for (int e = 0; e < f.graph.num_edges(); ++e) h.source.edges[e].length = f.graph.path_length(f.emap[e]);
  h.target.base = f.vmap[f.graph.base];
  h.target.marking.clear();
  for (auto& m : f.graph.marking) h.target.marking.push_back(f.apply(m));
  return h;
}

}  // namespace ttmap
