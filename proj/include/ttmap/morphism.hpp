#pragma once

#include "map.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttmap {

// Vertices to vertices, edges to tight edge paths.
struct GraphMorphism {
  MarkedGraph source, target;
  std::vector<int> vmap;
  std::vector<Path> emap;  // image of direction 2i

  Path image(Dir d) const { return forward(d) ? emap[edge_of(d)] : reversed(emap[edge_of(d)]); }
  Dir D(Dir d) const { return image(d).front(); }

  Path apply(const Path& p) const {
    Path out;
    for (Dir d : p)
      for (Dir x : image(d)) {
        if (!out.empty() && out.back() == rev(x)) out.pop_back();
        else out.push_back(x);
      }
    return out;
  }

  void validate() const {
    if ((int)vmap.size() != source.num_vertices() || (int)emap.size() != source.num_edges())
      throw precondition_error("morphism table size mismatch");
    for (int v : vmap)
      if (v < 0 || v >= target.num_vertices()) throw precondition_error("morphism vertex image out of range");
    for (int e = 0; e < source.num_edges(); ++e) {
      const Path& p = emap[e];
      if (p.empty()) throw precondition_error("morphism collapses edge " + source.edges[e].label);
      target.check_path(p);
      if (!is_reduced(p)) throw precondition_error("image of " + source.edges[e].label + " is not tight");
      if (target.tail(p.front()) != vmap[source.edges[e].from] || target.head(p.back()) != vmap[source.edges[e].to])
        throw precondition_error("image of " + source.edges[e].label + " does not join the images of its endpoints");
    }
  }

  bool edge_isometric() const {
    for (int e = 0; e < source.num_edges(); ++e)
      if (target.path_length(emap[e]) != source.edges[e].length) return false;
    return true;
  }

  bool isometry() const {
    if (source.num_edges() != target.num_edges() || source.num_vertices() != target.num_vertices()) return false;
    std::set<int> es, vs(vmap.begin(), vmap.end());
    for (auto& p : emap) {
      if (p.size() != 1) return false;
      es.insert(edge_of(p[0]));
    }
    return (int)es.size() == target.num_edges() && (int)vs.size() == target.num_vertices() && edge_isometric();
  }
};

inline GraphMorphism identity_morphism(const MarkedGraph& g) {
  GraphMorphism m{g, g, {}, {}};
  for (int v = 0; v < g.num_vertices(); ++v) m.vmap.push_back(v);
  for (int e = 0; e < g.num_edges(); ++e) m.emap.push_back({2 * e});
  return m;
}

// b after a.
inline GraphMorphism compose(const GraphMorphism& b, const GraphMorphism& a) {
  GraphMorphism r{a.source, b.target, {}, {}};
  for (int v : a.vmap) r.vmap.push_back(b.vmap[v]);
  for (auto& p : a.emap) r.emap.push_back(b.apply(p));
  return r;
}

namespace detail {

// "s_1" with "s_2" gives back "s"; otherwise the first name survives.
inline std::string merged_name(const std::string& a, const std::string& b) {
  if (a.size() > 2 && a.size() == b.size() && a.compare(0, a.size() - 2, b, 0, b.size() - 2) == 0) {
    std::string sa = a.substr(a.size() - 2), sb = b.substr(b.size() - 2);
    if ((sa == "_1" && sb == "_2") || (sa == "_2" && sb == "_1")) return a.substr(0, a.size() - 2);
  }
  return a;
}

inline Path map_dirs(const std::vector<Dir>& m, const Path& p) {
  Path out;
  for (Dir d : p) out.push_back(m[d]);
  return out;
}

inline Path bfs_path(const MarkedGraph& g, int from, int to) {
  std::vector<Dir> via(g.num_vertices(), -1);
  std::vector<bool> seen(g.num_vertices(), false);
  std::deque<int> q{from};
  seen[from] = true;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (Dir d : g.directions_at(v)) {
      int u = g.head(d);
      if (seen[u]) continue;
      seen[u] = true;
      via[u] = d;
      q.push_back(u);
    }
  }
  if (!seen[to]) throw precondition_error("graph is not connected");
  Path p;
  for (int v = to; v != from; v = g.tail(via[v])) p.push_back(via[v]);
  std::reverse(p.begin(), p.end());
  return p;
}

}  // namespace detail

struct Identification {
  MarkedGraph graph;
  std::vector<Dir> dir;   // old direction -> new direction
  std::vector<int> vert;  // old vertex -> new vertex
};

// Isometric identification of the edge of b with the edge of a, direction b
// going to direction a. The edge of a is kept. Exactly one pair of
// corresponding endpoints must be distinct.
inline Identification identify(const MarkedGraph& g, Dir a, Dir b) {
  int ea = edge_of(a), eb = edge_of(b);
  if (ea == eb) throw std::invalid_argument("identify needs two distinct edges");
  std::vector<std::pair<int, int>> merges;
  for (auto [x, y] : {std::make_pair(g.tail(a), g.tail(b)), std::make_pair(g.head(a), g.head(b))})
    if (x != y) merges.push_back({x, y});
  if (merges.empty()) throw precondition_error("identifying " + g.label(a) + " with " + g.label(b) + " kills a loop");
  if (merges.size() == 2)
    throw precondition_error("identifying " + g.label(a) + " with " + g.label(b) + " changes the rank");
  int keep = std::min(merges[0].first, merges[0].second), drop = std::max(merges[0].first, merges[0].second);

  Identification r;
  MarkedGraph& h = r.graph;
  r.vert.resize(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) r.vert[v] = v == drop ? keep : (v > drop ? v - 1 : v);
  for (int v = 0; v < g.num_vertices(); ++v)
    if (v != drop) h.vertices.push_back(g.vertices[v]);
  std::string vn = detail::merged_name(g.vertices[keep], g.vertices[drop]);
  if (vn == g.vertices[keep] || g.find_vertex(vn) < 0) h.vertices[r.vert[keep]] = vn;

  auto eidx = [&](int e) { return e > eb ? e - 1 : e; };
  for (int e = 0; e < g.num_edges(); ++e) {
    if (e == eb) continue;
    Edge ne = g.edges[e];
    ne.from = r.vert[ne.from];
    ne.to = r.vert[ne.to];
    h.edges.push_back(ne);
  }
  std::string en = detail::merged_name(g.edges[ea].label, g.edges[eb].label);
  if (en == g.edges[ea].label || g.find_edge(en) < 0) h.edges[eidx(ea)].label = en;
  Dir na = 2 * eidx(ea) + (a & 1);
  r.dir.resize(g.num_dirs());
  for (Dir d = 0; d < g.num_dirs(); ++d)
    r.dir[d] = edge_of(d) == eb ? (d == b ? na : rev(na)) : 2 * eidx(edge_of(d)) + (d & 1);

  h.generators = g.generators;
  h.base = r.vert[g.base];
  for (auto& m : g.marking) h.marking.push_back(reduce(detail::map_dirs(r.dir, m)));
  return r;
}

// Subdivide the edge of d at distance t from the tail of d.
inline Subdivision split_direction(const MarkedGraph& g, Dir d, const Length& t) {
  return subdivide(g, edge_of(d), forward(d) ? t : g.length(d) - t);
}

struct GraphFold {
  MarkedGraph graph;
  GraphMorphism map;
  Dir folded;  // the identified segment, from the fold vertex
};

// Length s fold of two directions with a common initial vertex.
inline GraphFold fold_graph(const MarkedGraph& g, Dir d1, Dir d2, const Length& s) {
  if (d1 < 0 || d2 < 0 || d1 >= g.num_dirs() || d2 >= g.num_dirs()) throw std::out_of_range("direction");
  if (d1 == d2) throw precondition_error("fold needs two distinct directions");
  if (g.tail(d1) != g.tail(d2))
    throw precondition_error("directions " + g.label(d1) + " and " + g.label(d2) + " start at different vertices");
  if (s.sign() <= 0 || s > g.length(d1) || s > g.length(d2)) throw std::domain_error("fold length out of range");
  if (edge_of(d1) == edge_of(d2) && !(Length(2) * s < g.length(d1)))
    throw std::domain_error("a loop folds with itself only below half its length");

  MarkedGraph h = g;
  std::vector<Path> rel(g.num_dirs());
  for (Dir d = 0; d < g.num_dirs(); ++d) rel[d] = {d};
  Dir a = d1, b = d2;
  auto cut = [&](Dir x) {
    Subdivision sd = split_direction(h, x, s);
    for (auto& p : rel) p = apply_relabel(sd.relabel, p);
    a = sd.relabel[a].front();
    b = sd.relabel[b].front();
    h = std::move(sd.graph);
  };
  if (s < h.length(a)) cut(a);
  if (s < h.length(b)) cut(b);
  Identification id = identify(h, a, b);

  GraphFold r;
  r.graph = id.graph;
  r.folded = id.dir[a];
  r.map = {g, id.graph, {}, {}};
  for (int v = 0; v < g.num_vertices(); ++v) r.map.vmap.push_back(id.vert[v]);
  for (int e = 0; e < g.num_edges(); ++e) r.map.emap.push_back(reduce(detail::map_dirs(id.dir, rel[2 * e])));
  r.map.validate();
  return r;
}

struct Smoothing {
  MarkedGraph graph;
  std::vector<Path> expand;  // new direction -> path in the input graph
};

// Removes valence-2 vertices by joining their two edges.
inline Smoothing smooth(const MarkedGraph& g) {
  Smoothing s{g, {}};
  for (Dir d = 0; d < g.num_dirs(); ++d) s.expand.push_back({d});
  while (true) {
    MarkedGraph& h = s.graph;
    int v = -1;
    for (int u = 0; u < h.num_vertices() && v < 0; ++u) {
      auto ds = h.directions_at(u);
      if (ds.size() == 2 && edge_of(ds[0]) != edge_of(ds[1])) v = u;
    }
    if (v < 0) break;
    auto ds = h.directions_at(v);
    Dir d1 = ds[0], d2 = ds[1];
    int e1 = edge_of(d1), e2 = edge_of(d2);
    int keep = std::min(e1, e2), drop = std::max(e1, e2);
    auto eidx = [&](int e) { return e > drop ? e - 1 : e; };
    auto vidx = [&](int u) { return u > v ? u - 1 : u; };
    Dir nd = 2 * eidx(keep);

    // rebase away from v
    std::vector<Path> marking = h.marking;
    int base = h.base;
    if (base == v) {
      base = h.head(d1);
      for (auto& m : marking) m = reduce(concat(concat({rev(d1)}, m), {d1}));
    }
    auto convert = [&](const Path& p) {
      Path out;
      for (size_t i = 0; i < p.size(); ++i) {
        Dir d = p[i];
        if (d == rev(d1) || d == rev(d2)) {
          if (i + 1 >= p.size()) throw std::logic_error("path ends at a smoothed vertex");
          Dir nx = p[++i];
          if (d == rev(d1) && nx == d2) out.push_back(nd);
          else if (d == rev(d2) && nx == d1) out.push_back(rev(nd));
          else throw std::logic_error("path turns back at a smoothed vertex");
        } else if (d == d1 || d == d2) {
          throw std::logic_error("path starts at a smoothed vertex");
        } else {
          out.push_back(2 * eidx(edge_of(d)) + (d & 1));
        }
      }
      return out;
    };

    MarkedGraph n;
    for (int u = 0; u < h.num_vertices(); ++u)
      if (u != v) n.vertices.push_back(h.vertices[u]);
    for (int e = 0; e < h.num_edges(); ++e) {
      if (e == drop) continue;
      Edge ne = h.edges[e];
      if (e == keep) {
        ne.label = h.edges[e1].label;
        ne.from = h.head(d1);
        ne.to = h.head(d2);
        ne.length = h.edges[e1].length + h.edges[e2].length;
      }
      ne.from = vidx(ne.from);
      ne.to = vidx(ne.to);
      n.edges.push_back(ne);
    }
    n.generators = h.generators;
    n.base = vidx(base);
    for (auto& m : marking) n.marking.push_back(convert(m));

    std::vector<Path> ex(n.num_dirs());
    for (Dir d = 0; d < h.num_dirs(); ++d) {
      int e = edge_of(d);
      if (e == e1 || e == e2) continue;
      ex[2 * eidx(e) + (d & 1)] = s.expand[d];
    }
    ex[nd] = concat(s.expand[rev(d1)], s.expand[d2]);
    ex[rev(nd)] = reversed(ex[nd]);
    s.expand = std::move(ex);
    s.graph = std::move(n);
  }
  return s;
}

inline Word inverse_word(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (int& a : r) a = -a;
  return r;
}

inline Word multiply(const Word& a, const Word& b) {
  Word r = a;
  r.insert(r.end(), b.begin(), b.end());
  return reduce_word(r);
}

// Reads loops at the base vertex as words in the marking generators, by
// labelled Stallings folding of the wedge of marking loops.
class MarkingReader {
 public:
  explicit MarkingReader(const MarkedGraph& g) : base_(g.base), rank_(g.rank()) {
    int nv = 1;
    for (int i = 0; i < g.rank(); ++i) {
      const Path& l = g.marking[i];
      if (l.empty()) throw precondition_error("trivial marking loop");
      int cur = 0;
      for (size_t k = 0; k < l.size(); ++k) {
        int nxt = k + 1 == l.size() ? 0 : nv++;
        edges_.push_back({cur, nxt, l[k], k + 1 == l.size() ? Word{i + 1} : Word{}, true});
        cur = nxt;
      }
    }
    parent_.resize(nv);
    std::iota(parent_.begin(), parent_.end(), 0);
    while (fold_once()) {
    }
    for (size_t i = 0; i < edges_.size(); ++i) {
      if (!edges_[i].alive) continue;
      out_[{find(edges_[i].u), edges_[i].label}] = {static_cast<int>(i), true};
      out_[{find(edges_[i].v), rev(edges_[i].label)}] = {static_cast<int>(i), false};
    }
  }

  Word word(const Path& loop) const {
    Word w;
    int cur = find(0);
    for (Dir d : loop) {
      auto it = out_.find({cur, d});
      if (it == out_.end()) throw std::invalid_argument("path does not lift to the marking");
      auto [i, fw] = it->second;
      const WEdge& e = edges_[i];
      w = multiply(w, fw ? e.w : inverse_word(e.w));
      cur = find(fw ? e.v : e.u);
    }
    if (cur != find(0)) throw std::invalid_argument("path is not a loop at the base vertex");
    return w;
  }

  int base() const { return base_; }

 private:
  struct WEdge {
    int u, v;
    Dir label;
    Word w;
    bool alive;
  };

  int find(int x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }

  void gauge(int z, const Word& c) {
    Word ci = inverse_word(c);
    for (auto& e : edges_) {
      if (!e.alive) continue;
      if (find(e.u) == z) e.w = multiply(ci, e.w);
      if (find(e.v) == z) e.w = multiply(e.w, c);
    }
  }

  bool fold_once() {
    std::map<std::pair<int, Dir>, std::pair<int, bool>> seen;
    int root = find(0);
    for (size_t i = 0; i < edges_.size(); ++i) {
      if (!edges_[i].alive) continue;
      for (bool fw : {true, false}) {
        const WEdge& e = edges_[i];
        int a = find(fw ? e.u : e.v);
        Dir lab = fw ? e.label : rev(e.label);
        auto [it, fresh] = seen.emplace(std::make_pair(a, lab), std::make_pair(static_cast<int>(i), fw));
        if (fresh) continue;
        auto [j, fwj] = it->second;
        if (j == (int)i) continue;
        auto oriented = [&](int k, bool f) { return f ? edges_[k].w : inverse_word(edges_[k].w); };
        auto far = [&](int k, bool f) { return find(f ? edges_[k].v : edges_[k].u); };
        Word p = oriented(i, fw), q = oriented(j, fwj);
        int fi = far(i, fw), fj = far(j, fwj);
        if (fi == fj) {
          if (p != q) throw precondition_error("marking loops do not form a basis");
          edges_[i].alive = false;
          return true;
        }
        if (fi != root) {
          gauge(fi, multiply(inverse_word(p), q));
          parent_[fi] = fj;
          edges_[i].alive = false;
        } else {
          gauge(fj, multiply(inverse_word(q), p));
          parent_[fj] = fi;
          edges_[j].alive = false;
        }
        return true;
      }
    }
    return false;
  }

  int base_, rank_;
  std::vector<WEdge> edges_;
  std::vector<int> parent_;
  std::map<std::pair<int, Dir>, std::pair<int, bool>> out_;
};

inline Word apply_words(const std::vector<Word>& phi, const Word& w) {
  Word r;
  for (int a : w) r = multiply(r, a > 0 ? phi[a - 1] : inverse_word(phi[-a - 1]));
  return r;
}

// Outer automorphism of f as words: generator i -> tau f(m_i) ~tau with tau a
// path from the base vertex to its image.
inline std::vector<Word> automorphism_words(const GraphSelfMap& f) {
  const MarkedGraph& g = f.graph;
  MarkingReader rd(g);
  Path tau = detail::bfs_path(g, g.base, f.vmap[g.base]);
  std::vector<Word> out;
  for (auto& m : g.marking) out.push_back(rd.word(reduce(concat(concat(tau, f.apply(m)), reversed(tau)))));
  return out;
}

inline std::vector<Word> invert_automorphism(const std::vector<Word>& phi) {
  int r = static_cast<int>(phi.size());
  MarkedGraph rose;
  rose.vertices = {"v"};
  for (int i = 0; i < r; ++i) {
    rose.edges.push_back({"x" + std::to_string(i + 1), 0, 0, Length(1)});
    rose.generators.push_back("x" + std::to_string(i + 1));
  }
  for (auto& w : phi) {
    Path p;
    for (int a : w) p.push_back(a > 0 ? 2 * (a - 1) : 2 * (-a - 1) + 1);
    rose.marking.push_back(reduce(p));
  }
  MarkingReader rd(rose);
  std::vector<Word> inv;
  for (int i = 0; i < r; ++i) inv.push_back(rd.word({2 * i}));
  return inv;
}

// Whether generator i -> w[i] is conjugation by a single element.
inline bool is_inner(const std::vector<Word>& w) {
  if (w.empty()) return true;
  Word w0 = reduce_word(w[0]);
  if (w0.size() % 2 == 0 || w0[w0.size() / 2] != 1) return false;
  Word c(w0.begin(), w0.begin() + w0.size() / 2);
  if (w.size() > 1) {
    Word u = multiply(multiply(inverse_word(c), w[1]), c);
    c = multiply(c, Word(u.begin(), u.begin() + u.size() / 2));
  }
  for (size_t i = 0; i < w.size(); ++i)
    if (multiply(multiply(inverse_word(c), w[i]), c) != Word{static_cast<int>(i) + 1}) return false;
  return true;
}

// Whether h carries the marking of its source to that of its target.
inline bool marking_preserved(const GraphMorphism& h) {
  const MarkedGraph& s = h.source;
  const MarkedGraph& t = h.target;
  if (s.rank() != t.rank()) return false;
  MarkingReader rd(t);
  Path tau = detail::bfs_path(t, t.base, h.vmap[s.base]);
  std::vector<Word> w;
  for (auto& m : s.marking) w.push_back(rd.word(reduce(concat(concat(tau, h.apply(m)), reversed(tau)))));
  return is_inner(w);
}

// Marked isometry: after smoothing valence-2 vertices, a length-preserving
// isomorphism carrying one marking to the other.
inline bool marked_isometric(const MarkedGraph& g0, const MarkedGraph& h0) {
  MarkedGraph g = smooth(g0).graph, h = smooth(h0).graph;
  if (g.num_edges() != h.num_edges() || g.num_vertices() != h.num_vertices() || g.rank() != h.rank()) return false;
  // edges in an order where each one touches an earlier vertex
  std::vector<int> order;
  {
    std::vector<bool> vs(g.num_vertices(), false), es(g.num_edges(), false);
    vs[g.base] = true;
    while ((int)order.size() < g.num_edges()) {
      bool progress = false;
      for (int e = 0; e < g.num_edges(); ++e)
        if (!es[e] && (vs[g.edges[e].from] || vs[g.edges[e].to])) {
          es[e] = true, vs[g.edges[e].from] = vs[g.edges[e].to] = true, order.push_back(e), progress = true;
        }
      if (!progress) return false;
    }
  }
  std::vector<int> vm(g.num_vertices(), -1), used_v(h.num_vertices(), -1);
  std::vector<Dir> em(g.num_edges(), -1);
  std::vector<bool> used_e(h.num_edges(), false);
  auto bind = [&](int a, int b, std::vector<int>& undo) {
    if (vm[a] == b) return true;
    if (vm[a] >= 0 || used_v[b] >= 0) return false;
    vm[a] = b, used_v[b] = a, undo.push_back(a);
    return true;
  };
  std::function<bool(size_t)> search = [&](size_t k) -> bool {
    if (k == order.size()) {
      GraphMorphism m{g, h, vm, {}};
      for (int e = 0; e < g.num_edges(); ++e) m.emap.push_back({em[e]});
      return marking_preserved(m);
    }
    int e = order[k];
    for (Dir d = 0; d < h.num_dirs(); ++d) {
      if (used_e[edge_of(d)] || h.length(d) != g.edges[e].length) continue;
      std::vector<int> undo;
      bool ok = bind(g.edges[e].from, h.tail(d), undo) && bind(g.edges[e].to, h.head(d), undo);
      if (ok) {
        em[e] = d, used_e[edge_of(d)] = true;
        if (search(k + 1)) return true;
        used_e[edge_of(d)] = false;
      }
      for (int a : undo) used_v[vm[a]] = -1, vm[a] = -1;
    }
    return false;
  };
  return search(0);
}

}  // namespace ttmap
