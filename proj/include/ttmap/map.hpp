#pragma once

#include "graph.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttmap {

using IntMatrix = std::vector<std::vector<long>>;

class GraphSelfMap {
 public:
  MarkedGraph graph;
  std::vector<int> vmap;
  std::vector<Path> emap;  // image of direction 2i for each edge i

  Path image(Dir d) const { return forward(d) ? emap[edge_of(d)] : reversed(emap[edge_of(d)]); }
  int vertex_image(int v) const { return vmap[v]; }
  Dir Dg(Dir d) const {
    if (forward(d)) return emap[edge_of(d)].front();
    return rev(emap[edge_of(d)].back());
  }

  // g_#: image of a path, tightened.
  Path apply(const Path& p) const {
    Path out;
    for (Dir d : p) {
      Path im = image(d);
      for (Dir x : im) {
        if (!out.empty() && out.back() == rev(x)) out.pop_back();
        else out.push_back(x);
      }
    }
    return out;
  }
  Path apply_raw(const Path& p) const {
    Path out;
    for (Dir d : p) out = concat(out, image(d));
    return out;
  }

  void validate() const {
    const MarkedGraph& g = graph;
    if ((int)vmap.size() != g.num_vertices()) throw precondition_error("vertex image table size mismatch");
    if ((int)emap.size() != g.num_edges()) throw precondition_error("edge image table size mismatch");
    for (int v : vmap)
      if (v < 0 || v >= g.num_vertices()) throw precondition_error("vertex image out of range");
    for (int e = 0; e < g.num_edges(); ++e) {
      const Path& p = emap[e];
      const std::string lab = g.edges[e].label;
      if (p.empty()) throw precondition_error("edge " + lab + " has a trivial image");
      g.check_path(p);
      if (!is_reduced(p)) throw precondition_error("image of " + lab + " is not tight");
      if (g.tail(p.front()) != vmap[g.edges[e].from] || g.head(p.back()) != vmap[g.edges[e].to])
        throw precondition_error("image of " + lab + " does not join the images of its endpoints");
    }
  }
};

// Composition (f o h) on a common graph.
inline GraphSelfMap compose(const GraphSelfMap& f, const GraphSelfMap& h) {
  GraphSelfMap r{f.graph, {}, {}};
  r.vmap.resize(h.vmap.size());
  for (size_t v = 0; v < h.vmap.size(); ++v) r.vmap[v] = f.vmap[h.vmap[v]];
  r.emap.resize(h.emap.size());
  for (size_t e = 0; e < h.emap.size(); ++e) r.emap[e] = f.apply(h.emap[e]);
  return r;
}

inline GraphSelfMap iterate(const GraphSelfMap& f, int k) {
  if (k < 1) throw std::invalid_argument("iterate needs k >= 1");
  GraphSelfMap r = f;
  for (int i = 1; i < k; ++i) r = compose(f, r);
  return r;
}

inline GraphSelfMap identity_map(const MarkedGraph& g) {
  GraphSelfMap f{g, {}, {}};
  for (int v = 0; v < g.num_vertices(); ++v) f.vmap.push_back(v);
  for (int e = 0; e < g.num_edges(); ++e) f.emap.push_back({2 * e});
  return f;
}

// entry (e', e) = crossings of e' by the image of e.
inline IntMatrix transition_matrix(const GraphSelfMap& f) {
  int n = f.graph.num_edges();
  IntMatrix m(n, std::vector<long>(n, 0));
  for (int e = 0; e < n; ++e)
    for (Dir d : f.emap[e]) m[edge_of(d)][e]++;
  return m;
}

inline IntMatrix signed_matrix(const GraphSelfMap& f) {
  int n = f.graph.num_edges();
  IntMatrix m(n, std::vector<long>(n, 0));
  for (int e = 0; e < n; ++e)
    for (Dir d : f.emap[e]) m[edge_of(d)][e] += forward(d) ? 1 : -1;
  return m;
}

inline IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
  IntMatrix c(n, std::vector<long>(m, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t l = 0; l < k; ++l)
      if (a[i][l])
        for (size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

inline IntMatrix matrix_power(const IntMatrix& a, int k) {
  IntMatrix r(a.size(), std::vector<long>(a.size(), 0));
  for (size_t i = 0; i < a.size(); ++i) r[i][i] = 1;
  for (int i = 0; i < k; ++i) r = multiply(r, a);
  return r;
}

struct PFData {
  double lambda = 0;
  RealRoot root;
  Poly charpoly;
  std::vector<double> right, left;
  double power_estimate = 0;
  bool irreducible = true;
};

inline bool strongly_connected(const IntMatrix& m) {
  int n = static_cast<int>(m.size());
  if (n == 0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<bool> seen(n, false);
    std::vector<int> st{0};
    seen[0] = true;
    while (!st.empty()) {
      int i = st.back();
      st.pop_back();
      for (int j = 0; j < n; ++j) {
        long w = pass ? m[j][i] : m[i][j];
        if (w > 0 && !seen[j]) seen[j] = true, st.push_back(j);
      }
    }
    for (bool b : seen)
      if (!b) return false;
  }
  return true;
}

inline bool primitive(const IntMatrix& m) {
  int n = static_cast<int>(m.size());
  if (!strongly_connected(m)) return false;
  std::vector<std::vector<char>> a(n, std::vector<char>(n)), p(n, std::vector<char>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = p[i][j] = m[i][j] > 0;
  int bound = (n - 1) * (n - 1) + 1;
  for (int k = 1; k < bound; ++k) {
    std::vector<std::vector<char>> q(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        if (p[i][l])
          for (int j = 0; j < n; ++j)
            if (a[l][j]) q[i][j] = 1;
    p.swap(q);
  }
  for (auto& r : p)
    for (char c : r)
      if (!c) return false;
  return true;
}

// Spectral radius of a nonnegative integer matrix: the largest real root of
// the exact characteristic polynomial, bisected to width tol, with a power
// iteration on M + I as an independent estimate.
inline PFData pf_eigenvalue(const IntMatrix& m, double tol = 1e-12) {
  int n = static_cast<int>(m.size());
  bool nonzero = false;
  for (auto& r : m)
    for (long x : r) {
      if (x < 0) throw std::invalid_argument("transition matrix has a negative entry");
      nonzero |= x != 0;
    }
  if (!nonzero) throw std::domain_error("degenerate input: zero matrix");
  PFData d;
  d.irreducible = strongly_connected(m);
  d.charpoly = characteristic_polynomial(m);
  auto r = largest_real_root(d.charpoly);
  if (!r) throw std::domain_error("no real eigenvalue");
  d.root = *r;
  refine(d.root, from_double(tol) / 4);
  d.lambda = d.root.approx();

  auto power = [&](bool transpose) {
    std::vector<double> v(n, 1.0), w(n);
    double est = 0;
    for (int it = 0; it < 200000; ++it) {
      for (int i = 0; i < n; ++i) {
        double s = v[i];
        for (int j = 0; j < n; ++j) s += (transpose ? m[j][i] : m[i][j]) * v[j];
        w[i] = s;
      }
      double norm = 0;
      for (double x : w) norm += x;
      double diff = 0;
      for (int i = 0; i < n; ++i) {
        w[i] /= norm;
        diff = std::max(diff, std::abs(w[i] - v[i]));
      }
      v.swap(w);
      est = norm - 1;
      if (diff < 1e-15 && it > 10) break;
    }
    return std::make_pair(est, v);
  };
  auto [e1, rv] = power(false);
  auto [e2, lv] = power(true);
  (void)e2;
  d.power_estimate = e1;
  d.right = rv;
  d.left = lv;
  return d;
}

inline PFData pf_eigenvalue(const GraphSelfMap& f, double tol = 1e-12) { return pf_eigenvalue(transition_matrix(f), tol); }

inline FieldPtr pf_field(const PFData& d) { return NumberField::make(d.root); }

// Solve a homogeneous system a x = 0 over the algebraic numbers; returns a
// basis of the kernel.
inline std::vector<std::vector<Algebraic>> kernel(std::vector<std::vector<Algebraic>> a) {
  int rows = static_cast<int>(a.size()), cols = rows ? static_cast<int>(a[0].size()) : 0;
  std::vector<int> pivcol;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int p = -1;
    for (int i = r; i < rows; ++i)
      if (!a[i][c].is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(a[p], a[r]);
    Algebraic inv = Algebraic(1) / a[r][c];
    for (int j = c; j < cols; ++j) a[r][j] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || a[i][c].is_zero()) continue;
      Algebraic f = a[i][c];
      for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivcol.push_back(c);
    ++r;
  }
  std::vector<std::vector<Algebraic>> basis;
  std::vector<bool> is_piv(cols, false);
  for (int c : pivcol) is_piv[c] = true;
  for (int fcol = 0; fcol < cols; ++fcol) {
    if (is_piv[fcol]) continue;
    std::vector<Algebraic> v(cols, Algebraic(0));
    v[fcol] = 1;
    for (size_t i = 0; i < pivcol.size(); ++i) v[pivcol[i]] = -a[i][fcol];
    basis.push_back(v);
  }
  return basis;
}

struct AffineData {
  FieldPtr field;
  Algebraic lambda;
  PFData pf;
};

// Exact eigen-metric: Length(g(e)) = lambda Length(e), Length(G) = 1.
inline GraphSelfMap affine_normalize(const GraphSelfMap& f, AffineData* out = nullptr) {
  IntMatrix m = transition_matrix(f);
  if (!strongly_connected(m)) throw precondition_error("transition matrix is not irreducible");
  PFData pf = pf_eigenvalue(m);
  FieldPtr fld = pf_field(pf);
  Algebraic lam = Algebraic::generator(fld);
  int n = static_cast<int>(m.size());
  std::vector<std::vector<Algebraic>> a(n, std::vector<Algebraic>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = Algebraic(Rational(m[j][i])) - (i == j ? lam : Algebraic(0));
  auto ker = kernel(a);
  if (ker.size() != 1) throw precondition_error("PF eigenspace is not one-dimensional");
  std::vector<Algebraic> v = ker[0];
  Algebraic s(0);
  for (auto& x : v) s += x;
  GraphSelfMap r = f;
  for (int i = 0; i < n; ++i) {
    r.graph.edges[i].length = v[i] / s;
    if (r.graph.edges[i].length.sign() <= 0) throw precondition_error("PF eigenvector is not positive");
  }
  if (out) *out = {fld, lam, pf};
  return r;
}

// lambda with Length(g(e)) = lambda Length(e) for all e, if the metric is affine.
inline std::optional<Algebraic> affine_stretch(const GraphSelfMap& f) {
  std::optional<Algebraic> lam;
  for (int e = 0; e < f.graph.num_edges(); ++e) {
    Algebraic r = f.graph.path_length(f.emap[e]) / f.graph.edges[e].length;
    if (!lam) lam = r;
    else if (*lam != r) return std::nullopt;
  }
  return lam;
}

inline Algebraic require_affine(const GraphSelfMap& f) {
  auto l = affine_stretch(f);
  if (!l) throw precondition_error("metric is not affine for this map");
  return *l;
}

// Subdivide a map at points whose images are vertices of the subdivided graph
// (for instance a finite set of points closed under g). cuts: edge -> increasing
// interior parameters. Needs the affine stretch factor lam.
struct MapSubdivision {
  GraphSelfMap map;
  std::vector<Path> relabel;  // old direction -> new path
  std::vector<int> new_vertices;
};

inline MapSubdivision subdivide_map(const GraphSelfMap& f, const std::map<int, std::vector<Length>>& cuts,
                                    const Algebraic& lam) {
  const MarkedGraph& g0 = f.graph;
  MarkedGraph g = g0;
  std::vector<Path> rel(g0.num_dirs());
  for (Dir d = 0; d < g0.num_dirs(); ++d) rel[d] = {d};
  std::vector<int> newv;
  // vertex index -> (old edge, parameter) for new vertices
  for (auto& [e, ts] : cuts) {
    if (ts.empty()) continue;
    Subdivision s = subdivide(g, e, ts);
    std::vector<Path> r2(g0.num_dirs());
    for (Dir d = 0; d < g0.num_dirs(); ++d) r2[d] = apply_relabel(s.relabel, rel[d]);
    rel = std::move(r2);
    g = std::move(s.graph);
    newv.insert(newv.end(), s.new_vertices.begin(), s.new_vertices.end());
  }
  GraphSelfMap h{g, std::vector<int>(g.num_vertices(), -1), std::vector<Path>(g.num_edges())};
  for (int v = 0; v < g0.num_vertices(); ++v) h.vmap[v] = f.vmap[v];
  for (int e = 0; e < g0.num_edges(); ++e) {
    Path img = apply_relabel(rel, f.emap[e]);
    const Path& pieces = rel[2 * e];
    if (pieces.size() == 1) {
      h.emap[pieces[0] >> 1] = img;
      continue;
    }
    // cumulative boundaries along img
    std::vector<Algebraic> acc{Algebraic(0)};
    for (Dir d : img) acc.push_back(acc.back() + g.length(d));
    Algebraic start(0);
    size_t pos = 0;
    for (size_t k = 0; k < pieces.size(); ++k) {
      Algebraic end = start + g.length(pieces[k]);
      Algebraic target = lam * end;
      size_t q = pos;
      while (q < img.size() && acc[q] < target) ++q;
      if (acc[q] != target) throw precondition_error("subdivision point does not map to a vertex");
      h.emap[edge_of(pieces[k])] = Path(img.begin() + pos, img.begin() + q);
      if (h.emap[edge_of(pieces[k])].empty()) throw precondition_error("subdivision piece has trivial image");
      if (k + 1 < pieces.size()) h.vmap[g.head(pieces[k])] = g.head(img[q - 1]);
      pos = q;
      start = end;
    }
  }
  for (int v : h.vmap)
    if (v < 0) throw std::logic_error("unassigned vertex image after subdivision");
  h.validate();
  return {h, rel, newv};
}

struct IrreducibilityReport {
  bool matrix_irreducible = false;
  bool matrix_primitive = false;
  bool cyclotomic_free = false;
  bool necessary_only = false;  // rank > 3
  std::vector<int> cyclotomic_indices;
};

// Linear solve C x = b over Q for a full-column-rank consistent system.
inline std::vector<Rational> solve_columns(const std::vector<std::vector<Rational>>& c, std::vector<Rational> b) {
  int rows = static_cast<int>(c.size()), cols = rows ? static_cast<int>(c[0].size()) : 0;
  std::vector<std::vector<Rational>> a(rows, std::vector<Rational>(cols + 1));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a[i][j] = c[i][j];
    a[i][cols] = b[i];
  }
  std::vector<int> piv;
  int r = 0;
  for (int col = 0; col < cols && r < rows; ++col) {
    int p = -1;
    for (int i = r; i < rows; ++i)
      if (a[i][col] != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(a[p], a[r]);
    Rational inv = 1 / a[r][col];
    for (int j = col; j <= cols; ++j) a[r][j] *= inv;
    for (int i = 0; i < rows; ++i)
      if (i != r && a[i][col] != 0) {
        Rational t = a[i][col];
        for (int j = col; j <= cols; ++j) a[i][j] -= t * a[r][j];
      }
    piv.push_back(col);
    ++r;
  }
  if ((int)piv.size() != cols) throw precondition_error("marking loops are not independent in homology");
  for (int i = r; i < rows; ++i)
    if (a[i][cols] != 0) throw precondition_error("inconsistent homology system");
  std::vector<Rational> x(cols);
  for (int i = 0; i < cols; ++i) x[piv[i]] = a[i][cols];
  return x;
}

// Action of the map on H_1 in the basis given by the marking loops.
inline std::vector<std::vector<Rational>> abelianization(const GraphSelfMap& f) {
  const MarkedGraph& g = f.graph;
  int n = g.num_edges(), r = g.rank();
  std::vector<std::vector<Rational>> c(n, std::vector<Rational>(r, Rational(0)));
  for (int i = 0; i < r; ++i)
    for (Dir d : g.marking[i]) c[edge_of(d)][i] += forward(d) ? 1 : -1;
  IntMatrix s = signed_matrix(f);
  std::vector<std::vector<Rational>> a(r, std::vector<Rational>(r));
  for (int i = 0; i < r; ++i) {
    std::vector<Rational> b(n, Rational(0));
    for (int e = 0; e < n; ++e)
      for (int k = 0; k < n; ++k) b[e] += Rational(s[e][k]) * c[k][i];
    auto x = solve_columns(c, b);
    for (int j = 0; j < r; ++j) a[j][i] = x[j];
  }
  return a;
}

inline IrreducibilityReport irreducibility_report(const GraphSelfMap& f) {
  IrreducibilityReport rep;
  IntMatrix m = transition_matrix(f);
  rep.matrix_irreducible = strongly_connected(m);
  rep.matrix_primitive = rep.matrix_irreducible && primitive(m);
  Poly cp = characteristic_polynomial(abelianization(f));
  rep.cyclotomic_indices = cyclotomic_factors(cp, f.graph.rank());
  rep.cyclotomic_free = rep.cyclotomic_indices.empty();
  rep.necessary_only = f.graph.rank() > 3;
  return rep;
}

}  // namespace ttmap
