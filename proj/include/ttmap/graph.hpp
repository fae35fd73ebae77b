#pragma once

#include "algebraic.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttmap {

using Length = Algebraic;

// Oriented edge i has direction ids 2i (as given) and 2i+1 (reversed).
using Dir = int;
inline Dir rev(Dir d) { return d ^ 1; }
inline int edge_of(Dir d) { return d >> 1; }
inline bool forward(Dir d) { return (d & 1) == 0; }

using Path = std::vector<Dir>;

struct malformed_path : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Path reversed(const Path& p) {
  Path r(p.rbegin(), p.rend());
  for (auto& d : r) d = rev(d);
  return r;
}

inline Path concat(Path a, const Path& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Free reduction of a path whose consecutive edges are already compatible.
inline Path reduce(const Path& p) {
  Path out;
  out.reserve(p.size());
  for (Dir d : p) {
    if (!out.empty() && out.back() == rev(d)) out.pop_back();
    else out.push_back(d);
  }
  return out;
}

inline bool is_reduced(const Path& p) {
  for (size_t i = 1; i < p.size(); ++i)
    if (p[i] == rev(p[i - 1])) return false;
  return true;
}

// Cyclic reduction; also returns the cyclic rotation-independent form.
inline Path cyclic_reduce(const Path& p) {
  Path r = reduce(p);
  size_t i = 0, j = r.size();
  while (j - i >= 2 && r[i] == rev(r[j - 1])) ++i, --j;
  return Path(r.begin() + i, r.begin() + j);
}

struct Edge {
  std::string label;
  int from = 0, to = 0;
  Length length = Length(1);
};

class MarkedGraph {
 public:
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  std::vector<std::string> generators;
  std::vector<Path> marking;
  int base = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_dirs() const { return 2 * num_edges(); }
  int rank() const { return static_cast<int>(generators.size()); }

  int tail(Dir d) const { return forward(d) ? edges[edge_of(d)].from : edges[edge_of(d)].to; }
  int head(Dir d) const { return tail(rev(d)); }
  const Length& length(Dir d) const { return edges[edge_of(d)].length; }
  std::string label(Dir d) const { return (forward(d) ? "" : "~") + edges[edge_of(d)].label; }

  std::string path_str(const Path& p) const {
    std::string s;
    for (Dir d : p) s += (s.empty() ? "" : " ") + label(d);
    return s;
  }

  int find_vertex(const std::string& name) const {
    for (int i = 0; i < num_vertices(); ++i)
      if (vertices[i] == name) return i;
    return -1;
  }
  int find_edge(const std::string& name) const {
    for (int i = 0; i < num_edges(); ++i)
      if (edges[i].label == name) return i;
    return -1;
  }
  Dir dir(const std::string& token) const {
    bool inv = !token.empty() && token[0] == '~';
    int e = find_edge(inv ? token.substr(1) : token);
    if (e < 0) throw std::out_of_range("unknown edge label: " + token);
    return 2 * e + (inv ? 1 : 0);
  }
  Path path(const std::vector<std::string>& tokens) const {
    Path p;
    for (const auto& t : tokens) p.push_back(dir(t));
    return p;
  }

  std::vector<Dir> directions_at(int v) const {
    std::vector<Dir> out;
    for (Dir d = 0; d < num_dirs(); ++d)
      if (tail(d) == v) out.push_back(d);
    return out;
  }
  int valence(int v) const { return static_cast<int>(directions_at(v).size()); }

  void check_path(const Path& p) const {
    for (Dir d : p)
      if (d < 0 || d >= num_dirs()) throw malformed_path("direction out of range");
    for (size_t i = 1; i < p.size(); ++i)
      if (head(p[i - 1]) != tail(p[i]))
        throw malformed_path("incompatible edges " + label(p[i - 1]) + " " + label(p[i]));
  }

  Length total_length() const {
    Length s(0);
    for (const auto& e : edges) s += e.length;
    return s;
  }
  Length max_edge_length() const {
    Length m(0);
    for (const auto& e : edges)
      if (e.length > m) m = e.length;
    return m;
  }
  Length path_length(const Path& p) const {
    Length s(0);
    for (Dir d : p) s += length(d);
    return s;
  }

  std::string fresh_vertex_name(const std::string& stem) const {
    if (find_vertex(stem) < 0) return stem;
    for (int k = 2;; ++k)
      if (find_vertex(stem + "'" + std::to_string(k)) < 0) return stem + "'" + std::to_string(k);
  }
  std::string fresh_edge_name(const std::string& stem) const {
    if (find_edge(stem) < 0) return stem;
    for (int k = 2;; ++k)
      if (find_edge(stem + "'" + std::to_string(k)) < 0) return stem + "'" + std::to_string(k);
  }

  // Structural checks of the data invariants; throws precondition_error.
  void validate(bool require_marking = true) const {
    std::set<std::string> seen;
    for (const auto& e : edges) {
      if (e.label.empty() || e.label[0] == '~') throw precondition_error("bad edge label '" + e.label + "'");
      if (!seen.insert(e.label).second) throw precondition_error("duplicate edge label " + e.label);
      if (e.from < 0 || e.from >= num_vertices() || e.to < 0 || e.to >= num_vertices())
        throw precondition_error("edge " + e.label + " has an unknown endpoint");
      if (e.length.sign() <= 0) throw precondition_error("edge " + e.label + " has nonpositive length");
    }
    std::set<std::string> vs(vertices.begin(), vertices.end());
    if (vs.size() != vertices.size()) throw precondition_error("duplicate vertex name");
    for (int v = 0; v < num_vertices(); ++v)
      if (valence(v) < 2) throw precondition_error("vertex " + vertices[v] + " has valence < 2");
    if (!require_marking) return;
    if ((int)marking.size() != rank()) throw precondition_error("marking size mismatch");
    for (size_t i = 0; i < marking.size(); ++i) {
      const Path& p = marking[i];
      if (p.empty()) throw precondition_error("trivial marking loop " + generators[i]);
      check_path(p);
      if (tail(p.front()) != base || head(p.back()) != base)
        throw precondition_error("marking loop " + generators[i] + " is not closed at the base vertex");
      if (!is_reduced(p)) throw precondition_error("marking loop " + generators[i] + " is not tight");
    }
    int euler = num_vertices() - num_edges();
    if (1 - euler != rank()) throw precondition_error("rank does not match the graph's Euler characteristic");
  }
};

// Tightening with compatibility check.
inline Path tighten(const MarkedGraph& g, const Path& p) {
  g.check_path(p);
  return reduce(p);
}

inline Length circuit_length(const MarkedGraph& g, const Path& c) {
  if (c.empty()) throw std::invalid_argument("trivial circuit");
  g.check_path(c);
  if (g.head(c.back()) != g.tail(c.front())) throw malformed_path("circuit is not closed");
  return g.path_length(c);
}

// Free group words: letter k>0 is generator k-1, k<0 its inverse.
using Word = std::vector<int>;

inline Word reduce_word(const Word& w) {
  Word out;
  for (int a : w) {
    if (!out.empty() && out.back() == -a) out.pop_back();
    else out.push_back(a);
  }
  return out;
}

inline Word cyclic_reduce_word(const Word& w) {
  Word r = reduce_word(w);
  size_t i = 0, j = r.size();
  while (j - i >= 2 && r[i] == -r[j - 1]) ++i, --j;
  return Word(r.begin() + i, r.begin() + j);
}

// Loop at the base vertex realizing a word through the marking.
inline Path marking_loop(const MarkedGraph& g, const Word& w) {
  Path p;
  for (int a : w) {
    int i = std::abs(a) - 1;
    if (i < 0 || i >= g.rank()) throw std::out_of_range("generator index out of range");
    const Path& l = g.marking[i];
    if (a > 0) p.insert(p.end(), l.begin(), l.end());
    else {
      Path r = reversed(l);
      p.insert(p.end(), r.begin(), r.end());
    }
  }
  return reduce(p);
}

inline Path circuit_of(const MarkedGraph& g, const Word& w) { return cyclic_reduce(marking_loop(g, w)); }

inline Length translation_length(const MarkedGraph& g, const Word& w) {
  Path c = circuit_of(g, w);
  if (c.empty()) throw std::invalid_argument("trivial conjugacy class");
  return g.path_length(c);
}

inline std::string word_str(const MarkedGraph& g, const Word& w) {
  std::string s;
  for (int a : w) s += (s.empty() ? "" : " ") + std::string(a < 0 ? "~" : "") + g.generators[std::abs(a) - 1];
  return s;
}

// Words separated by whitespace tokens; "~x" or "x^-1" inverts. When all
// generator names are one character, a token may be a run of letters, with
// upper case meaning inverse if no generator is upper case.
inline Word parse_word(const std::vector<std::string>& gens, const std::string& text) {
  auto index = [&](const std::string& n) {
    for (size_t i = 0; i < gens.size(); ++i)
      if (gens[i] == n) return static_cast<int>(i) + 1;
    return 0;
  };
  bool single = std::all_of(gens.begin(), gens.end(), [](const std::string& s) { return s.size() == 1; });
  bool upper_free = std::none_of(gens.begin(), gens.end(), [](const std::string& s) { return std::isupper((unsigned char)s[0]); });
  Word w;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isspace((unsigned char)text[i]) || text[i] == '.' || text[i] == '*') {
      ++i;
      continue;
    }
    bool inv = false;
    if (text[i] == '~') inv = true, ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace((unsigned char)text[j]) && text[j] != '~' && text[j] != '.' && text[j] != '*' && text[j] != '^') ++j;
    std::string tok = text.substr(i, j - i);
    bool minus = false;
    if (j + 2 < text.size() + 1 && text.compare(j, 3, "^-1") == 0) minus = true, j += 3;
    i = j;
    if (tok.empty()) throw parse_error("bad word: " + text);
    int k = index(tok);
    if (k) {
      w.push_back((inv != minus) ? -k : k);
      continue;
    }
    if (!single) throw parse_error("unknown generator '" + tok + "'");
    for (size_t c = 0; c < tok.size(); ++c) {
      std::string ch(1, tok[c]);
      int m = index(ch);
      bool neg = false;
      if (!m && upper_free && std::isupper((unsigned char)tok[c])) {
        m = index(std::string(1, (char)std::tolower((unsigned char)tok[c])));
        neg = true;
      }
      if (!m) throw parse_error("unknown generator '" + ch + "'");
      bool last = c + 1 == tok.size();
      bool flip = (c == 0 && inv) != (last && minus);
      w.push_back((neg != flip) ? -m : m);
    }
  }
  return w;
}

struct Subdivision {
  MarkedGraph graph;
  // image of each old direction as a path in the new graph
  std::vector<Path> relabel;
  std::vector<int> new_vertices;
};

// Subdivide edge e at the increasing interior parameters ts (measured from e's tail).
inline Subdivision subdivide(const MarkedGraph& g, int e, const std::vector<Length>& ts) {
  if (e < 0 || e >= g.num_edges()) throw std::out_of_range("edge index");
  if (ts.empty()) return {g, [&] {
                            std::vector<Path> r(g.num_dirs());
                            for (Dir d = 0; d < g.num_dirs(); ++d) r[d] = {d};
                            return r;
                          }(), {}};
  const Length& L = g.edges[e].length;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].sign() <= 0 || ts[i] >= L) throw std::domain_error("subdivision parameter out of range");
    if (i && ts[i] <= ts[i - 1]) throw std::domain_error("subdivision parameters not increasing");
  }
  Subdivision s{g, {}, {}};
  MarkedGraph& h = s.graph;
  const std::string stem = g.edges[e].label;
  std::vector<int> pieces{e};
  for (size_t i = 0; i < ts.size(); ++i) {
    s.new_vertices.push_back(h.num_vertices());
    h.vertices.push_back(h.fresh_vertex_name(stem + ":" + std::to_string(i + 1)));
  }
  Length last(0);
  std::vector<Edge> piece_edges;
  for (size_t i = 0; i <= ts.size(); ++i) {
    Edge pe;
    pe.from = i == 0 ? g.edges[e].from : s.new_vertices[i - 1];
    pe.to = i == ts.size() ? g.edges[e].to : s.new_vertices[i];
    Length end = i == ts.size() ? L : ts[i];
    pe.length = end - last;
    last = end;
    piece_edges.push_back(pe);
  }
  h.edges[e] = piece_edges[0];
  for (size_t i = 1; i < piece_edges.size(); ++i) {
    pieces.push_back(h.num_edges());
    h.edges.push_back(piece_edges[i]);
  }
  for (size_t i = 0; i < pieces.size(); ++i) h.edges[pieces[i]].label = "";
  for (size_t i = 0; i < pieces.size(); ++i) h.edges[pieces[i]].label = h.fresh_edge_name(stem + "." + std::to_string(i + 1));
  s.relabel.assign(g.num_dirs(), {});
  for (Dir d = 0; d < g.num_dirs(); ++d) s.relabel[d] = {d};
  Path fw;
  for (int p : pieces) fw.push_back(2 * p);
  s.relabel[2 * e] = fw;
  s.relabel[2 * e + 1] = reversed(fw);
  for (auto& loop : h.marking) {
    Path np;
    for (Dir d : loop) np = concat(np, s.relabel[d]);
    loop = np;
  }
  return s;
}

inline Subdivision subdivide(const MarkedGraph& g, int e, const Length& t) { return subdivide(g, e, std::vector<Length>{t}); }

inline Path apply_relabel(const std::vector<Path>& relabel, const Path& p) {
  Path out;
  for (Dir d : p) out = concat(out, relabel[d]);
  return out;
}

// Stallings folding of a set of based loops in g. Returns true when the loops
// generate pi_1(g, base) freely, i.e. they define a homotopy equivalence from
// the rose.
inline bool loops_form_basis(const MarkedGraph& g, int base, const std::vector<Path>& loops) {
  if ((int)loops.size() != 1 - (g.num_vertices() - g.num_edges())) return false;
  struct WEdge {
    int u, v;
    Dir label;
    bool alive = true;
  };
  std::vector<int> vimg{base};
  std::vector<WEdge> we;
  for (const Path& l : loops) {
    if (l.empty()) return false;
    if (g.tail(l.front()) != base || g.head(l.back()) != base) return false;
    int cur = 0;
    for (size_t i = 0; i < l.size(); ++i) {
      int nxt;
      if (i + 1 == l.size()) nxt = 0;
      else {
        nxt = static_cast<int>(vimg.size());
        vimg.push_back(g.head(l[i]));
      }
      we.push_back({cur, nxt, l[i]});
      cur = nxt;
    }
  }
  std::vector<int> parent(vimg.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<int, Dir>, int> out;
    for (size_t i = 0; i < we.size(); ++i) {
      if (!we[i].alive) continue;
      int u = find(we[i].u), v = find(we[i].v);
      for (int side = 0; side < 2; ++side) {
        int a = side ? v : u;
        Dir lab = side ? rev(we[i].label) : we[i].label;
        auto [it, fresh] = out.emplace(std::make_pair(a, lab), static_cast<int>(i));
        if (fresh) continue;
        int j = it->second;
        if (j == (int)i) continue;
        // identify far endpoints and drop edge i
        int fj = (find(we[j].u) == a && we[j].label == lab) ? find(we[j].v) : find(we[j].u);
        int fi = side ? u : v;
        if (fi != fj) parent[fi] = fj;
        we[i].alive = false;
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
  // trim hairs away from the base
  std::map<int, int> deg;
  for (auto& e : we)
    if (e.alive) deg[find(e.u)]++, deg[find(e.v)]++;
  bool trimmed = true;
  while (trimmed) {
    trimmed = false;
    for (auto& e : we) {
      if (!e.alive) continue;
      int u = find(e.u), v = find(e.v);
      if ((deg[u] == 1 && u != find(0)) || (deg[v] == 1 && v != find(0))) {
        e.alive = false;
        deg[u]--, deg[v]--;
        trimmed = true;
      }
    }
  }
  std::set<int> edges_hit;
  std::map<int, int> vmap;
  int alive = 0;
  for (auto& e : we) {
    if (!e.alive) continue;
    ++alive;
    edges_hit.insert(edge_of(e.label));
    for (int x : {e.u, e.v}) {
      int r = find(x);
      int gv = vimg[x];
      auto [it, fresh] = vmap.emplace(r, gv);
      if (!fresh && it->second != gv) return false;
    }
  }
  std::set<int> gverts;
  for (auto& [r, gv] : vmap) gverts.insert(gv);
  return alive == g.num_edges() && (int)edges_hit.size() == g.num_edges() && (int)vmap.size() == g.num_vertices() &&
         (int)gverts.size() == g.num_vertices();
}

inline bool marking_is_homotopy_equivalence(const MarkedGraph& g) { return loops_form_basis(g, g.base, g.marking); }

}  // namespace ttmap
