#include <ttmap/io.hpp>
#include <ttmap/nielsen.hpp>

#include <gtest/gtest.h>

#include <functional>

using namespace ttmap;

namespace {

GraphSelfMap load_normalized(const std::string& name) {
  return affine_normalize(load_map(std::string(TTMAP_DATA_DIR "/") + name));
}

// Unoriented key for a path: the smaller of its label string and its reverse's.
std::string key(const MarkedGraph& g, const Path& p) {
  std::string a = g.path_str(p), b = g.path_str(reversed(p));
  return std::min(a, b);
}

// All tight paths with exactly one illegal turn, at most max_edges edges, metric
// length <= bound, and h_#(sigma) = sigma.
std::set<std::string> brute_force(const GraphSelfMap& f, int period, double bound, size_t max_edges) {
  GraphSelfMap h = iterate(f, period);
  GateStructure gs = gates(h);
  const MarkedGraph& g = f.graph;
  std::set<std::string> out;
  std::vector<double> len(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) len[e] = g.edges[e].length.to_double();
  Path p;
  std::function<void(double, int)> dfs = [&](double total, int illegal) {
    if (illegal == 1 && h.vmap[g.tail(p.front())] == g.tail(p.front()) && h.apply(p) == p) out.insert(key(g, p));
    if (p.size() == max_edges) return;
    Dir last = p.back();
    for (Dir e : g.directions_at(g.head(last))) {
      if (e == rev(last)) continue;
      double l2 = total + len[edge_of(e)];
      if (l2 > bound + 1e-9) continue;
      int ill = illegal + (gs.legal(make_turn(rev(last), e)) ? 0 : 1);
      if (ill > 1) continue;
      p.push_back(e);
      dfs(l2, ill);
      p.pop_back();
    }
  };
  for (Dir d = 0; d < g.num_dirs(); ++d) {
    p = {d};
    dfs(len[edge_of(d)], 0);
  }
  return out;
}

// f subdivided at every interior fixed point of f^p.
GraphSelfMap subdivide_at_fixed(const GraphSelfMap& f, int p) {
  Algebraic lam = require_affine(f);
  auto cuts = detail::interior_fixed_points(iterate(f, p), lam.pow(p));
  return subdivide_map(f, cuts, lam).map;
}

double bound_of(const GraphSelfMap& f) {
  return 2 * f.graph.total_length().to_double() + 2 * f.graph.max_edge_length().to_double();
}

}  // namespace

TEST(Nielsen, Rank3HasNone) {
  GraphSelfMap f = load_normalized("rank3.json");
  InpSearch r = find_inps(f, {1, 2});
  EXPECT_TRUE(r.by_period[1].empty());
  EXPECT_TRUE(r.by_period[2].empty());
  EXPECT_EQ(r.map.graph.num_vertices(), 1);
}

TEST(Nielsen, Example2) {
  GraphSelfMap f = load_normalized("example2.json");
  InpSearch r = find_inps(f, {1});
  ASSERT_EQ(r.by_period[1].size(), 1u);
  const NielsenPath& np = r.by_period[1][0];
  const MarkedGraph& g = r.map.graph;
  EXPECT_EQ(g.path_str(np.sigma()), "~D.1 ~F ~A ~F ~D.2 ~D.1 E D.1 D.2 F");
  EXPECT_EQ(r.map.apply(np.sigma()), np.sigma());
  EXPECT_EQ(turn_str(g, np.turn()), "{D.1,E}");
  EXPECT_EQ(g.path_length(np.alpha), g.path_length(np.beta));
  GateStructure gs = gates(r.map);
  for (const Path* p : {&np.alpha, &np.beta})
    for (size_t i = 0; i + 1 < p->size(); ++i) EXPECT_TRUE(gs.legal(turn_at(*p, i)));
  EXPECT_FALSE(gs.legal(np.turn()));
  EXPECT_LE(g.path_length(np.sigma()).to_double(), bound_of(r.map));
  // endpoints are q and the interior fixed point of D
  std::set<std::string> ends;
  for (int v : r.endpoints()) ends.insert(g.vertices[v]);
  EXPECT_EQ(ends, (std::set<std::string>{"D:1", "q"}));
  auto pv = principal_vertices(r.map, r.endpoints());
  std::set<std::string> pn;
  for (int v : pv) pn.insert(g.vertices[v]);
  EXPECT_EQ(pn, (std::set<std::string>{"D:1", "q"}));
  EXPECT_TRUE(is_rotationless(r.map, pv));
}

TEST(Nielsen, RequiresAffineMetric) {
  GraphSelfMap f = load_map(TTMAP_DATA_DIR "/rank3.json");
  EXPECT_THROW(find_inps(f), precondition_error);
}

TEST(Nielsen, BruteForceOracle) {
  for (const char* n : {"rank3.json", "example2.json", "example1.json", "example1_slid.json"}) {
    GraphSelfMap f = load_normalized(n);
    for (int p : {1, 2}) {
      GraphSelfMap s = subdivide_at_fixed(f, p);
      double bound = bound_of(s);
      const size_t B = 16;
      std::set<std::string> expect = brute_force(s, p, bound, B), got;
      for (auto& np : detail::search_on(s, p, 5000000)) {
        EXPECT_LE(s.graph.path_length(np.sigma()).to_double(), bound);
        if (np.sigma().size() <= B) got.insert(key(s.graph, np.sigma()));
      }
      EXPECT_EQ(got, expect) << n << " period " << p;
    }
  }
}

TEST(Nielsen, InvariantUnderSubdivisionAtFixedPoint) {
  GraphSelfMap f = load_normalized("example2.json");
  InpSearch r = find_inps(f, {1});
  GraphSelfMap s = subdivide_at_fixed(f, 1);
  InpSearch r2 = find_inps(s, {1});
  ASSERT_EQ(r.by_period[1].size(), r2.by_period[1].size());
  EXPECT_EQ(r.map.graph.path_length(r.by_period[1][0].sigma()), r2.map.graph.path_length(r2.by_period[1][0].sigma()));
}

TEST(Nielsen, PreNielsen) {
  GraphSelfMap f = load_normalized("example2.json");
  InpSearch r = find_inps(f, {1});
  const NielsenPath& np = r.by_period[1][0];
  EXPECT_EQ(is_pre_nielsen(r.map, np.sigma(), 3), 0);
  const MarkedGraph& g = r.map.graph;
  EXPECT_FALSE(is_pre_nielsen(r.map, g.path({"A"}), 5).has_value());
}

TEST(Nielsen, Classes) {
  NielsenClasses c34 = nielsen_classes(load_normalized("rank3.json"));
  ASSERT_EQ(c34.classes.size(), 1u);
  EXPECT_EQ(c34.classes[0].size(), 1u);
  NielsenClasses c2 = nielsen_classes(load_normalized("example2.json"));
  ASSERT_EQ(c2.classes.size(), 1u);
  std::set<std::string> names;
  for (int v : c2.classes[0]) names.insert(c2.map.graph.vertices[v]);
  EXPECT_EQ(names, (std::set<std::string>{"D:1", "q"}));
}

TEST(Nielsen, ClassesNeedRotationless) {
  GraphSelfMap f = affine_normalize(rose_map({"a", "b"}, {"b", "ab"}));
  EXPECT_THROW(nielsen_classes(f), precondition_error);
}
