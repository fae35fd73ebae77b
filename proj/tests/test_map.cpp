#include <ttmap/io.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ttmap;

namespace {

GraphSelfMap load(const std::string& name) { return load_map(std::string(TTMAP_DATA_DIR "/") + name); }

// Letter counts of a path, by unoriented edge.
std::vector<long> letter_counts(const GraphSelfMap& f, const Path& p) {
  std::vector<long> c(f.graph.num_edges(), 0);
  for (Dir d : p) ++c[edge_of(d)];
  return c;
}

}  // namespace

TEST(Map, DataValidates) {
  for (const char* n : {"rank3.json", "example1.json", "example1_inverse.json", "example1_slid.json", "example2.json"}) {
    GraphSelfMap f = load(n);
    EXPECT_NO_THROW(f.validate()) << n;
    EXPECT_NO_THROW(f.graph.validate()) << n;
  }
}

TEST(Map, IterateRank3) {
  GraphSelfMap f = load("rank3.json");
  EXPECT_EQ(map_json(iterate(f, 1)).dump(), map_json(f).dump());
  GraphSelfMap f2 = iterate(f, 2);
  const MarkedGraph& g = f.graph;
  int F = g.find_edge("F");
  // direct substitution oracle: FGF -> FGF GFAFG FGF
  EXPECT_EQ(g.path_str(f2.emap[F]), "F G F G F A F G F G F");
  EXPECT_EQ(f2.emap[F], f.apply_raw(f.emap[F]));
  EXPECT_THROW(iterate(f, 0), std::invalid_argument);
}

TEST(Map, IterateMatchesMatrixPower) {
  GraphSelfMap f = load("rank3.json");
  IntMatrix m = transition_matrix(f);
  for (int k = 1; k <= 4; ++k) {
    GraphSelfMap fk = iterate(f, k);
    EXPECT_EQ(transition_matrix(fk), matrix_power(m, k)) << k;
    IntMatrix mk = matrix_power(m, k);
    for (int e = 0; e < 3; ++e) {
      long col = 0;
      for (int r = 0; r < 3; ++r) col += mk[r][e];
      EXPECT_EQ((long)fk.emap[e].size(), col);
    }
  }
}

TEST(Map, TransitionMatrices) {
  GraphSelfMap f = load("rank3.json");
  IntMatrix m = transition_matrix(f);
  // columns A, F, G
  EXPECT_EQ(m, (IntMatrix{{1, 0, 1}, {3, 2, 2}, {2, 1, 2}}));
  for (int e = 0; e < 3; ++e) {
    auto c = letter_counts(f, f.emap[e]);
    for (int r = 0; r < 3; ++r) EXPECT_EQ(m[r][e], c[r]);
  }
  GraphSelfMap f1 = load("example1.json");
  EXPECT_EQ(transition_matrix(f1), (IntMatrix{{4, 2, 3}, {1, 1, 0}, {2, 1, 2}}));
  GraphSelfMap id = identity_map(f.graph);
  EXPECT_EQ(transition_matrix(id), (IntMatrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

TEST(Map, PFValues) {
  GraphSelfMap f = load("rank3.json");
  PFData pf = pf_eigenvalue(f);
  EXPECT_NEAR(pf.lambda, 4.08, 0.005);
  EXPECT_NEAR(pf.lambda, 4.0795956, 1e-6);
  EXPECT_NEAR(pf.lambda, pf.power_estimate, 1e-10);

  PFData p1 = pf_eigenvalue(load("example1.json"));
  PFData p1i = pf_eigenvalue(load("example1_inverse.json"));
  // exact certification: the char poly has a root above 6, none at or above 5 for the inverse
  EXPECT_GE(roots_above(squarefree_part(p1.charpoly), Rational(6)), 1);
  EXPECT_EQ(roots_above(squarefree_part(p1i.charpoly), Rational(5)), 0);
  EXPECT_NE(p1i.charpoly(Rational(5)), 0);
  EXPECT_GT(p1.lambda, 6);
  EXPECT_LT(p1i.lambda, 5);
}

TEST(Map, AffineNormalizeRank3) {
  GraphSelfMap f = load("rank3.json");
  AffineData ad;
  GraphSelfMap n = affine_normalize(f, &ad);
  EXPECT_EQ(n.graph.total_length(), Length(1));
  double lam = ad.lambda.to_double();
  for (int e = 0; e < 3; ++e) {
    double res = n.graph.path_length(n.emap[e]).to_double() - lam * n.graph.edges[e].length.to_double();
    EXPECT_LT(std::abs(res), 1e-9);
    EXPECT_EQ(n.graph.path_length(n.emap[e]), ad.lambda * n.graph.edges[e].length);
  }
  EXPECT_NEAR(n.graph.edges[0].length.to_double(), 0.43016, 1e-5);
  EXPECT_NEAR(n.graph.edges[1].length.to_double(), 0.18504, 1e-5);
  EXPECT_NEAR(n.graph.edges[2].length.to_double(), 0.38480, 1e-5);
  // scale invariance: normalizing a rescaled metric gives the same lengths
  GraphSelfMap s = f;
  for (auto& e : s.graph.edges) e.length = Length(7);
  GraphSelfMap n2 = affine_normalize(s);
  for (int e = 0; e < 3; ++e) EXPECT_EQ(n2.graph.edges[e].length.to_double(), n.graph.edges[e].length.to_double());
  EXPECT_EQ(require_affine(n).to_double(), lam);
  EXPECT_THROW(require_affine(f), precondition_error);
}

TEST(Map, AffineNormalizeRejectsReducible) {
  GraphSelfMap f = rose_map({"a"}, {"a"});
  EXPECT_NO_THROW(affine_normalize(f));  // 1x1 matrix [1], lambda = 1
  GraphSelfMap r = rose_map({"a", "b"}, {"a", "ab"});
  EXPECT_THROW(affine_normalize(r), precondition_error);
}

TEST(Map, IrreducibilityReport) {
  auto rep = irreducibility_report(load("rank3.json"));
  EXPECT_TRUE(rep.matrix_irreducible);
  EXPECT_TRUE(rep.matrix_primitive);
  EXPECT_TRUE(rep.cyclotomic_free);
  EXPECT_FALSE(rep.necessary_only);
  auto id = irreducibility_report(identity_map(load("rank3.json").graph));
  EXPECT_FALSE(id.cyclotomic_free);
  auto sw = irreducibility_report(rose_map({"a", "b"}, {"b", "a"}));
  EXPECT_TRUE(sw.matrix_irreducible);
  EXPECT_FALSE(sw.matrix_primitive);
}

TEST(Map, AbelianizationEqualsTransitionForPositiveMaps) {
  for (const char* n : {"rank3.json", "example1.json", "example1_slid.json"}) {
    GraphSelfMap f = load(n);
    auto a = abelianization(f);
    IntMatrix m = transition_matrix(f);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_EQ(a[i][j], Rational(m[i][j])) << n;
  }
}

TEST(Map, AbelianizationCharpolyRank3) {
  Poly cp = characteristic_polynomial(abelianization(load("rank3.json")));
  EXPECT_EQ(cp, (Poly{-1, 4, -5, 1}));
  auto roots = complex_roots(cp);
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_NEAR(roots[0].real(), 4.08, 0.005);
  EXPECT_NEAR(roots[1].real(), 0.46, 0.005);
  EXPECT_NEAR(std::abs(roots[1].imag()), 0.18, 0.005);
}

TEST(Map, InverseComposesToIdentity) {
  GraphSelfMap f = load("example1.json"), h = load("example1_inverse.json");
  GraphSelfMap fh = compose(f, h), hf = compose(h, f);
  for (int e = 0; e < 3; ++e) {
    EXPECT_EQ(fh.emap[e], Path{2 * e});
    EXPECT_EQ(hf.emap[e], Path{2 * e});
  }
}

TEST(Map, SubdivideMapAtFixedPoint) {
  GraphSelfMap f = load("example2.json");
  AffineData ad;
  GraphSelfMap n = affine_normalize(f, &ad);
  int D = n.graph.find_edge("D");
  // g(D) = D F A F D F E; the point at parameter t goes to distance lam t along
  // g(D), so the second D gives the fixed point t = o / (lam - 1)
  Length o = n.graph.path_length(n.graph.path({"D", "F", "A", "F"}));
  Length s = o / (ad.lambda - Length(1));
  ASSERT_GT(s.sign(), 0);
  ASSERT_LT(s, n.graph.edges[D].length);
  MapSubdivision ms = subdivide_map(n, {{D, {s}}}, ad.lambda);
  const GraphSelfMap& h = ms.map;
  EXPECT_EQ(h.graph.num_vertices(), 3);
  int x = ms.new_vertices[0];
  EXPECT_EQ(h.vmap[x], x);
  EXPECT_NEAR(s.to_double(), 0.234487, 1e-6);
  for (int e = 0; e < h.graph.num_edges(); ++e)
    EXPECT_EQ(h.graph.path_length(h.emap[e]), ad.lambda * h.graph.edges[e].length);
  EXPECT_NO_THROW(h.graph.validate());
}
