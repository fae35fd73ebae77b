#include <ttmap/algebraic.hpp>
#include <ttmap/map.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ttmap;

TEST(Poly, DivisionAndGcd) {
  Poly a{-1, 0, 1};  // x^2 - 1
  Poly b{-1, 1};     // x - 1
  auto [q, r] = Poly::divmod(a, b);
  EXPECT_EQ(q, (Poly{1, 1}));
  EXPECT_TRUE(r.is_zero());
  EXPECT_EQ(gcd(a, Poly{1, 1} * Poly{2, 1}), (Poly{1, 1}));
}

TEST(Poly, Cyclotomic) {
  EXPECT_EQ(cyclotomic(1), (Poly{-1, 1}));
  EXPECT_EQ(cyclotomic(4), (Poly{1, 0, 1}));
  EXPECT_EQ(cyclotomic(6), (Poly{1, -1, 1}));
  std::vector<int> small;
  for (int n = 1; n < 40; ++n)
    if (euler_phi(n) <= 3) small.push_back(n);
  EXPECT_EQ(small, (std::vector<int>{1, 2, 3, 4, 6}));
}

TEST(Poly, CharacteristicPolynomial) {
  IntMatrix m{{1, 0, 1}, {3, 2, 2}, {2, 1, 2}};
  Poly p = characteristic_polynomial(m);
  // det(xI - M) = x^3 - 5x^2 + 4x - 1
  EXPECT_EQ(p, (Poly{-1, 4, -5, 1}));
}

TEST(Poly, LargestRootIsolation) {
  Poly p{-2, 0, 1};
  auto r = largest_real_root(p);
  ASSERT_TRUE(r);
  refine(*r, Rational(1, 1000000000));
  EXPECT_NEAR(r->approx(), std::sqrt(2.0), 1e-9);
  auto e = largest_real_root(Poly{-3, 1} * Poly{1, 1});
  ASSERT_TRUE(e);
  refine(*e, Rational(1, 1000));
  EXPECT_NEAR(e->approx(), 3.0, 1e-3);
}

TEST(Algebraic, FieldArithmetic) {
  auto r = largest_real_root(Poly{-2, 0, 1});
  FieldPtr f = NumberField::make(*r);
  Algebraic s = Algebraic::generator(f);
  EXPECT_EQ(s * s, Algebraic(2));
  EXPECT_GT(s, Algebraic(Rational(141, 100)));
  EXPECT_LT(s, Algebraic(Rational(142, 100)));
  Algebraic inv = Algebraic(1) / (s + 1);
  EXPECT_EQ(inv * (s + 1), Algebraic(1));
  EXPECT_NEAR(inv.to_double(), 1 / (std::sqrt(2.0) + 1), 1e-15);
}

TEST(Algebraic, DynamicSplitting) {
  // modulus (x^2-2)(x-5) with the root sqrt 2: x - 5 is nonzero, x^2 - 2 is zero
  Poly m = Poly{-2, 0, 1} * Poly{-5, 1};
  RealRoot r{m, Rational(1), Rational(2), std::nullopt};
  FieldPtr f = NumberField::make(r);
  Algebraic x = Algebraic::generator(f);
  EXPECT_FALSE((x - 5).is_zero());
  EXPECT_TRUE((x * x - 2).is_zero());
  EXPECT_EQ(f->modulus().degree(), 2);
}

TEST(PF, PermutationMatrix) {
  PFData d = pf_eigenvalue(IntMatrix{{0, 1}, {1, 0}});
  EXPECT_NEAR(d.lambda, 1.0, 1e-12);
}

TEST(PF, ZeroMatrixRejected) { EXPECT_THROW(pf_eigenvalue(IntMatrix{{0, 0}, {0, 0}}), std::domain_error); }

TEST(PF, BisectionAgreesWithPowerIteration) {
  std::mt19937 rng(12345);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + rng() % 11;
    IntMatrix m(n, std::vector<long>(n));
    for (auto& row : m)
      for (auto& x : row) x = (rng() % 3 == 0) ? rng() % 4 : 0;
    if (!primitive(m)) continue;
    double tol = 1e-10;
    PFData d = pf_eigenvalue(m, tol);
    EXPECT_NEAR(d.lambda, d.power_estimate, 10 * tol) << "n=" << n;
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Roots, ComplexRoots) {
  auto z = complex_roots(Poly{-1, 4, -5, 1});
  ASSERT_EQ(z.size(), 3u);
  EXPECT_NEAR(z[0].real(), 4.0796, 1e-4);
  EXPECT_NEAR(std::abs(z[1].imag()), 0.1826, 1e-4);
}
