#pragma once

#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ttmap {

// Dense univariate polynomial over Q, coefficients low degree first.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> c) : c_(std::move(c)) { trim(); }
  Poly(std::initializer_list<Rational> c) : c_(c) { trim(); }
  static Poly constant(const Rational& a) { return Poly(std::vector<Rational>{a}); }
  static Poly x() { return Poly(std::vector<Rational>{0, 1}); }
  static Poly monomial(int d, const Rational& a = 1) {
    std::vector<Rational> c(d + 1, Rational(0));
    c[d] = a;
    return Poly(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(int i) const { return i >= 0 && i < (int)c_.size() ? c_[i] : Rational(0); }
  Rational lead() const { return c_.empty() ? Rational(0) : c_.back(); }

  Poly monic() const {
    if (c_.empty()) return *this;
    Poly r(*this);
    Rational l = lead();
    for (auto& a : r.c_) a /= l;
    return r;
  }

  Poly operator-() const {
    Poly r(*this);
    for (auto& a : r.c_) a = -a;
    return r;
  }
  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Poly(std::move(c));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    }
    return Poly(std::move(c));
  }
  friend Poly operator*(const Rational& s, const Poly& a) {
    Poly r(a);
    for (auto& v : r.c_) v *= s;
    r.trim();
    return r;
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  // Euclidean division: a = q*b + r.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("polynomial division by zero");
    if (a.degree() < b.degree()) return {Poly(), a};
    std::vector<Rational> r = a.c_;
    std::vector<Rational> q(a.c_.size() - b.c_.size() + 1, Rational(0));
    const Rational& l = b.c_.back();
    for (int i = (int)r.size() - 1; i >= b.degree(); --i) {
      if (r[i] == 0) continue;
      Rational f = r[i] / l;
      int s = i - b.degree();
      q[s] = f;
      for (int j = 0; j <= b.degree(); ++j) r[s + j] -= f * b.c_[j];
    }
    r.resize(b.c_.size() - 1);
    return {Poly(std::move(q)), Poly(std::move(r))};
  }
  friend Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).second; }
  friend Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<Rational> d(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * Rational((long)i);
    return Poly(std::move(d));
  }

  Rational operator()(const Rational& x) const {
    Rational r = 0;
    for (int i = degree(); i >= 0; --i) r = r * x + c_[i];
    return r;
  }
  double eval(double x) const {
    double r = 0;
    for (int i = degree(); i >= 0; --i) r = r * x + c_[i].get_d();
    return r;
  }
  std::complex<double> eval(std::complex<double> x) const {
    std::complex<double> r = 0;
    for (int i = degree(); i >= 0; --i) r = r * x + c_[i].get_d();
    return r;
  }

  // Bounds on p over [lo,hi] by interval Horner.
  std::pair<Rational, Rational> range(const Rational& lo, const Rational& hi) const {
    Rational a = 0, b = 0;
    for (int i = degree(); i >= 0; --i) {
      Rational p1 = a * lo, p2 = a * hi, p3 = b * lo, p4 = b * hi;
      Rational mn = p1, mx = p1;
      for (const Rational* p : {&p2, &p3, &p4}) {
        if (*p < mn) mn = *p;
        if (*p > mx) mx = *p;
      }
      a = mn + c_[i];
      b = mx + c_[i];
    }
    return {a, b};
  }

  std::string str(const char* var = "x") const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
      if (c_[i] == 0) continue;
      Rational a = c_[i];
      if (!first) os << (a < 0 ? " - " : " + ");
      else if (a < 0) os << "-";
      first = false;
      Rational m = abs(a);
      if (i == 0 || m != 1) os << to_string(m);
      if (i >= 1) os << (i == 0 || m != 1 ? "*" : "") << var;
      if (i >= 2) os << "^" << i;
    }
    return os.str();
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

// Extended Euclid: returns (g, s) with s*a = g mod m.
inline std::pair<Poly, Poly> gcd_inverse(const Poly& a, const Poly& m) {
  Poly r0 = m, r1 = a % m, s0, s1 = Poly::constant(1);
  while (!r1.is_zero()) {
    auto [q, r] = Poly::divmod(r0, r1);
    Poly s2 = s0 - q * s1;
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  Rational l = r0.lead();
  return {r0.monic(), (Rational(1) / l) * s0};
}

inline Poly squarefree_part(const Poly& p) {
  if (p.degree() <= 0) return p.monic();
  Poly g = gcd(p, p.derivative());
  return (p / g).monic();
}

class Sturm {
 public:
  explicit Sturm(const Poly& p) {
    seq_.push_back(p);
    if (p.degree() <= 0) return;
    seq_.push_back(p.derivative());
    while (true) {
      Poly r = seq_[seq_.size() - 2] % seq_.back();
      if (r.is_zero()) break;
      seq_.push_back(-r);
    }
  }
  int changes(const Rational& x) const {
    int n = 0, last = 0;
    for (const auto& q : seq_) {
      int s = sgn(q(x));
      if (s == 0) continue;
      if (last != 0 && s != last) ++n;
      last = s;
    }
    return n;
  }
  // Distinct real roots in (a, b] for square-free p.
  int count(const Rational& a, const Rational& b) const { return changes(a) - changes(b); }

 private:
  std::vector<Poly> seq_;
};

inline Rational cauchy_bound(const Poly& p) {
  Rational m = 0;
  for (int i = 0; i < p.degree(); ++i) {
    Rational r = abs(p.coeff(i) / p.lead());
    if (r > m) m = r;
  }
  return m + 1;
}

// A real root of a square-free polynomial, isolated in (lo, hi].
struct RealRoot {
  Poly poly;
  Rational lo, hi;
  std::optional<Rational> exact;
  double approx() const {
    if (exact) return exact->get_d();
    return Rational((lo + hi) / 2).get_d();
  }
};

// Bisect until hi - lo <= width; keeps the isolating property.
inline void refine(RealRoot& r, const Rational& width) {
  if (r.exact) return;
  int slo = sgn(r.poly(r.hi));
  if (slo == 0) {
    r.exact = r.hi;
    r.lo = r.hi;
    return;
  }
  while (r.hi - r.lo > width) {
    Rational mid = (r.lo + r.hi) / 2;
    int s = sgn(r.poly(mid));
    if (s == 0) {
      r.exact = mid;
      r.lo = r.hi = mid;
      return;
    }
    if (s == slo) r.hi = mid;
    else r.lo = mid;
  }
}

// Exact equality of two isolated real roots.
inline bool same_root(const RealRoot& a, const RealRoot& b) {
  auto inside = [](const RealRoot& r, const Rational& x) {
    return r.exact ? *r.exact == x : (r.lo < x && x <= r.hi);
  };
  if (a.exact) return sgn(b.poly(*a.exact)) == 0 && inside(b, *a.exact);
  if (b.exact) return sgn(a.poly(*b.exact)) == 0 && inside(a, *b.exact);
  Rational lo = a.lo > b.lo ? a.lo : b.lo, hi = a.hi < b.hi ? a.hi : b.hi;
  if (lo >= hi) return false;
  Poly g = gcd(a.poly, b.poly);
  if (g.degree() < 1) return false;
  return Sturm(squarefree_part(g)).count(lo, hi) > 0;
}

inline std::optional<RealRoot> largest_real_root(const Poly& p) {
  if (p.is_zero()) throw std::domain_error("zero polynomial");
  Poly s = squarefree_part(p);
  if (s.degree() < 1) return std::nullopt;
  Sturm st(s);
  Rational b = cauchy_bound(s);
  Rational lo = -b, hi = b;
  if (st.count(lo, hi) == 0) return std::nullopt;
  while (st.count(lo, hi) > 1) {
    Rational mid = (lo + hi) / 2;
    if (s(mid) == 0 && st.count(mid, hi) == 0) {
      RealRoot r{s, mid, mid, mid};
      return r;
    }
    if (s(mid) == 0) mid += (hi - mid) / 1024;
    if (st.count(mid, hi) >= 1) lo = mid;
    else hi = mid;
  }
  RealRoot r{s, lo, hi, std::nullopt};
  if (s(hi) == 0) r.exact = hi, r.lo = hi;
  return r;
}

// Number of distinct real roots of p strictly greater than x.
inline int roots_above(const Poly& p, const Rational& x) {
  Poly s = squarefree_part(p);
  if (s.degree() < 1) return 0;
  Sturm st(s);
  Rational b = cauchy_bound(s);
  if (x >= b) return 0;
  return st.count(x, b);
}

inline int euler_phi(int n) {
  int r = n;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    r -= r / p;
  }
  if (n > 1) r -= r / n;
  return r;
}

inline Poly cyclotomic(int n) {
  Poly p = Poly::monomial(n) - Poly::constant(1);
  for (int d = 1; d < n; ++d)
    if (n % d == 0) p = p / cyclotomic(d);
  return p;
}

// Indices n with Phi_n dividing p and phi(n) <= max_degree.
inline std::vector<int> cyclotomic_factors(const Poly& p, int max_degree) {
  std::vector<int> out;
  for (int n = 1; n <= 6 * max_degree * max_degree + 6; ++n) {
    if (euler_phi(n) > max_degree) continue;
    if ((p % cyclotomic(n)).is_zero()) out.push_back(n);
  }
  return out;
}

// Characteristic polynomial det(xI - M) by Faddeev-LeVerrier.
template <class Matrix>
Poly characteristic_polynomial(const Matrix& m) {
  const int n = static_cast<int>(m.size());
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n)), mk(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = Rational(m[i][j]);
  std::vector<Rational> c(n + 1, Rational(0));
  c[n] = 1;
  for (int k = 1; k <= n; ++k) {
    // mk = a * (mk_prev + c_{n-k+1} I)
    std::vector<std::vector<Rational>> t(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t[i][j] = mk[i][j] + (i == j ? c[n - k + 1] : Rational(0));
    std::vector<std::vector<Rational>> nm(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        if (a[i][l] == 0) continue;
        for (int j = 0; j < n; ++j) nm[i][j] += a[i][l] * t[l][j];
      }
    Rational tr = 0;
    for (int i = 0; i < n; ++i) tr += nm[i][i];
    c[n - k] = -tr / Rational(k);
    mk = std::move(nm);
  }
  return Poly(std::move(c));
}

// All complex roots, by Durand-Kerner iteration followed by Newton polishing.
inline std::vector<std::complex<double>> complex_roots(const Poly& p) {
  const int n = p.degree();
  std::vector<std::complex<double>> z(std::max(n, 0));
  if (n < 1) return z;
  Poly m = p.monic();
  double r = cauchy_bound(m).get_d();
  for (int i = 0; i < n; ++i) z[i] = std::polar(r * 0.9, 2 * M_PI * i / n + 0.4);
  for (int it = 0; it < 2000; ++it) {
    double delta = 0;
    for (int i = 0; i < n; ++i) {
      std::complex<double> den = 1;
      for (int j = 0; j < n; ++j)
        if (j != i) den *= (z[i] - z[j]);
      if (std::abs(den) == 0) den = 1e-300;
      std::complex<double> step = m.eval(z[i]) / den;
      z[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-15 * (1 + r)) break;
  }
  std::sort(z.begin(), z.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return a.imag() < b.imag();
  });
  return z;
}

}  // namespace ttmap
