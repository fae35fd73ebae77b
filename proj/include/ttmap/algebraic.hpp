#pragma once

#include "poly.hpp"

#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace ttmap {

// Q(theta) for a real algebraic theta, given by a square-free polynomial with
// theta as a simple root and an isolating interval. The modulus is split lazily
// whenever a zero test finds a nontrivial factor (dynamic evaluation), so it may
// be reducible when constructed.
class NumberField {
 public:
  explicit NumberField(RealRoot r) : root_(std::move(r)), lo0_(root_.lo), hi0_(root_.hi) {
    if (root_.exact) root_.poly = Poly{-*root_.exact, 1};
  }

  static std::shared_ptr<NumberField> make(const RealRoot& r) { return std::make_shared<NumberField>(r); }

  Poly modulus() const {
    std::lock_guard<std::mutex> g(mu_);
    return root_.poly;
  }
  std::pair<Rational, Rational> interval() const {
    std::lock_guard<std::mutex> g(mu_);
    return {root_.lo, root_.hi};
  }
  RealRoot root() const {
    std::lock_guard<std::mutex> g(mu_);
    return root_;
  }
  // Current modulus with the interval given at construction; stable under refinement.
  RealRoot canonical() const {
    std::lock_guard<std::mutex> g(mu_);
    RealRoot r = root_;
    if (!r.exact) r.lo = lo0_, r.hi = hi0_;
    return r;
  }

  Poly reduce(const Poly& a) const {
    std::lock_guard<std::mutex> g(mu_);
    return a % root_.poly;
  }

  bool is_zero(const Poly& a) const {
    std::lock_guard<std::mutex> g(mu_);
    return zero_locked(a);
  }

  int sign(const Poly& a) const {
    std::lock_guard<std::mutex> g(mu_);
    if (zero_locked(a)) return 0;
    if (root_.exact) return sgn(a(*root_.exact));
    Poly r = a % root_.poly;
    Rational w = root_.hi - root_.lo;
    while (true) {
      auto [lo, hi] = r.range(root_.lo, root_.hi);
      if (sgn(lo) > 0) return 1;
      if (sgn(hi) < 0) return -1;
      w /= 1 << 8;
      refine(root_, w);
      if (root_.exact) return sgn(r(*root_.exact));
    }
  }

  Poly inverse(const Poly& a) const {
    std::lock_guard<std::mutex> g(mu_);
    if (zero_locked(a)) throw std::domain_error("division by zero in number field");
    auto [gg, s] = gcd_inverse(a % root_.poly, root_.poly);
    if (gg.degree() != 0) throw std::logic_error("number field modulus not coprime after splitting");
    return s % root_.poly;
  }

  double to_double(const Poly& a) const {
    std::lock_guard<std::mutex> g(mu_);
    if (root_.exact) return a(*root_.exact).get_d();
    Poly r = a % root_.poly;
    if (r.degree() <= 0) return r.coeff(0).get_d();
    Rational w = root_.hi - root_.lo;
    while (true) {
      auto [lo, hi] = r.range(root_.lo, root_.hi);
      Rational m = abs(lo) > abs(hi) ? abs(lo) : abs(hi);
      if (hi - lo <= m * pow2_inverse(60) || hi - lo < pow2_inverse(124)) return Rational((lo + hi) / 2).get_d();
      w /= 1 << 10;
      refine(root_, w);
      if (root_.exact) return r(*root_.exact).get_d();
    }
  }

  double theta() const { return to_double(Poly::x()); }

 private:
  bool zero_locked(const Poly& a) const {
    Poly r = a % root_.poly;
    if (r.is_zero()) return true;
    if (root_.exact) return r(*root_.exact) == 0;
    Poly g = gcd(r, root_.poly);
    if (g.degree() == 0) return false;
    Sturm st(g);
    if (sgn(g(root_.lo)) == 0) refine(root_, (root_.hi - root_.lo) / 2);
    bool contains = st.count(root_.lo, root_.hi) > 0;
    if (contains) root_.poly = g;
    else root_.poly = (root_.poly / g).monic();
    if (root_.poly.degree() == 1) {
      root_.exact = -root_.poly.coeff(0) / root_.poly.coeff(1);
      root_.lo = root_.hi = *root_.exact;
    }
    return contains;
  }

  mutable std::mutex mu_;
  mutable RealRoot root_;
  Rational lo0_, hi0_;
};

using FieldPtr = std::shared_ptr<NumberField>;

// Element of Q or of a NumberField. Elements of different fields never mix.
class Algebraic {
 public:
  Algebraic() = default;
  Algebraic(long v) : c_(Poly::constant(Rational(v))) {}
  Algebraic(int v) : c_(Poly::constant(Rational(v))) {}
  Algebraic(const Rational& q) : c_(Poly::constant(q)) {}
  Algebraic(FieldPtr f, Poly c) : f_(std::move(f)), c_(f_ ? f_->reduce(c) : std::move(c)) {
    if (!f_ && c_.degree() > 0) throw std::logic_error("polynomial element without a field");
  }
  static Algebraic generator(const FieldPtr& f) { return Algebraic(f, Poly::x()); }

  const FieldPtr& field() const { return f_; }
  const Poly& poly() const { return c_; }

  bool is_rational() const { return c_.degree() <= 0; }
  Rational rational() const {
    if (!is_rational()) throw std::logic_error("irrational value");
    return c_.coeff(0);
  }

  int sign() const {
    if (c_.degree() <= 0) return sgn(c_.coeff(0));
    return f_->sign(c_);
  }
  bool is_zero() const {
    if (c_.degree() <= 0) return c_.is_zero();
    return f_->is_zero(c_);
  }
  double to_double() const {
    if (c_.degree() <= 0) return c_.coeff(0).get_d();
    return f_->to_double(c_);
  }

  Algebraic operator-() const { return Algebraic(f_, -c_, raw{}); }
  friend Algebraic operator+(const Algebraic& a, const Algebraic& b) {
    return Algebraic(join(a, b), a.c_ + b.c_, raw{});
  }
  friend Algebraic operator-(const Algebraic& a, const Algebraic& b) {
    return Algebraic(join(a, b), a.c_ - b.c_, raw{});
  }
  friend Algebraic operator*(const Algebraic& a, const Algebraic& b) {
    FieldPtr f = join(a, b);
    Poly p = a.c_ * b.c_;
    if (f && p.degree() > 0) p = f->reduce(p);
    return Algebraic(f, std::move(p), raw{});
  }
  friend Algebraic operator/(const Algebraic& a, const Algebraic& b) {
    if (b.c_.degree() <= 0) {
      if (b.c_.is_zero()) throw std::domain_error("division by zero");
      return Algebraic(a.f_, (Rational(1) / b.c_.coeff(0)) * a.c_, raw{});
    }
    FieldPtr f = join(a, b);
    return a * Algebraic(f, f->inverse(b.c_), raw{});
  }
  Algebraic& operator+=(const Algebraic& b) { return *this = *this + b; }
  Algebraic& operator-=(const Algebraic& b) { return *this = *this - b; }
  Algebraic& operator*=(const Algebraic& b) { return *this = *this * b; }
  Algebraic& operator/=(const Algebraic& b) { return *this = *this / b; }

  friend bool operator==(const Algebraic& a, const Algebraic& b) { return (a - b).is_zero(); }
  friend bool operator!=(const Algebraic& a, const Algebraic& b) { return !(a == b); }
  friend bool operator<(const Algebraic& a, const Algebraic& b) { return (a - b).sign() < 0; }
  friend bool operator>(const Algebraic& a, const Algebraic& b) { return b < a; }
  friend bool operator<=(const Algebraic& a, const Algebraic& b) { return !(b < a); }
  friend bool operator>=(const Algebraic& a, const Algebraic& b) { return !(a < b); }

  Algebraic pow(int k) const {
    if (k < 0) return Algebraic(1) / pow(-k);
    Algebraic r(1), b(*this);
    while (k) {
      if (k & 1) r *= b;
      b *= b;
      k >>= 1;
    }
    return r;
  }

  // "p/q" for rationals, otherwise a polynomial in L.
  std::string str() const {
    if (is_rational()) return to_string(c_.coeff(0));
    return c_.str("L");
  }

 private:
  struct raw {};
  Algebraic(FieldPtr f, Poly c, raw) : f_(std::move(f)), c_(std::move(c)) {}
  static FieldPtr join(const Algebraic& a, const Algebraic& b) {
    if (a.f_ && b.f_ && a.f_ != b.f_) throw std::logic_error("mixing elements of different number fields");
    return a.f_ ? a.f_ : b.f_;
  }

  FieldPtr f_;
  Poly c_;
};

inline Algebraic abs(const Algebraic& a) { return a.sign() < 0 ? -a : a; }

}  // namespace ttmap
