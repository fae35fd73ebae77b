#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace ttmap {

using Rational = mpq_class;
using Integer = mpz_class;

inline std::string to_string(const Rational& q) {
  Rational c(q);
  c.canonicalize();
  return c.get_str();
}

inline Rational parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational");
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

// Exact conversion of a finite double.
inline Rational from_double(double x) {
  Rational q(x);
  q.canonicalize();
  return q;
}

// a/b in lowest terms; the two-argument mpq_class constructor does not reduce.
inline Rational ratio(long a, long b) {
  if (b == 0) throw std::invalid_argument("zero denominator");
  Rational q(a, b);
  q.canonicalize();
  return q;
}

inline int sign(const Rational& q) { return sgn(q); }

// 2^-k as an exact rational.
inline Rational pow2_inverse(unsigned k) {
  Rational q(1);
  mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), k);
  return q;
}

}  // namespace ttmap
