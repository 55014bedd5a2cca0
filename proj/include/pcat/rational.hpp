#pragma once

// Exact rational support for the period solver: arbitrary-precision integers,
// normalized fractions, and best rational approximation with a bounded
// denominator via continued-fraction convergents (with the final
// semiconvergent considered).

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace pcat {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt big_gcd(BigInt a, BigInt b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const BigInt r = a % b;
    a = b;
    b = r;
  }
  return a;
}

inline BigInt big_lcm(const BigInt& a, const BigInt& b) {
  if (a == 0 || b == 0) return 0;
  BigInt l = (a / big_gcd(a, b)) * b;
  if (l < 0) l = -l;
  return l;
}

struct Fraction {
  BigInt num = 0;
  BigInt den = 1;

  Fraction() = default;
  Fraction(BigInt n, BigInt d) : num(std::move(n)), den(std::move(d)) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("Fraction: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const BigInt g = big_gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const {
    return num.convert_to<double>() / den.convert_to<double>();
  }

  friend Fraction operator*(const Fraction& a, const Fraction& b) {
    return Fraction(a.num * b.num, a.den * b.den);
  }
};

inline bool fits_int64(const BigInt& v) {
  return v >= std::numeric_limits<long long>::min() &&
         v <= std::numeric_limits<long long>::max();
}

struct RationalApprox {
  BigInt num = 0;
  BigInt den = 1;
  double error = 0.0;  // |num/den - x|
};

// Best rational approximation to x >= 0 with denominator <= max_den.
// Convergents of the continued fraction, finishing with the admissible
// semiconvergent if it lands closer.
inline RationalApprox best_rational(double x, long long max_den) {
  if (!(max_den >= 1)) throw std::invalid_argument("best_rational: bad bound");
  if (!std::isfinite(x)) throw std::invalid_argument("best_rational: non-finite");
  const bool negative = x < 0.0;
  const double ax = std::abs(x);

  BigInt p_prev = 0, q_prev = 1;  // h_{-2}/k_{-2}
  BigInt p = 1, q = 0;            // h_{-1}/k_{-1}
  double frac = ax;
  BigInt p_cur, q_cur;
  bool exact = false;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(frac);
    if (fl >= 9.0e18) break;  // remainder below double resolution; p/q is final
    BigInt a(static_cast<long long>(fl));
    p_cur = a * p + p_prev;
    q_cur = a * q + q_prev;
    if (q_cur > max_den) {
      // admissible semiconvergent: largest trim t with q_trim <= max_den
      const BigInt t = (BigInt(max_den) - q_prev) / q;
      RationalApprox best;
      best.num = p;
      best.den = q;
      best.error = std::abs(Fraction(p, q).to_double() - ax);
      if (t > 0) {
        const BigInt ps = t * p + p_prev;
        const BigInt qs = t * q + q_prev;
        const double err_s = std::abs(Fraction(ps, qs).to_double() - ax);
        if (err_s < best.error) {
          best.num = ps;
          best.den = qs;
          best.error = err_s;
        }
      }
      if (negative) best.num = -best.num;
      return best;
    }
    p_prev = p;
    q_prev = q;
    p = p_cur;
    q = q_cur;
    const double rem = frac - fl;
    if (rem <= 0.0 || !std::isfinite(1.0 / rem)) {
      exact = true;
      break;
    }
    const double err_now = std::abs(Fraction(p, q).to_double() - ax);
    if (err_now == 0.0) {
      exact = true;
      break;
    }
    frac = 1.0 / rem;
  }
  RationalApprox r;
  r.num = negative ? BigInt(-p) : p;
  r.den = q;
  r.error = exact ? 0.0 : std::abs(Fraction(p, q).to_double() - ax);
  return r;
}

}  // namespace pcat
