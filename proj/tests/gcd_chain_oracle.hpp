#pragma once

// Test-only oracle for the period construction: the explicit gcd-chain
// parametrization of the integer certificates, written out for orders 3, 4
// and 5. Production code reduces the ratio chain to a primitive lattice
// vector instead; these chains provide an independent route whose output
// must land inside the production lattice.
//
// Order 3: with s1/s2 = n1/d1 and the closing ratio s2/(s1+s2) = n2/d2,
//   (k, l) = a (n2, d1) / gcd(n2, d1),  m2 - m1 = k n1,  m3 - m2 = k d1.
// Orders 4 and 5 use
//   k1 = l n2 n3 / gcd(d1, n3), k2 = l d1 n3 / gcd(d1, n3),
//   k3 = l d1 d2 / gcd(d1, n3), k4 = l d1 d2 d3 / (n4 gcd(d1, n3)),
// with m_{i+1} - m_i = k_i n_i. The parametrization is a sufficient family:
// every output is aligned, but the smallest member can be an integer
// multiple of the true smallest period (see the order-4 spacing (2,3,5)).

#include <stdexcept>
#include <vector>

#include "pcat/rational.hpp"

namespace pcat_test {

struct ChainCertificate {
  std::vector<pcat::BigInt> diffs;  // m_{i+1} - m_i, i = 1..n-1
  pcat::BigInt scale;               // the chain parameter (a or l) used
};

struct ChainRatios {
  std::vector<pcat::BigInt> n;  // n_1..n_{n-1}; last is the closing ratio
  std::vector<pcat::BigInt> d;
};

// Rationalize the consecutive ratios s_i/s_{i+1} (i = 1..n-2) and the closing
// ratio s_{n-1}/(s_1+...+s_{n-1}) with exact small-denominator rationals.
inline ChainRatios chain_ratios(const std::vector<double>& alphas,
                                long long max_den = 1000) {
  const size_t n = alphas.size();
  ChainRatios r;
  for (size_t i = 1; i + 1 < n; ++i) {
    const double rho = (alphas[i] - alphas[i - 1]) / (alphas[i + 1] - alphas[i]);
    const pcat::RationalApprox ra = pcat::best_rational(rho, max_den);
    r.n.push_back(ra.num);
    r.d.push_back(ra.den);
  }
  const double closing =
      (alphas[n - 1] - alphas[n - 2]) / (alphas[n - 1] - alphas[0]);
  const pcat::RationalApprox ra = pcat::best_rational(closing, max_den);
  r.n.push_back(ra.num);
  r.d.push_back(ra.den);
  return r;
}

inline ChainCertificate order3_chain(const ChainRatios& r, const pcat::BigInt& a) {
  const pcat::BigInt& n1 = r.n[0];
  const pcat::BigInt& d1 = r.d[0];
  const pcat::BigInt& n2 = r.n[1];
  const pcat::BigInt& d2 = r.d[1];
  if (d1 * d2 != n2 * (d1 + n1))
    throw std::runtime_error("order3_chain: consistency relation violated");
  const pcat::BigInt g = pcat::big_gcd(n2, d1);
  const pcat::BigInt k = a * n2 / g;
  ChainCertificate cert;
  cert.scale = a;
  cert.diffs = {k * n1, k * d1};
  return cert;
}

inline ChainCertificate order45_chain(const ChainRatios& r, const pcat::BigInt& l) {
  const size_t m = r.n.size();  // n - 1 ratios for order n
  if (m != 3 && m != 4)
    throw std::runtime_error("order45_chain: only orders 4 and 5");
  const pcat::BigInt g = pcat::big_gcd(r.d[0], r.n[2]);
  std::vector<pcat::BigInt> k;
  {
    const pcat::BigInt num1 = l * r.n[1] * r.n[2];
    const pcat::BigInt num2 = l * r.d[0] * r.n[2];
    const pcat::BigInt num3 = l * r.d[0] * r.d[1];
    if (num1 % g != 0 || num2 % g != 0 || num3 % g != 0)
      throw std::runtime_error("order45_chain: scale does not divide the chain");
    k = {num1 / g, num2 / g, num3 / g};
  }
  if (m == 4) {
    const pcat::BigInt num4 = l * r.d[0] * r.d[1] * r.d[2];
    const pcat::BigInt den4 = r.n[3] * g;
    if (num4 % den4 != 0)
      throw std::runtime_error("order45_chain: scale does not divide the chain");
    k.push_back(num4 / den4);
  }
  // chain self-consistency: k_{i+1} n_{i+1} = k_i d_i
  for (size_t i = 0; i + 1 < k.size(); ++i)
    if (k[i + 1] * r.n[i + 1] != k[i] * r.d[i])
      throw std::runtime_error("order45_chain: k-chain inconsistent");
  ChainCertificate cert;
  cert.scale = l;
  cert.diffs.resize(k.size());
  for (size_t i = 0; i < k.size(); ++i) cert.diffs[i] = k[i] * r.n[i];
  // closing check: m_n - m_1 = k_{n-1} d_{n-1}
  pcat::BigInt total = 0;
  for (const pcat::BigInt& d : cert.diffs) total += d;
  if (total != k.back() * r.d.back())
    throw std::runtime_error("order45_chain: closing relation violated");
  return cert;
}

// Smallest chain parameter for which all k_i are integers.
inline pcat::BigInt minimal_chain_scale(const ChainRatios& r) {
  if (r.n.size() == 2) return 1;  // order 3: k = a n2/g, l = a d1/g are integral
  const pcat::BigInt g = pcat::big_gcd(r.d[0], r.n[2]);
  pcat::BigInt l = 1;
  auto lift = [&l](const pcat::BigInt& num, const pcat::BigInt& den) {
    // smallest multiplier making num * l / den integral
    const pcat::BigInt need = den / pcat::big_gcd(num, den);
    l = pcat::big_lcm(l, need);
  };
  lift(r.n[1] * r.n[2], g);
  lift(r.d[0] * r.n[2], g);
  lift(r.d[0] * r.d[1], g);
  if (r.n.size() == 4) lift(r.d[0] * r.d[1] * r.d[2], r.n[3] * g);
  return l;
}

}  // namespace pcat_test
