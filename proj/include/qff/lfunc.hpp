#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "qff/characters.hpp"
#include "qff/divisor.hpp"
#include "qff/error.hpp"
#include "qff/quad_ext.hpp"

namespace qff {

struct LPolynomial {
  int q = 0;
  int genus = 0;
  std::vector<long long> coeffs;  // c_0 .. c_{2g}
  friend bool operator==(const LPolynomial& a, const LPolynomial& b) {
    return a.q == b.q && a.genus == b.genus && a.coeffs == b.coeffs;
  }
};

inline cplx q_pow(int q, cplx s) { return std::exp(s * std::log(double(q))); }

// zeta of F_q(x): 1/((1 - q^{-s})(1 - q^{1-s})).
inline cplx zeta_rational(const BaseField& K, cplx s) {
  cplx u = q_pow(K.q(), -s);
  cplx a = 1.0 - u, b = 1.0 - double(K.q()) * u;
  if (std::abs(a) < 1e-14 || std::abs(b) < 1e-14) fail(Errc::PoleAt, "zeta has a pole at s");
  return 1.0 / (a * b);
}

// Splitting symbols of every place of degree <= n, in places_up_to order.
inline std::vector<int> chi_table(const QuadExt& E, int n) {
  const auto& places = places_up_to(E.field(), std::max(n, 1));
  std::vector<int> chi;
  chi.reserve(places.size());
  for (auto& v : places) chi.push_back(v.degree() <= n ? chi_place(E, v) : 0);
  return chi;
}

// out[k] += sum over effective a of degree k <= n of prod w(v, ord_v a), with
// w the per-place weight; places with all-zero weights are skipped.
inline std::vector<long long> divisor_weight_sums(const QuadExt& E, int n,
                                                 const std::function<long long(std::size_t, int)>& w) {
  const auto& places = places_up_to(E.field(), std::max(n, 1));
  std::vector<long long> out(std::size_t(n + 1), 0);
  std::function<void(std::size_t, int, long long)> rec = [&](std::size_t start, int deg, long long prod) {
    out[std::size_t(deg)] += prod;
    for (std::size_t i = start; i < places.size(); ++i) {
      int d = places[i].degree();
      if (deg + d > n) break;  // places come sorted by degree
      for (int k = 1; deg + k * d <= n; ++k) {
        long long wk = w(i, k);
        if (wk == 0) continue;
        rec(i + 1, deg + k * d, prod * wk);
      }
    }
  };
  rec(0, 0, 1);
  return out;
}

// c_n = sum_{deg a = n} chi(F/a) for n = 0..2g.
inline LPolynomial lstar_coefficients(const QuadExt& E, std::uint64_t cap = kDefaultEnumerationCap) {
  LPolynomial L;
  L.q = E.field().q();
  L.genus = E.genus;
  int n = 2 * E.genus;
  // effective divisors of degree <= n number about q^n
  if (double(n) * std::log(double(L.q)) > std::log(double(cap))) fail(Errc::CapExceeded, "genus too large for divisor sums");
  auto chi = chi_table(E, n);
  auto sums = divisor_weight_sums(E, n, [&](std::size_t i, int k) -> long long {
    int c = chi[i];
    if (c == 0) return 0;
    return (k % 2 == 1) ? c : 1;
  });
  L.coeffs = sums;
  return L;
}

// sum_{deg a = n} chi(F/a) for every n <= N (also past 2g, where it vanishes).
inline std::vector<long long> divisor_char_sums(const QuadExt& E, int N) {
  auto chi = chi_table(E, N);
  return divisor_weight_sums(E, N, [&](std::size_t i, int k) -> long long {
    int c = chi[i];
    if (c == 0) return 0;
    return (k % 2 == 1) ? c : 1;
  });
}

// b_n = sum_{deg b = n} mu(b) chi(F/b).
inline std::vector<long long> lstar_inverse_series(const QuadExt& E, int N) {
  if (N < 0) fail(Errc::BadConfig, "N must be >= 0");
  auto chi = chi_table(E, N);
  return divisor_weight_sums(E, N, [&](std::size_t i, int k) -> long long { return k == 1 ? -chi[i] : 0; });
}

inline cplx lpoly_eval_u(const LPolynomial& L, cplx u) {
  cplx r = 0;
  for (auto it = L.coeffs.rbegin(); it != L.coeffs.rend(); ++it) r = r * u + double(*it);
  return r;
}

// L_F(q^{-s}) = L_K L*_F with L_K = 1.
inline cplx lfunc_eval(const LPolynomial& L, cplx s) { return lpoly_eval_u(L, q_pow(L.q, -s)); }
inline cplx lfunc_eval(const QuadExt& E, cplx s) { return lfunc_eval(lstar_coefficients(E), s); }

namespace detail {

using i128 = __int128;

inline i128 i128_abs(i128 a) { return a < 0 ? -a : a; }
inline i128 i128_gcd(i128 a, i128 b) {
  a = i128_abs(a);
  b = i128_abs(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline void trim(std::vector<i128>& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline void make_primitive(std::vector<i128>& a) {
  i128 g = 0;
  for (auto x : a) g = i128_gcd(g, x);
  if (g > 1)
    for (auto& x : a) x /= g;
  if (!a.empty() && a.back() < 0)
    for (auto& x : a) x = -x;
}

// Pseudo-remainder of a by b.
inline std::vector<i128> prem(std::vector<i128> a, const std::vector<i128>& b) {
  int db = int(b.size()) - 1;
  while (int(a.size()) - 1 >= db && !a.empty()) {
    int da = int(a.size()) - 1;
    i128 la = a.back(), lb = b.back();
    for (auto& x : a) x *= lb;
    for (int i = 0; i <= db; ++i) a[std::size_t(da - db + i)] -= la * b[std::size_t(i)];
    trim(a);
    make_primitive(a);
  }
  return a;
}

inline std::vector<i128> int_gcd(std::vector<i128> a, std::vector<i128> b) {
  make_primitive(a);
  make_primitive(b);
  while (!b.empty()) {
    auto r = prem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  make_primitive(a);
  return a;
}

// Exact division over Z (b divides a up to a rational content).
inline std::vector<double> div_double(const std::vector<i128>& a, const std::vector<i128>& b) {
  std::vector<double> r(a.begin(), a.end()), q(a.size() - b.size() + 1, 0.0);
  int db = int(b.size()) - 1;
  for (int k = int(a.size()) - 1; k >= db; --k) {
    double c = r[std::size_t(k)] / double(b.back());
    q[std::size_t(k - db)] = c;
    for (int i = 0; i <= db; ++i) r[std::size_t(k - db + i)] -= c * double(b[std::size_t(i)]);
  }
  return q;
}

inline cplx horner(const std::vector<double>& c, cplx z) {
  cplx r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
  return r;
}

}  // namespace detail

// Roots of an integer polynomial, each distinct root once: square-free part by
// a primitive PRS, then Durand-Kerner with a Newton polish.
inline std::vector<cplx> integer_poly_roots(const std::vector<long long>& coeffs) {
  std::vector<detail::i128> a(coeffs.begin(), coeffs.end());
  detail::trim(a);
  if (a.size() <= 1) return {};
  std::vector<detail::i128> da;
  for (std::size_t i = 1; i < a.size(); ++i) da.push_back(a[i] * detail::i128(i));
  auto g = detail::int_gcd(a, da);
  std::vector<double> f = g.size() > 1 ? detail::div_double(a, g) : std::vector<double>(a.begin(), a.end());
  int n = int(f.size()) - 1;
  double lead = f.back();
  for (auto& x : f) x /= lead;
  std::vector<cplx> z(static_cast<std::size_t>(n));
  double radius = 0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(f[std::size_t(i)]));
  radius = std::pow(std::max(radius, 1e-3), 1.0 / n);
  for (int i = 0; i < n; ++i) z[std::size_t(i)] = std::polar(radius, 0.4 + 2 * detail::pi() * i / n);
  for (int it = 0; it < 200; ++it) {
    double change = 0;
    for (int i = 0; i < n; ++i) {
      cplx den = 1;
      for (int j = 0; j < n; ++j)
        if (j != i) den *= z[std::size_t(i)] - z[std::size_t(j)];
      cplx d = detail::horner(f, z[std::size_t(i)]) / den;
      z[std::size_t(i)] -= d;
      change = std::max(change, std::abs(d));
    }
    if (change < 1e-13) break;
  }
  std::vector<double> df;
  for (int i = 1; i <= n; ++i) df.push_back(f[std::size_t(i)] * i);
  for (auto& r : z)
    for (int k = 0; k < 3; ++k) {
      cplx d = detail::horner(df, r);
      if (std::abs(d) == 0) break;
      r -= detail::horner(f, r) / d;
    }
  return z;
}

// max | |u| sqrt(q) - 1 | over the roots u of L.
inline double rh_check(const LPolynomial& L) {
  auto roots = integer_poly_roots(L.coeffs);
  double dev = 0;
  for (auto& u : roots) dev = std::max(dev, std::abs(std::abs(u) * std::sqrt(double(L.q)) - 1.0));
  return dev;
}

}  // namespace qff
