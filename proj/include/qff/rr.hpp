#pragma once

#include <climits>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qff/divisor.hpp"
#include "qff/error.hpp"
#include "qff/poly.hpp"

namespace qff {

// Multiplicity of the monic irreducible P in f (f nonzero).
inline int poly_valuation(Poly f, const Poly& P) {
  int k = 0;
  while (f.degree() >= P.degree()) {
    auto [qt, r] = divmod(f, P);
    if (!r.is_zero()) break;
    f = std::move(qt);
    ++k;
  }
  return k;
}

// Element of F_q(x) as num/den in lowest terms with den monic.
class RationalFunction {
 public:
  RationalFunction() = default;
  explicit RationalFunction(const Field& F) : num_(F), den_(Poly::one(F)) {}
  explicit RationalFunction(Poly num) : num_(std::move(num)), den_(Poly::one(num_.field())) {}
  RationalFunction(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }
  static RationalFunction constant(const Field& F, Elem a) { return RationalFunction(Poly::constant(F, a)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  const Field& field() const { return den_.field(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.degree() == 0; }

  // ord_v; INT_MAX for the zero function.
  int ord(const Place& v) const {
    if (num_.is_zero()) return INT_MAX;
    if (v.is_infinity()) return den_.degree() - num_.degree();
    return poly_valuation(num_, v.poly()) - poly_valuation(den_, v.poly());
  }

  Divisor divisor() const {
    if (num_.is_zero()) fail(Errc::ZeroPolynomial, "divisor of zero");
    std::vector<Divisor::Term> t;
    if (num_.degree() > 0)
      for (auto& [P, e] : factor(num_).factors) t.emplace_back(Place::finite(P), e);
    if (den_.degree() > 0)
      for (auto& [P, e] : factor(den_).factors) t.emplace_back(Place::finite(P), -e);
    int oi = den_.degree() - num_.degree();
    if (oi != 0) t.emplace_back(Place::infinity(field()), oi);
    return Divisor::from_terms(std::move(t));
  }

  // Reduction at a place where ord_v >= 0: a residue mod P for finite v, a
  // constant for Infinity (the value at infinity).
  Poly residue_at(const Place& v) const {
    const Field& F = field();
    if (v.is_infinity()) {
      if (num_.degree() > den_.degree()) fail(Errc::NotIntegralAtModulus, "pole at infinity");
      if (num_.degree() < den_.degree() || num_.is_zero()) return Poly(F);
      return Poly::constant(F, F.div(num_.lead(), den_.lead()));
    }
    const Poly& P = v.poly();
    Poly d = den_ % P;
    if (d.is_zero()) fail(Errc::NotIntegralAtModulus, "pole at " + P.to_string());
    return mulmod(num_ % P, inverse_mod(d, P), P);
  }

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.den_ == b.den_) return RationalFunction(a.num_ + b.num_, a.den_);
    return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
    if (a.den_ == b.den_) return RationalFunction(a.num_ - b.num_, a.den_);
    return RationalFunction(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    if (b.is_zero()) fail(Errc::DivisionByZero, "rational function division by zero");
    return RationalFunction(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(const RationalFunction& a, const RationalFunction& b) { return !(a == b); }

  std::string to_string() const {
    if (den_.degree() == 0) return num_.to_string();
    return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
  }

 private:
  void normalize() {
    if (den_.is_zero()) fail(Errc::DivisionByZero, "zero denominator");
    const Field& F = den_.field();
    if (num_.is_zero()) {
      num_ = Poly(F);
      den_ = Poly::one(F);
      return;
    }
    if (den_.degree() > 0) {
      Poly g = gcd(num_, den_);
      if (g.degree() > 0) {
        num_ = num_ / g;
        den_ = den_ / g;
      }
    }
    Elem l = den_.lead();
    if (l != 1) {
      Elem li = F.inv(l);
      num_ = num_.scaled(li);
      den_ = den_.scaled(li);
    }
  }

  Poly num_, den_;
};

inline RationalFunction parse_rational(const Field& F, const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ' && ch != '(' && ch != ')') s += ch;
  std::size_t slash = s.find('/');
  if (slash == std::string::npos) return RationalFunction(parse_poly(F, s));
  return RationalFunction(parse_poly(F, s.substr(0, slash)), parse_poly(F, s.substr(slash + 1)));
}

inline std::uint64_t ipow_u64(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (b != 0 && r > UINT64_MAX / b) fail(Errc::Overflow, "power overflow");
    r *= b;
  }
  return r;
}

constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t(1) << 24;

inline int rr_dim(const Divisor& a) {
  long long d = a.degree();
  return d >= 0 ? int(d + 1) : 0;
}
inline int rr_dim(const BaseField&, const Divisor& a) { return rr_dim(a); }

// L(a) on the projective line.  With a = sum n_i p_i + n_inf inf, put
// D = prod_{n_i > 0} p_i^{n_i} and E = prod_{n_i < 0} p_i^{-n_i}; the
// divisibility and degree constraints solve to L(a) = { E g / D : deg g <= deg a }.
// Elements are indexed by the coefficient vector of g read as a base-q integer.
class RRSpace {
 public:
  RRSpace(const Field& F, Divisor a) : F_(&F), a_(std::move(a)), E_(Poly::one(F)), D_(Poly::one(F)) {
    for (auto& [v, n] : a_.terms()) {
      if (v.is_infinity()) continue;
      for (int i = 0; i < (n > 0 ? n : -n); ++i) (n > 0 ? D_ : E_) *= v.poly();
    }
    dim_ = rr_dim(a_);
  }

  const Field& field() const { return *F_; }
  const Divisor& divisor() const { return a_; }
  int dim() const { return dim_; }
  const Poly& E() const { return E_; }
  const Poly& D() const { return D_; }
  // Number of elements, with the enumeration cap applied.
  std::uint64_t size(std::uint64_t cap = kDefaultEnumerationCap) const {
    std::uint64_t n = 1;
    for (int i = 0; i < dim_; ++i) {
      n *= std::uint64_t(F_->q());
      if (n > cap) fail(Errc::CapExceeded, "L(" + a_.to_string() + ") has more than " + std::to_string(cap) + " elements");
    }
    return n;
  }

  RationalFunction from_coordinates(const Poly& g) const { return RationalFunction(E_ * g, D_); }
  RationalFunction element(std::uint64_t index) const { return from_coordinates(Poly::from_index(*F_, index)); }
  std::vector<RationalFunction> basis() const {
    std::vector<RationalFunction> b;
    for (int k = 0; k < dim_; ++k) b.push_back(from_coordinates(Poly::monomial(*F_, k)));
    return b;
  }
  // Coordinates g of an element alpha = E g / D, or false if alpha is not in L(a).
  bool coordinates(const RationalFunction& alpha, Poly& g) const {
    if (alpha.is_zero()) {
      g = Poly(*F_);
      return true;
    }
    RationalFunction t = alpha * RationalFunction(D_, E_);
    if (!t.is_polynomial()) return false;
    g = t.num();
    return g.degree() < dim_;
  }
  bool contains(const RationalFunction& alpha) const {
    if (alpha.is_zero()) return true;
    for (auto& [v, n] : a_.terms())
      if (alpha.ord(v) < -n) return false;
    // Places outside the support need ord >= 0: no other poles.
    Poly g;
    return coordinates(alpha, g);
  }

 private:
  const Field* F_;
  Divisor a_;
  Poly E_, D_;
  int dim_ = 0;
};

inline RRSpace rr_basis(const BaseField& K, const Divisor& a) { return RRSpace(K.field(), a); }

// Visit every element of L(a) in index order.
template <class Fn>
void rr_enumerate(const RRSpace& L, Fn&& fn, std::uint64_t cap = kDefaultEnumerationCap) {
  std::uint64_t n = L.size(cap);
  for (std::uint64_t i = 0; i < n; ++i) fn(i, L.element(i));
}

// #{alpha in L(a+b) : ord_v(alpha) = -ord_v(a) for v in supp a} via
// sum_{0 <= c <= a} mu(c) q^{l(a+b-c)}.
inline long long count_exact_order_subset(const BaseField& K, const Divisor& a, const Divisor& b) {
  require_effective(a, "count_exact_order_subset");
  require_effective(b, "count_exact_order_subset");
  if (!a.disjoint(b)) fail(Errc::OverlappingSupport, a.to_string() + " and " + b.to_string() + " share a place");
  long long total = 0;
  Divisor a1 = squarefree_split(a).first;
  for_each_subdivisor(a1, [&](const Divisor& c) { total += mobius(c) * checked_pow(K.q(), rr_dim(a + b - c)); });
  return total;
}

}  // namespace qff
