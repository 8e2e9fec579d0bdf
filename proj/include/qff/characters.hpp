#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qff/divisor.hpp"
#include "qff/error.hpp"
#include "qff/poly.hpp"
#include "qff/quad_ext.hpp"
#include "qff/rr.hpp"

namespace qff {

using cplx = std::complex<double>;

namespace detail {

// Tr_{F_q[x]/(P) / F_q}(x^i) for i < deg P, by Newton's identities on the
// coefficients of the monic P.
inline std::vector<Elem> trace_vector(const Poly& P) {
  const Field& F = P.field();
  int d = P.degree();
  std::vector<Elem> s(std::size_t(d), 0);
  if (d == 0) return s;
  s[0] = F.from_int(d);
  for (int k = 1; k < d; ++k) {
    Elem acc = F.mul(F.from_int(k), P.coeff(d - k));
    for (int i = 1; i < k; ++i) acc = F.add(acc, F.mul(P.coeff(d - i), s[std::size_t(k - i)]));
    s[std::size_t(k)] = F.neg(acc);
  }
  return s;
}

inline Elem trace_with(const Poly& r, const std::vector<Elem>& tv) {
  const Field& F = r.field();
  Elem t = 0;
  for (int i = 0; i <= r.degree(); ++i) t = F.add(t, F.mul(r.coeff(i), tv[std::size_t(i)]));
  return t;
}

inline double pi() { return std::acos(-1.0); }

inline cplx root_of_unity(long long k, long long M) {
  long long r = ((k % M) + M) % M;
  double a = 2.0 * pi() * double(r) / double(M);
  return {std::cos(a), std::sin(a)};
}

}  // namespace detail

// ------------------------------------------------------- splitting symbols

// chi(F/v): 0 ramified, +1 split, -1 inert.  Odd q uses Jacobi reciprocity on
// the canonical c f; even q the trace of the reduced generator in the residue
// field via power sums.
inline int chi_place(const QuadExt& E, const Place& v) {
  const Field& F = E.field();
  if (E.kind == ExtKind::Kummer) {
    const Poly& w = E.omega.num();
    if (v.is_infinity()) return w.degree() % 2 == 1 ? 0 : residue_symbol(F, w.lead());
    return jacobi_symbol(w, v.poly());
  }
  const Poly& g = E.omega.num();
  const Poly& D = E.omega.den();
  if (v.is_infinity()) {
    int o = D.degree() - g.degree();
    if (o < 0) return 0;
    if (o > 0) return 1;
    return artin_schreier_symbol(F, F.div(g.lead(), D.lead()));
  }
  const Poly& P = v.poly();
  Poly dr = D % P;
  if (dr.is_zero()) return 0;
  Poly r = mulmod(g % P, inverse_mod(dr, P), P);
  return F.trace_to_prime(detail::trace_with(r, detail::trace_vector(P))) == 0 ? 1 : -1;
}

inline int chi_divisor(const QuadExt& E, const Divisor& a) {
  require_effective(a, "chi_divisor");
  int r = 1;
  for (auto& [v, n] : a.terms()) {
    int c = chi_place(E, v);
    if (c == 0) return 0;
    if (n % 2 == 1) r *= c;
  }
  return r;
}

// ------------------------------------------------------------ chi_c

// Residues of an element at the places of a modulus: mod P^e at finite places,
// the first e coefficients of the expansion in t = 1/x at Infinity.
struct LocalTuple {
  Divisor modulus;
  std::vector<std::pair<Place, Poly>> components;
};

inline LocalTuple local_tuple(const Divisor& c, const RationalFunction& w) {
  require_effective(c, "local_tuple");
  const Field& F = w.field();
  LocalTuple t;
  t.modulus = c;
  for (auto& [v, e] : c.terms()) {
    if (v.is_infinity()) {
      if (w.num().degree() > w.den().degree()) fail(Errc::NotIntegralAtModulus, w.to_string() + " has a pole at inf");
      Poly comp(F);
      if (!w.is_zero()) {
        // w(1/t) = t^{dd-dn} rev(num)/rev(den)
        int shift = w.den().degree() - w.num().degree();
        std::vector<Elem> rn(w.num().coeffs().rbegin(), w.num().coeffs().rend());
        std::vector<Elem> rd(w.den().coeffs().rbegin(), w.den().coeffs().rend());
        std::vector<Elem> ser(std::size_t(e), 0);
        Elem inv0 = F.inv(rd[0]);
        std::vector<Elem> q(std::size_t(e), 0);  // series rev(num)/rev(den) mod t^e
        for (int k = 0; k < e; ++k) {
          Elem acc = k < int(rn.size()) ? rn[std::size_t(k)] : Elem(0);
          for (int i = 1; i <= k && i < int(rd.size()); ++i) acc = F.sub(acc, F.mul(rd[std::size_t(i)], q[std::size_t(k - i)]));
          q[std::size_t(k)] = F.mul(acc, inv0);
        }
        for (int k = 0; k + shift < e; ++k) ser[std::size_t(k + shift)] = q[std::size_t(k)];
        comp = Poly(F, ser);
      }
      t.components.emplace_back(v, comp);
    } else {
      Poly Pe = pow(v.poly(), e);
      Poly dr = w.den() % Pe;
      if ((w.den() % v.poly()).is_zero()) fail(Errc::NotIntegralAtModulus, w.to_string() + " has a pole at " + v.to_string());
      t.components.emplace_back(v, mulmod(w.num() % Pe, inverse_mod(dr, Pe), Pe));
    }
  }
  return t;
}

// chi_v of a local component through its residue: Euler's criterion (odd q)
// or the absolute trace by repeated Frobenius (even q).
inline int chi_local(const Place& v, const Poly& comp) {
  const Field& F = v.field();
  if (v.is_infinity()) {
    Elem a = comp.coeff(0);
    return F.p() == 2 ? artin_schreier_symbol(F, a) : residue_symbol(F, a);
  }
  if (F.p() == 2) return trace_mod(comp, v.poly()) == 0 ? 1 : -1;
  return residue_symbol_mod(comp, v.poly());
}

inline int chi_c_eval(const LocalTuple& t) {
  int r = 1;
  for (std::size_t i = 0; i < t.components.size(); ++i) {
    const auto& [v, comp] = t.components[i];
    int e = t.modulus.ord(v);
    int c = chi_local(v, comp);
    if (c == 0) return 0;
    if (e % 2 == 1) r *= c;
  }
  return r;
}

inline int chi_c_eval(const Divisor& c, const RationalFunction& w) { return chi_c_eval(local_tuple(c, w)); }

// Evaluates chi_c on many elements; only residues mod each place are needed.
class ChiModulus {
 public:
  explicit ChiModulus(const Field& F, Divisor c) : F_(&F), c_(std::move(c)) {
    require_effective(c_, "ChiModulus");
    for (auto& [v, e] : c_.terms()) {
      if (e % 2 == 0) continue;
      places_.push_back(v);
    }
  }
  const Divisor& modulus() const { return c_; }
  // 0 if some residue vanishes (odd q); NotIntegralAtModulus on poles.
  int operator()(const RationalFunction& w) const {
    for (auto& [v, e] : c_.terms())
      if (e % 2 == 0) {
        // Even multiplicity: only integrality and (odd q) nonvanishing matter.
        Poly r = w.residue_at(v);
        if (F_->p() != 2 && r.is_zero()) return 0;
      }
    int s = 1;
    for (auto& v : places_) {
      int c = chi_local(v, w.residue_at(v));
      if (c == 0) return 0;
      s *= c;
    }
    return s;
  }

 private:
  const Field* F_;
  Divisor c_;
  std::vector<Place> places_;
};

// A generator of E integral at supp c with ord_v = 0 there (odd q): c f times
// a square (g/h)^2 fixing the order at Infinity.  Even q: the canonical
// generator, whose poles lie in supp d.
inline RationalFunction generator_for_modulus(const QuadExt& E, const Divisor& c) {
  if (E.kind == ExtKind::ArtinSchreier || !c.contains(Place::infinity(E.field())) || E.omega.num().degree() == 0)
    return E.omega;
  const Field& F = E.field();
  Poly C = c.finite_poly(F);
  int half = E.omega.num().degree() / 2;
  auto coprime_monic = [&](int deg) -> std::pair<bool, Poly> {
    std::uint64_t n = ipow_u64(std::uint64_t(F.q()), deg);
    for (std::uint64_t i = 0; i < n; ++i) {
      Poly h = Poly::monic_from_index(F, deg, i);
      if (gcd(h, C).degree() == 0) return {true, h};
    }
    return {false, Poly(F)};
  };
  for (int j = 0; j < 16; ++j) {
    auto [okh, h] = coprime_monic(half + j);
    auto [okg, g] = coprime_monic(j);
    if (okh && okg) return E.omega * RationalFunction(g * g, h * h);
  }
  fail(Errc::SizeExceeded, "no square correction found");
}

// --------------------------------------------------------- quotient rings

// F_q[x]/(C) for a modulus c supported on finite places, elements indexed by
// the coefficient vector of their reduced representative (base q).  The base-p
// digits of an index are its coordinates over F_p.
class QuotientRing {
 public:
  struct Component {
    Place v;
    int e;
    Poly Pe;
  };

  QuotientRing(const Field& F, Divisor c) : F_(&F), c_(std::move(c)) {
    require_effective(c_, "QuotientRing");
    if (c_.is_zero()) fail(Errc::NotEffective, "quotient ring needs a positive modulus");
    for (auto& [v, e] : c_.terms())
      if (v.is_infinity()) fail(Errc::InfinityInModulus, "quotient ring modulus " + c_.to_string() + " contains inf");
    C_ = c_.finite_poly(F);
    deg_ = C_.degree();
    size_ = ipow_u64(std::uint64_t(F.q()), deg_);
    if (size_ > (std::uint64_t(1) << 22)) fail(Errc::CapExceeded, "quotient ring too large");
    for (auto& [v, e] : c_.terms()) comps_.push_back({v, e, pow(v.poly(), e)});
    // CRT idempotents
    for (auto& comp : comps_) {
      Poly rest = C_ / comp.Pe;
      Poly inv = inverse_mod(rest % comp.Pe, comp.Pe);
      idem_.push_back((rest * inv) % C_);
    }
    pdig_ = F.r() * deg_;
    if (size_ <= 1024) {
      mul_.assign(size_ * size_, 0);
      for (std::uint64_t a = 0; a < size_; ++a) {
        Poly pa = element(a);
        for (std::uint64_t b = a; b < size_; ++b) {
          std::uint32_t r = std::uint32_t(mulmod(pa, element(b), C_).index());
          mul_[a * size_ + b] = mul_[b * size_ + a] = r;
        }
      }
    }
    unit_.resize(size_);
    for (std::uint64_t a = 0; a < size_; ++a) unit_[a] = a != 0 && gcd(element(a), C_).degree() == 0 ? 1 : 0;
  }
  QuotientRing(const QuotientRing&) = delete;
  QuotientRing& operator=(const QuotientRing&) = delete;

  const Field& field() const { return *F_; }
  const Divisor& modulus() const { return c_; }
  const Poly& C() const { return C_; }
  std::uint64_t size() const { return size_; }
  int degree() const { return deg_; }
  // Dimension over F_p.
  int pdim() const { return pdig_; }
  const std::vector<Component>& components() const { return comps_; }
  bool is_squarefree() const { return c_.is_squarefree(); }

  Poly element(std::uint64_t i) const { return Poly::from_index(*F_, i); }
  std::uint64_t index_of(const Poly& a) const { return (a % C_).index(); }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    if (F_->p() == 2) return a ^ b;
    std::uint64_t r = 0, w = 1;
    auto p = std::uint64_t(F_->p());
    for (int i = 0; i < pdig_; ++i) {
      r += ((a % p + b % p) % p) * w;
      a /= p;
      b /= p;
      w *= p;
    }
    return r;
  }
  std::uint64_t scale_p(std::uint64_t a, int k) const {
    auto p = std::uint64_t(F_->p());
    std::uint64_t r = 0, w = 1;
    for (int i = 0; i < pdig_; ++i) {
      r += ((a % p) * std::uint64_t(k) % p) * w;
      a /= p;
      w *= p;
    }
    return r;
  }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    if (!mul_.empty()) return mul_[a * size_ + b];
    return mulmod(element(a), element(b), C_).index();
  }
  bool is_unit(std::uint64_t a) const { return unit_[a] != 0; }
  std::vector<int> digits(std::uint64_t a) const {
    std::vector<int> d(static_cast<std::size_t>(pdig_));
    for (int i = 0; i < pdig_; ++i) {
      d[std::size_t(i)] = int(a % std::uint64_t(F_->p()));
      a /= std::uint64_t(F_->p());
    }
    return d;
  }
  std::uint64_t from_digits(const std::vector<int>& d) const {
    std::uint64_t r = 0;
    for (int i = pdig_ - 1; i >= 0; --i) r = r * std::uint64_t(F_->p()) + std::uint64_t(d[std::size_t(i)]);
    return r;
  }

  std::vector<Poly> project(std::uint64_t a) const {
    Poly pa = element(a);
    std::vector<Poly> out;
    for (auto& comp : comps_) out.push_back(pa % comp.Pe);
    return out;
  }
  std::uint64_t section(const std::vector<Poly>& residues) const {
    Poly s(*F_);
    for (std::size_t i = 0; i < comps_.size(); ++i) s += residues[i] * idem_[i];
    return index_of(s);
  }
  // Canonical map from elements integral at supp c.
  std::uint64_t theta(const RationalFunction& w) const {
    if (w.is_zero()) return 0;
    Poly d = w.den() % C_;
    if (gcd(d, C_).degree() != 0) fail(Errc::NotIntegralAtModulus, w.to_string() + " has a pole in supp " + c_.to_string());
    return mulmod(w.num() % C_, inverse_mod(d, C_), C_).index();
  }

 private:
  const Field* F_;
  Divisor c_;
  Poly C_;
  int deg_ = 0, pdig_ = 0;
  std::uint64_t size_ = 0;
  std::vector<Component> comps_;
  std::vector<Poly> idem_;
  std::vector<std::uint32_t> mul_;
  std::vector<std::uint8_t> unit_;
};

// ------------------------------------------------ multiplicative characters

// Phi(u) = exp(2 pi i e(u) / M) on units, 0 elsewhere, stored as the exact
// exponent table e (or -1 on non-units).
class MultChar {
 public:
  MultChar() = default;
  const QuotientRing& ring() const { return *R_; }
  int order_modulus() const { return M_; }
  int exponent(std::uint64_t a) const { return e_[a]; }
  cplx operator()(std::uint64_t a) const {
    int e = e_[a];
    return e < 0 ? cplx(0, 0) : detail::root_of_unity(e, M_);
  }
  bool principal() const {
    for (int e : e_)
      if (e > 0) return false;
    return true;
  }
  MultChar conj() const {
    MultChar c = *this;
    for (int& e : c.e_)
      if (e > 0) e = M_ - e;
    return c;
  }
  // Component exponents (square-free construction only).
  const std::vector<long long>& component_exponents() const { return a_; }
  // Primitive iff nontrivial on every CRT factor (square-free construction).
  bool primitive() const {
    if (a_.empty()) return primitive_by_ideals();
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (a_[i] % (order_[i]) == 0) return false;
    return true;
  }
  // Definition check: for every nonzero ideal I = (D), D | C, D != C, some
  // unit w = 1 mod I has Phi(w) != 1.
  bool primitive_by_ideals() const {
    const Field& F = R_->field();
    const Poly& C = R_->C();
    std::vector<Poly> divisors{Poly::one(F)};
    for (auto& comp : R_->components()) {
      std::vector<Poly> next;
      for (auto& d : divisors) {
        Poly t = d;
        for (int k = 0; k <= comp.e; ++k) {
          next.push_back(t);
          t *= comp.v.poly();
        }
      }
      divisors = std::move(next);
    }
    for (auto& D : divisors) {
      if (D == C) continue;
      bool found = false;
      for (std::uint64_t w = 0; w < R_->size() && !found; ++w) {
        if (!R_->is_unit(w) || e_[w] == 0) continue;
        if (((R_->element(w) - Poly::one(F)) % D).is_zero()) found = true;
      }
      if (!found) return false;
    }
    return true;
  }

  // Square-free modulus: a_i mod (q^{d_i} - 1) on each residue field, using
  // the least primitive element of each.
  static MultChar from_exponents(const QuotientRing& R, std::vector<long long> a);
  static std::vector<MultChar> all(const QuotientRing& R);
  // Odd q: u -> prod_v chi_v(u)^{ord_v c}, on any modulus.
  static MultChar quadratic(const QuotientRing& R);

 private:
  const QuotientRing* R_ = nullptr;
  int M_ = 1;
  std::vector<int> e_;
  std::vector<long long> a_, order_;
};

namespace detail {

struct ResidueLog {
  Poly P;
  std::uint64_t Q = 0;  // size of residue field
  std::vector<long long> log;  // indexed by residue index; -1 for 0
};

inline ResidueLog residue_log(const Poly& P) {
  const Field& F = P.field();
  ResidueLog L;
  L.P = P;
  L.Q = ipow_u64(std::uint64_t(F.q()), P.degree());
  std::uint64_t n = L.Q - 1;
  std::vector<std::uint64_t> primes;
  {
    std::uint64_t t = n;
    for (std::uint64_t d = 2; d * d <= t; ++d)
      if (t % d == 0) {
        primes.push_back(d);
        while (t % d == 0) t /= d;
      }
    if (t > 1) primes.push_back(t);
  }
  Poly g(F);
  for (std::uint64_t i = 1; i < L.Q; ++i) {
    Poly c = Poly::from_index(F, i);
    bool gen = true;
    for (auto l : primes)
      if (powmod(c, n / l, P).is_one()) {
        gen = false;
        break;
      }
    if (gen) {
      g = c;
      break;
    }
  }
  L.log.assign(L.Q, -1);
  Poly y = Poly::one(F);
  for (std::uint64_t k = 0; k < n; ++k) {
    L.log[y.index()] = (long long)k;
    y = mulmod(y, g, P);
  }
  return L;
}

}  // namespace detail

inline MultChar MultChar::from_exponents(const QuotientRing& R, std::vector<long long> a) {
  if (!R.is_squarefree()) fail(Errc::NotPrimitive, "general multiplicative characters need a square-free modulus");
  if (a.size() != R.components().size()) fail(Errc::RingMismatch, "one exponent per CRT component expected");
  MultChar X;
  X.R_ = &R;
  std::vector<detail::ResidueLog> logs;
  long long M = 1;
  for (auto& comp : R.components()) {
    logs.push_back(detail::residue_log(comp.v.poly()));
    long long o = (long long)logs.back().Q - 1;
    X.order_.push_back(o);
    M = std::lcm(M, o);
  }
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = ((a[i] % X.order_[i]) + X.order_[i]) % X.order_[i];
  X.a_ = a;
  // Reduce M to the actual order of the character.
  long long ord = 1;
  for (std::size_t i = 0; i < a.size(); ++i) ord = std::lcm(ord, X.order_[i] / std::gcd(X.order_[i], a[i] == 0 ? X.order_[i] : a[i]));
  X.M_ = int(ord);
  X.e_.assign(R.size(), -1);
  for (std::uint64_t u = 0; u < R.size(); ++u) {
    if (!R.is_unit(u)) continue;
    auto res = R.project(u);
    long long e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      long long lg = logs[i].log[res[i].index()];
      // exp(2 pi i a_i lg / o_i) = zeta_ord^{a_i lg ord / o_i}
      long long num = (a[i] * lg) % X.order_[i];
      // num / o_i = k / ord with k = num * ord / o_i (exact: o_i / gcd(o_i,a_i) divides ord)
      e += (num * ord) / X.order_[i];
    }
    X.e_[u] = int(e % ord);
  }
  return X;
}

inline std::vector<MultChar> MultChar::all(const QuotientRing& R) {
  std::vector<long long> orders;
  for (auto& comp : R.components()) orders.push_back((long long)ipow_u64(std::uint64_t(R.field().q()), comp.v.degree()) - 1);
  std::vector<MultChar> out;
  std::vector<long long> a(orders.size(), 0);
  while (true) {
    out.push_back(from_exponents(R, a));
    std::size_t i = 0;
    while (i < a.size() && ++a[i] == orders[i]) a[i++] = 0;
    if (i == a.size()) break;
  }
  return out;
}

inline MultChar MultChar::quadratic(const QuotientRing& R) {
  const Field& F = R.field();
  if (F.p() == 2) fail(Errc::EvenCharacteristic, "quadratic multiplicative character needs odd q");
  MultChar X;
  X.R_ = &R;
  X.M_ = 2;
  X.e_.assign(R.size(), -1);
  for (std::uint64_t u = 0; u < R.size(); ++u) {
    if (!R.is_unit(u)) continue;
    Poly pu = R.element(u);
    int e = 0;
    for (auto& comp : R.components())
      if (comp.e % 2 == 1 && residue_symbol_mod(pu, comp.v.poly()) == -1) e ^= 1;
    X.e_[u] = e;
  }
  return X;
}

// ------------------------------------------------------ additive character

// lambda(r) = sum over CRT components of the absolute trace of the top
// P-adic digit of r mod P^e; psi(r) = exp(2 pi i lambda(r) / p).
class AddChar {
 public:
  explicit AddChar(const QuotientRing& R) : R_(&R) {
    const Field& F = R.field();
    std::vector<std::vector<Elem>> tv;
    std::vector<Poly> Pe1;
    for (auto& comp : R.components()) {
      tv.push_back(detail::trace_vector(comp.v.poly()));
      Pe1.push_back(pow(comp.v.poly(), comp.e - 1));
    }
    lam_.assign(R.size(), 0);
    for (std::uint64_t r = 0; r < R.size(); ++r) {
      auto res = R.project(r);
      int s = 0;
      for (std::size_t i = 0; i < res.size(); ++i) {
        Poly top = res[i] / Pe1[i];
        s += F.trace_to_prime(detail::trace_with(top, tv[i]));
      }
      lam_[r] = std::uint8_t(s % F.p());
    }
    if (R.size() <= 4096) verify();
  }
  const QuotientRing& ring() const { return *R_; }
  int lambda(std::uint64_t r) const { return lam_[r]; }
  cplx operator()(std::uint64_t r) const { return detail::root_of_unity(lam_[r], R_->field().p()); }

 private:
  void verify() const {
    for (std::uint64_t h = 1; h < R_->size(); ++h) {
      bool nontrivial = false;
      for (std::uint64_t g = 0; g < R_->size() && !nontrivial; ++g) nontrivial = lam_[R_->mul(g, h)] != 0;
      if (!nontrivial) fail(Errc::NotPrimitive, "additive character trivial on a principal ideal");
    }
  }
  const QuotientRing* R_;
  std::vector<std::uint8_t> lam_;
};

// --------------------------------------------------- exact cyclotomic sums

namespace detail {

inline std::vector<long long> poly_div_exact(std::vector<long long> a, const std::vector<long long>& b) {
  // a / b over Z with b monic; a divisible by b.
  int da = int(a.size()) - 1, db = int(b.size()) - 1;
  std::vector<long long> q(std::size_t(std::max(0, da - db + 1)), 0);
  for (int k = da; k >= db; --k) {
    long long c = a[std::size_t(k)];
    q[std::size_t(k - db)] = c;
    for (int i = 0; i <= db; ++i) a[std::size_t(k - db + i)] -= c * b[std::size_t(i)];
  }
  return q;
}

inline std::vector<long long> cyclotomic(int M) {
  std::vector<long long> num(std::size_t(M + 1), 0);
  num[0] = -1;
  num[std::size_t(M)] = 1;
  for (int d = 1; d < M; ++d)
    if (M % d == 0) num = poly_div_exact(num, cyclotomic(d));
  return num;
}

}  // namespace detail

// sum_k n_k zeta_M^k held exactly; zero test by reduction mod Phi_M.
struct CyclotomicSum {
  int M = 1;
  std::vector<long long> n;
  explicit CyclotomicSum(int m = 1) : M(m), n(std::size_t(m), 0) {}
  void add(int k, long long c = 1) { n[std::size_t(((k % M) + M) % M)] += c; }
  bool is_zero() const {
    std::vector<long long> r = n;
    std::vector<long long> phi = detail::cyclotomic(M);
    int dp = int(phi.size()) - 1;
    for (int k = int(r.size()) - 1; k >= dp; --k) {
      long long c = r[std::size_t(k)];
      if (c == 0) continue;
      for (int i = 0; i <= dp; ++i) r[std::size_t(k - dp + i)] -= c * phi[std::size_t(i)];
    }
    for (int k = 0; k < std::min(dp, int(r.size())); ++k)
      if (r[std::size_t(k)] != 0) return false;
    return true;
  }
  cplx value() const {
    if (is_zero()) return {0.0, 0.0};
    cplx s = 0;
    for (int k = 0; k < M; ++k)
      if (n[std::size_t(k)] != 0) s += double(n[std::size_t(k)]) * detail::root_of_unity(k, M);
    return s;
  }
};

// -------------------------------------------------------------- sums

inline cplx gauss_sum(const MultChar& Phi, const AddChar& psi) {
  if (&Phi.ring() != &psi.ring()) fail(Errc::RingMismatch, "characters live on different rings");
  cplx s = 0;
  for (std::uint64_t r = 0; r < Phi.ring().size(); ++r)
    if (Phi.exponent(r) >= 0) s += Phi(r) * psi(r);
  return s;
}

// sum_r conj(Phi(r)) psi(r r0), which equals Phi(r0) tau(conj Phi) for primitive Phi.
inline cplx twisted_gauss_sum(const MultChar& Phi, const AddChar& psi, std::uint64_t r0) {
  if (&Phi.ring() != &psi.ring()) fail(Errc::RingMismatch, "characters live on different rings");
  if (!Phi.primitive()) fail(Errc::NotPrimitive, "character is not primitive");
  const QuotientRing& R = Phi.ring();
  cplx s = 0;
  for (std::uint64_t r = 0; r < R.size(); ++r)
    if (Phi.exponent(r) >= 0) s += std::conj(Phi(r)) * psi(R.mul(r, r0));
  return s;
}

namespace detail {

// Row-reduce vectors over F_q in place; returns the rank.
inline int rref(const Field& F, std::vector<std::vector<Elem>>& rows) {
  int rank = 0;
  std::size_t ncols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t col = 0; col < ncols && rank < int(rows.size()); ++col) {
    int piv = -1;
    for (int i = rank; i < int(rows.size()); ++i)
      if (rows[std::size_t(i)][col] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[std::size_t(rank)], rows[std::size_t(piv)]);
    auto& pr = rows[std::size_t(rank)];
    Elem inv = F.inv(pr[col]);
    for (auto& x : pr) x = F.mul(x, inv);
    for (int i = 0; i < int(rows.size()); ++i) {
      if (i == rank || rows[std::size_t(i)][col] == 0) continue;
      Elem f = rows[std::size_t(i)][col];
      for (std::size_t j = 0; j < ncols; ++j) rows[std::size_t(i)][j] = F.sub(rows[std::size_t(i)][j], F.mul(f, pr[j]));
    }
    ++rank;
  }
  rows.resize(std::size_t(rank));
  return rank;
}

// Same over F_p with int vectors.
inline int rref_p(int p, std::vector<std::vector<int>>& rows) {
  auto inv = [p](int a) {
    for (int b = 1; b < p; ++b)
      if (a * b % p == 1) return b;
    return 0;
  };
  int rank = 0;
  std::size_t ncols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t col = 0; col < ncols && rank < int(rows.size()); ++col) {
    int piv = -1;
    for (int i = rank; i < int(rows.size()); ++i)
      if (rows[std::size_t(i)][col] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[std::size_t(rank)], rows[std::size_t(piv)]);
    auto& pr = rows[std::size_t(rank)];
    int iv = inv(pr[col]);
    for (auto& x : pr) x = x * iv % p;
    for (int i = 0; i < int(rows.size()); ++i) {
      if (i == rank || rows[std::size_t(i)][col] == 0) continue;
      int f = rows[std::size_t(i)][col];
      for (std::size_t j = 0; j < ncols; ++j) rows[std::size_t(i)][j] = ((rows[std::size_t(i)][j] - f * pr[j]) % p + p) % p;
    }
    ++rank;
  }
  rows.resize(std::size_t(rank));
  return rank;
}

}  // namespace detail

// theta_c restricted to L(a), with supports disjoint.
inline std::uint64_t theta_c(const QuotientRing& R, const Divisor& a, const RationalFunction& alpha) {
  if (!a.disjoint(R.modulus())) fail(Errc::OverlappingSupport, a.to_string() + " meets supp " + R.modulus().to_string());
  return R.theta(alpha);
}

// The image theta_c(L(a)) as a sorted list of ring elements.
inline std::vector<std::uint64_t> theta_image(const QuotientRing& R, const Divisor& a) {
  if (!a.disjoint(R.modulus())) fail(Errc::OverlappingSupport, a.to_string() + " meets supp " + R.modulus().to_string());
  const Field& F = R.field();
  RRSpace L(F, a);
  std::vector<std::vector<Elem>> rows;
  for (auto& b : L.basis()) {
    Poly img = R.element(R.theta(b));
    std::vector<Elem> v(std::size_t(R.degree()), 0);
    for (int i = 0; i <= img.degree(); ++i) v[std::size_t(i)] = img.coeff(i);
    rows.push_back(v);
  }
  int rank = rows.empty() ? 0 : detail::rref(F, rows);
  std::vector<std::uint64_t> out;
  std::uint64_t combos = ipow_u64(std::uint64_t(F.q()), rank);
  for (std::uint64_t c = 0; c < combos; ++c) {
    std::vector<Elem> v(std::size_t(R.degree()), 0);
    std::uint64_t t = c;
    for (int i = 0; i < rank; ++i) {
      Elem k = Elem(t % std::uint64_t(F.q()));
      t /= std::uint64_t(F.q());
      if (k == 0) continue;
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = F.add(v[j], F.mul(k, rows[std::size_t(i)][j]));
    }
    out.push_back(Poly(F, v).index());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct IncompleteSum {
  cplx value;
  bool exact_zero = false;
  std::uint64_t image_size = 0;
};

// sum of Phi over theta_c(L(n v0 - d)).
inline IncompleteSum incomplete_sum(const MultChar& Phi, int n, const Place& v0, const Divisor& d) {
  const QuotientRing& R = Phi.ring();
  require_effective(d, "incomplete_sum");
  if (R.modulus().contains(v0) || d.contains(v0)) fail(Errc::PlaceInSupport, v0.to_string() + " lies in supp c or supp d");
  if (!d.disjoint(R.modulus())) fail(Errc::OverlappingSupport, d.to_string() + " meets " + R.modulus().to_string());
  if (Phi.principal()) fail(Errc::PrincipalCharacter, "incomplete sums need a non-principal character");
  if (n < 0) fail(Errc::BadConfig, "n must be >= 0");
  auto img = theta_image(R, n * Divisor::of(v0) - d);
  CyclotomicSum cs(Phi.order_modulus());
  for (auto r : img)
    if (Phi.exponent(r) >= 0) cs.add(Phi.exponent(r));
  IncompleteSum out;
  out.exact_zero = cs.is_zero();
  out.value = cs.value();
  out.image_size = img.size();
  return out;
}

// Visit every F_p-subspace of F_p^N by reduced row echelon form; the callback
// receives a basis.
template <class Fn>
void for_each_subspace(int p, int N, Fn&& fn) {
  for (int k = 0; k <= N; ++k) {
    std::vector<int> piv(static_cast<std::size_t>(k));
    std::function<void(int, int)> choose = [&](int i, int start) {
      if (i == k) {
        std::vector<std::pair<int, int>> free;
        for (int r = 0; r < k; ++r)
          for (int c = piv[std::size_t(r)] + 1; c < N; ++c)
            if (std::find(piv.begin(), piv.end(), c) == piv.end()) free.emplace_back(r, c);
        std::uint64_t combos = ipow_u64(std::uint64_t(p), int(free.size()));
        for (std::uint64_t x = 0; x < combos; ++x) {
          std::vector<std::vector<int>> basis(std::size_t(k), std::vector<int>(std::size_t(N), 0));
          for (int r = 0; r < k; ++r) basis[std::size_t(r)][std::size_t(piv[std::size_t(r)])] = 1;
          std::uint64_t t = x;
          for (auto [r, c] : free) {
            basis[std::size_t(r)][std::size_t(c)] = int(t % std::uint64_t(p));
            t /= std::uint64_t(p);
          }
          fn(static_cast<const std::vector<std::vector<int>>&>(basis));
        }
        return;
      }
      for (int c = start; c < N; ++c) {
        piv[std::size_t(i)] = c;
        choose(i + 1, c + 1);
      }
    };
    choose(0, 0);
  }
}

// All elements of the F_p-span of `basis` (digit vectors).
inline std::vector<std::uint64_t> span_elements(const QuotientRing& R, const std::vector<std::vector<int>>& basis) {
  std::vector<std::uint64_t> out{0};
  int p = R.field().p();
  for (auto& b : basis) {
    std::uint64_t bid = R.from_digits(b);
    std::vector<std::uint64_t> next;
    next.reserve(out.size() * std::size_t(p));
    for (auto h : out)
      for (int k = 0; k < p; ++k) next.push_back(R.add(h, R.scale_p(bid, k)));
    out = std::move(next);
  }
  return out;
}

// #{u in R^x : u H subset ker psi} for the F_p-subspace with the given basis.
inline long long annihilating_units(const AddChar& psi, const std::vector<std::vector<int>>& basis) {
  const QuotientRing& R = psi.ring();
  std::vector<std::uint64_t> bids;
  for (auto& b : basis) bids.push_back(R.from_digits(b));
  long long n = 0;
  for (std::uint64_t u = 0; u < R.size(); ++u) {
    if (!R.is_unit(u)) continue;
    bool ok = true;
    for (auto b : bids)
      if (psi.lambda(R.mul(u, b)) != 0) {
        ok = false;
        break;
      }
    if (ok) ++n;
  }
  return n;
}

// For a subgroup H: (|sum_H Phi|, #{u : uH in ker psi} #H / sqrt #R).
inline std::pair<double, double> subgroup_sum_sides(const MultChar& Phi, const AddChar& psi, const std::vector<std::vector<int>>& basis) {
  const QuotientRing& R = Phi.ring();
  auto H = span_elements(R, basis);
  CyclotomicSum cs(Phi.order_modulus());
  for (auto h : H)
    if (Phi.exponent(h) >= 0) cs.add(Phi.exponent(h));
  double lhs = std::abs(cs.value());
  double rhs = double(annihilating_units(psi, basis)) * double(H.size()) / std::sqrt(double(R.size()));
  return {lhs, rhs};
}

// #{u in R^x : u theta_c(L(n v0 - d)) subset G} for a proper F_p-subspace G.
inline long long subgroup_multiplier_count(const QuotientRing& R, const std::vector<std::vector<int>>& G, int n, const Place& v0,
                                           const Divisor& d) {
  int p = R.field().p();
  std::vector<std::vector<int>> g = G;
  for (auto& row : g)
    if (int(row.size()) != R.pdim()) fail(Errc::NotASubgroup, "basis vector has wrong length");
  int rank = g.empty() ? 0 : detail::rref_p(p, g);
  if (rank != int(G.size())) fail(Errc::NotASubgroup, "basis is linearly dependent");
  if (rank >= R.pdim()) fail(Errc::NotASubgroup, "G is the whole ring");
  if (R.modulus().contains(v0) || d.contains(v0)) fail(Errc::PlaceInSupport, v0.to_string() + " lies in supp c or supp d");
  auto in_G = [&](std::uint64_t x) {
    std::vector<int> v = R.digits(x);
    for (auto& row : g) {
      std::size_t c = 0;
      while (row[c] == 0) ++c;
      int f = v[c];
      if (f == 0) continue;
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = ((v[j] - f * row[j]) % p + p) % p;
    }
    for (int x2 : v)
      if (x2 != 0) return false;
    return true;
  };
  // F_p-spanning set of H: F_q basis of the image times F_p-basis y^i of F_q.
  auto img = theta_image(R, n * Divisor::of(v0) - d);
  std::vector<std::vector<int>> hrows;
  for (auto x : img) hrows.push_back(R.digits(x));
  if (!hrows.empty()) detail::rref_p(p, hrows);
  std::vector<std::uint64_t> hb;
  for (auto& row : hrows) hb.push_back(R.from_digits(row));
  long long count = 0;
  for (std::uint64_t u = 0; u < R.size(); ++u) {
    if (!R.is_unit(u)) continue;
    bool ok = true;
    for (auto b : hb)
      if (!in_G(R.mul(u, b))) {
        ok = false;
        break;
      }
    if (ok) ++count;
  }
  return count;
}

// --------------------------------------------------- kernel divisor, q even

struct KernelDivisor {
  std::vector<std::pair<Place, int>> n_v;  // places of degree <= max(1, deg c1)
  bool has_c_chi = false;
  Divisor c_chi;
};

// max{n : L(n v) in ker chi_c} for v outside supp c (-1 when even L(0) fails).
inline int kernel_order(const ChiModulus& chi, const Place& v) {
  const Field& F = v.field();
  int n = -1;
  int bound = int(squarefree_split(chi.modulus()).first.degree()) + 2;
  for (int k = 0; k <= bound; ++k) {
    RRSpace L(F, k * Divisor::of(v));
    bool inside = true;
    for (auto& b : L.basis()) {
      for (int i = 0; i < F.r() && inside; ++i) {
        Elem y = Elem(ipow_u64(2, i));
        if (chi(b * RationalFunction::constant(F, y)) != 1) inside = false;
      }
      if (!inside) break;
    }
    if (!inside) break;
    n = k;
  }
  return n;
}

inline KernelDivisor kernel_divisor_even(const BaseField& K, const Divisor& c) {
  const Field& F = K.field();
  if (F.p() != 2) fail(Errc::OddCharacteristic, "kernel divisor needs even q");
  require_effective(c, "kernel_divisor_even");
  if (c.is_even()) fail(Errc::PrincipalCharacter, c.to_string() + " lies in 2Div(K): chi_c is trivial");
  ChiModulus chi(F, c);
  KernelDivisor out;
  int top = std::max<int>(1, int(squarefree_split(c).first.degree()));
  std::vector<Divisor::Term> terms;
  for (auto& v : places_up_to(F, top)) {
    int n = c.contains(v) ? 0 : kernel_order(chi, v);
    out.n_v.emplace_back(v, n);
    if (n > 0) terms.emplace_back(v, n);
  }
  if (c.degree() % 2 == 0) {
    out.has_c_chi = true;
    out.c_chi = Divisor::from_terms(terms);
  }
  return out;
}

}  // namespace qff
