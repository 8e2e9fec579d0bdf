#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qff/divisor.hpp"
#include "qff/error.hpp"
#include "qff/parallel.hpp"
#include "qff/poly.hpp"
#include "qff/rr.hpp"

namespace qff {

enum class ExtKind { Kummer, ArtinSchreier };

// A separable quadratic extension F/K with q_F = q, stored through a
// canonical generator: c*f (f monic square-free, c in {1, n0}) for Kummer,
// the least element of its coset in L'(d1 + 2 d2) mod {b^2+b : b in L(d2)}
// for Artin-Schreier.
struct QuadExt {
  ExtKind kind = ExtKind::Kummer;
  RationalFunction omega;
  Divisor disc;  // Disc_K(F)
  Divisor key;   // d with Disc = d (odd q) or Disc = 2d (even q)
  int genus = 0;

  const Field& field() const { return omega.field(); }
  bool odd() const { return kind == ExtKind::Kummer; }
  friend bool operator==(const QuadExt& a, const QuadExt& b) { return a.kind == b.kind && a.omega == b.omega; }
  friend bool operator!=(const QuadExt& a, const QuadExt& b) { return !(a == b); }
};

// ---------------------------------------------------------------- Kummer

struct KummerClass {
  Elem c = 1;  // 1 or the least nonsquare
  Poly f;      // monic square-free
  std::vector<Place> places;  // finite places dividing f
  friend bool operator==(const KummerClass& a, const KummerClass& b) { return a.c == b.c && a.f == b.f; }
};

// Square class of a nonzero rational function: omega = c f beta^2.
inline KummerClass kummer_class(const RationalFunction& omega) {
  const Field& F = omega.field();
  if (F.p() == 2) fail(Errc::EvenCharacteristic, "Kummer generators need odd characteristic");
  if (omega.is_zero()) fail(Errc::IsSquareClass, "zero is not a generator");
  KummerClass k;
  k.f = Poly::one(F);
  std::vector<Place> places;
  for (const Poly* part : {&omega.num(), &omega.den()}) {
    if (part->degree() <= 0) continue;
    for (auto& [P, e] : factor(*part).factors)
      if (e % 2 == 1) {
        k.f *= P;
        places.push_back(Place::finite(P));
      }
  }
  std::sort(places.begin(), places.end());
  k.places = std::move(places);
  k.c = F.is_square(omega.num().lead()) ? Elem(1) : F.least_nonsquare();
  return k;
}

inline QuadExt kummer_from_class(const Field& F, Elem c, Poly f, const std::vector<Place>& finite_places) {
  QuadExt E;
  E.kind = ExtKind::Kummer;
  E.omega = RationalFunction(f.scaled(c));
  std::vector<Divisor::Term> t;
  for (auto& v : finite_places) t.emplace_back(v, 1);
  if (f.degree() % 2 == 1) t.emplace_back(Place::infinity(F), 1);
  E.disc = Divisor::from_terms(std::move(t));
  E.key = E.disc;
  E.genus = int(E.disc.degree() / 2) - 1;
  return E;
}

inline QuadExt make_kummer(const RationalFunction& omega) {
  KummerClass k = kummer_class(omega);
  if (k.f.degree() == 0) {
    if (k.c == 1) fail(Errc::IsSquareClass, omega.to_string() + " is a square times a square constant");
    fail(Errc::ConstantFieldExtension, omega.to_string() + " is a nonsquare constant times a square");
  }
  return kummer_from_class(omega.field(), k.c, k.f, k.places);
}

// (disc, genus) of K(sqrt(omega)).
inline std::pair<Divisor, int> kummer_discriminant(const RationalFunction& omega) {
  QuadExt E = make_kummer(omega);
  return {E.disc, E.genus};
}

// ---------------------------------------------------------- Artin-Schreier

namespace detail {

// omega + alpha^2 + alpha.
inline RationalFunction wp_shift(const RationalFunction& omega, const RationalFunction& alpha) {
  return omega + alpha * alpha + alpha;
}

}  // namespace detail

// Pole minimization: at every pole outside `keep`, cancel leading terms of
// even pole order by omega -> omega + alpha^2 + alpha with alpha = s / P^{k/2}
// (s^2 = leading coefficient in the residue field) or s x^{k/2} at infinity.
// The correction has no other poles, so places are treated independently.
inline RationalFunction as_reduce(RationalFunction omega, const std::vector<Place>& keep = {}) {
  const Field& F = omega.field();
  if (F.p() != 2) fail(Errc::OddCharacteristic, "Artin-Schreier reduction needs characteristic 2");
  if (omega.is_zero()) return omega;
  std::vector<Place> poles;
  if (omega.den().degree() > 0)
    for (auto& [P, e] : factor(omega.den()).factors) poles.push_back(Place::finite(P));
  poles.push_back(Place::infinity(F));
  for (const Place& v : poles) {
    if (std::find(keep.begin(), keep.end(), v) != keep.end()) continue;
    while (!omega.is_zero()) {
      int k = -omega.ord(v);
      if (k <= 0 || k % 2 == 1) break;
      RationalFunction alpha;
      if (v.is_infinity()) {
        Elem lc = F.div(omega.num().lead(), omega.den().lead());
        alpha = RationalFunction(Poly::monomial(F, k / 2, F.sqrt(lc)));
      } else {
        const Poly& P = v.poly();
        Poly Pk = pow(P, k);
        Poly rest = omega.den() / Pk;
        Poly lc = mulmod(omega.num() % P, inverse_mod(rest % P, P), P);
        Poly s = sqrt_mod_char2(lc, P);
        alpha = RationalFunction(s, pow(P, k / 2));
      }
      omega = detail::wp_shift(omega, alpha);
    }
  }
  return omega;
}

struct ASDifferent {
  Divisor disc;
  Divisor key;
  int genus = 0;
  RationalFunction reduced;  // every pole of odd order
};

inline ASDifferent artin_schreier_different(const RationalFunction& omega) {
  const Field& F = omega.field();
  RationalFunction w = as_reduce(omega);
  std::vector<Divisor::Term> disc, key;
  if (!w.is_zero()) {
    if (w.den().degree() > 0)
      for (auto& [P, e] : factor(w.den()).factors) {
        disc.emplace_back(Place::finite(P), e + 1);
        key.emplace_back(Place::finite(P), (e + 1) / 2);
      }
    int oi = w.num().degree() - w.den().degree();
    if (oi > 0) {
      disc.emplace_back(Place::infinity(F), oi + 1);
      key.emplace_back(Place::infinity(F), (oi + 1) / 2);
    }
  }
  if (disc.empty()) {
    Elem c = w.is_zero() ? Elem(0) : w.num().coeff(0);
    if (F.trace_to_prime(c) == 0) fail(Errc::NotAGenerator, omega.to_string() + " lies in F_q + {a^2+a}: trivial extension");
    fail(Errc::ConstantFieldExtension, omega.to_string() + " generates the constant field extension");
  }
  ASDifferent out;
  out.disc = Divisor::from_terms(std::move(disc));
  out.key = Divisor::from_terms(std::move(key));
  out.genus = int(out.key.degree()) - 1;
  out.reduced = std::move(w);
  return out;
}

// Coordinates for the generator space L'(d1 + 2 d2) of a half-discriminant d:
// elements g / (D1 D2^2) with deg g <= deg(d1 + 2 d2), coset offsets
// D1 (h^2 + h D2) for deg h <= deg d2.
struct ASCosetSpace {
  Divisor d, d1, d2, A;
  Poly D, D1, D2;
  int n = 0;             // deg A; g has degree <= n
  bool inf_in_d = false;
  std::vector<Poly> finite_places;
  std::vector<std::uint64_t> offsets;  // indices of D1 (h^2 + h D2); char 2 addition is XOR of indices

  ASCosetSpace(const Field& F, const Divisor& key) : d(key) {
    auto [a1, a2] = squarefree_split(key);
    d1 = a1;
    d2 = a2;
    A = d1 + 2 * d2;
    n = int(A.degree());
    D = A.finite_poly(F);
    D1 = d1.finite_poly(F);
    D2 = d2.finite_poly(F);
    for (auto& [v, k] : key.terms()) {
      if (v.is_infinity())
        inf_in_d = true;
      else
        finite_places.push_back(v.poly());
    }
    std::uint64_t hcount = ipow_u64(std::uint64_t(F.q()), int(d2.degree()) + 1);
    offsets.reserve(hcount);
    for (std::uint64_t hi = 0; hi < hcount; ++hi) {
      Poly h = Poly::from_index(F, hi);
      offsets.push_back((D1 * (h * h + h * D2)).index());
    }
  }
  bool in_L_prime(const Poly& g) const {
    if (g.is_zero()) return false;
    if (inf_in_d && g.degree() != n) return false;
    for (auto& P : finite_places)
      if ((g % P).is_zero()) return false;
    return true;
  }
  std::uint64_t canonical_index(std::uint64_t gi) const {
    std::uint64_t best = gi;
    for (auto o : offsets) best = std::min(best, gi ^ o);
    return best;
  }
};

inline QuadExt as_from_coordinates(const Field& F, const ASCosetSpace& S, const Poly& g) {
  QuadExt E;
  E.kind = ExtKind::ArtinSchreier;
  E.omega = RationalFunction(g, S.D);
  E.key = S.d;
  E.disc = 2 * S.d;
  E.genus = int(S.d.degree()) - 1;
  (void)F;
  return E;
}

inline QuadExt make_artin_schreier(const RationalFunction& omega) {
  const Field& F = omega.field();
  ASDifferent diff = artin_schreier_different(omega);
  ASCosetSpace S(F, diff.key);
  Poly g = (diff.reduced * RationalFunction(S.D)).num();
  if (!(diff.reduced * RationalFunction(S.D)).is_polynomial() || g.degree() > S.n)
    fail(Errc::NotAGenerator, "reduced generator escaped L(d1+2d2)");
  Poly gc = Poly::from_index(F, S.canonical_index(g.index()));
  return as_from_coordinates(F, S, gc);
}

inline QuadExt make_extension(const RationalFunction& omega) {
  return omega.field().p() == 2 ? make_artin_schreier(omega) : make_kummer(omega);
}

// True iff omega1 and omega2 generate the same extension.
inline bool same_extension(const RationalFunction& w1, const RationalFunction& w2) {
  const Field& F = w1.field();
  if (F.p() == 2) {
    try {
      artin_schreier_different(w1 - w2);
    } catch (const Error& e) {
      if (e.code() == Errc::NotAGenerator) return true;
      if (e.code() == Errc::ConstantFieldExtension) return false;
      throw;
    }
    return false;
  }
  return kummer_class(w1) == kummer_class(w2);
}

// Normal form relative to S: reduce poles at every place outside S.
inline RationalFunction artin_schreier_normalize(const RationalFunction& omega, const std::vector<Place>& S) {
  return as_reduce(omega, S);
}
inline RationalFunction artin_schreier_normalize(const QuadExt& E, const std::vector<Place>& S) {
  return artin_schreier_normalize(E.omega, S);
}

// ------------------------------------------------------------- families

inline void check_key_shape(const BaseField& K, const Divisor& d) {
  if (!d.is_effective() || d.is_zero())
    fail(Errc::InvalidDiscriminantShape, d.to_string() + " must be a nonzero effective divisor");
  if (K.odd() && (!d.is_squarefree() || d.degree() % 2 != 0))
    fail(Errc::InvalidDiscriminantShape, d.to_string() + " must be square-free of even degree in odd characteristic");
}

// All classes in S(d): two for odd q, 2 phi(d) for even q, canonical order.
inline std::vector<QuadExt> classes_with_key(const BaseField& K, const Divisor& d, std::uint64_t cap = kDefaultEnumerationCap) {
  check_key_shape(K, d);
  const Field& F = K.field();
  std::vector<QuadExt> out;
  if (K.odd()) {
    std::vector<Place> fin;
    for (auto& [v, k] : d.terms())
      if (!v.is_infinity()) fin.push_back(v);
    Poly f = d.finite_poly(F);
    out.push_back(kummer_from_class(F, 1, f, fin));
    out.push_back(kummer_from_class(F, F.least_nonsquare(), f, fin));
    return out;
  }
  ASCosetSpace S(F, d);
  std::uint64_t size = ipow_u64(std::uint64_t(F.q()), S.n + 1);
  if (size > cap) fail(Errc::CapExceeded, "generator space for " + d.to_string() + " exceeds cap");
  std::vector<bool> seen(size, false);
  for (std::uint64_t gi = 0; gi < size; ++gi) {
    if (seen[gi]) continue;
    Poly g = Poly::from_index(F, gi);
    if (!S.in_L_prime(g)) continue;
    for (auto o : S.offsets) seen[gi ^ o] = true;
    out.push_back(as_from_coordinates(F, S, g));
  }
  return out;
}

inline long long count_by_discriminant(const BaseField& K, const Divisor& d) {
  check_key_shape(K, d);
  if (K.odd()) {
    // Constructive check that both square classes have discriminant d.
    auto cls = classes_with_key(K, d);
    long long n = 0;
    for (auto& E : cls)
      if (kummer_discriminant(E.omega).first == d) ++n;
    return n;
  }
  return 2 * phi(d, K.q());
}

inline QuadExt discriminant_to_extension(const BaseField& K, const Divisor& d) {
  auto cls = classes_with_key(K, d);
  if (cls.empty()) fail(Errc::NoSuchDiscriminant, d.to_string());
  return cls.front();
}

// Number of extensions of genus m (closed forms used only for cap checks).
inline std::uint64_t family_size_estimate(const BaseField& K, int m) {
  std::uint64_t q = std::uint64_t(K.q());
  return 2 * ipow_u64(q, 2 * m + 2);
}

// Every quadratic extension of genus m with q_F = q, each once, in canonical
// order: odd q by (f, c), even q by (d, generator index).
inline std::vector<QuadExt> enumerate_family(const BaseField& K, int m, int threads = 1,
                                             std::uint64_t cap = kDefaultEnumerationCap) {
  if (m < 0) fail(Errc::BadConfig, "genus must be >= 0");
  if (family_size_estimate(K, m) > cap) fail(Errc::CapExceeded, "family of genus " + std::to_string(m) + " exceeds cap");
  const Field& F = K.field();
  std::vector<QuadExt> out;
  if (K.odd()) {
    Elem n0 = F.least_nonsquare();
    for (int deg : {2 * m + 1, 2 * m + 2}) {
      std::vector<Place> finite;
      for (int e = 1; e <= deg; ++e)
        for (auto& v : places_of_degree(F, e))
          if (!v.is_infinity()) finite.push_back(v);
      std::vector<std::vector<int>> sets;
      for_each_squarefree_indexed(finite, deg, [&](const std::vector<int>& s) { sets.push_back(s); });
      auto built = parallel_map(sets.size(), threads, [&](std::size_t i) {
        Poly f = Poly::one(F);
        std::vector<Place> pl;
        for (int j : sets[i]) {
          f *= finite[std::size_t(j)].poly();
          pl.push_back(finite[std::size_t(j)]);
        }
        return std::make_pair(kummer_from_class(F, 1, f, pl), kummer_from_class(F, n0, f, pl));
      });
      std::sort(built.begin(), built.end(), [](const auto& a, const auto& b) { return a.first.omega.num() < b.first.omega.num(); });
      for (auto& [a, b] : built) {
        out.push_back(std::move(a));
        out.push_back(std::move(b));
      }
    }
    return out;
  }
  std::vector<Divisor> keys = enumerate_effective(K, m + 1);
  auto per_key = parallel_map(keys.size(), threads, [&](std::size_t i) { return classes_with_key(K, keys[i], cap); });
  for (auto& v : per_key)
    for (auto& E : v) out.push_back(std::move(E));
  return out;
}

// Normal form for odd q: with 2 n deg v0 = deg disc + 2 d,
// 0 <= d < deg v0, the generators of F in L(2 n v0 - 2 a), a = d w for the
// least degree-1 place w != v0.
struct KummerNormalForm {
  int n = 0, d = 0, class_index = 0;
  Divisor a;
  std::vector<RationalFunction> generators;
};

inline KummerNormalForm kummer_normalize(const BaseField& K, const QuadExt& E, const Place& v0) {
  if (!K.odd()) fail(Errc::EvenCharacteristic, "Kummer normal form needs odd characteristic");
  if (v0.degree() % 2 == 0) fail(Errc::EvenDegreePlace, v0.to_string() + " has even degree");
  KummerNormalForm out;
  int half = int(E.disc.degree() / 2);
  int dv = v0.degree();
  out.n = (half + dv - 1) / dv;
  out.d = out.n * dv - half;
  Place w = places_of_degree(K, 1)[0] == v0 ? places_of_degree(K, 1)[1] : places_of_degree(K, 1)[0];
  out.a = Divisor::of(w, out.d);
  RRSpace L(K.field(), 2 * out.n * Divisor::of(v0) - 2 * out.a);
  KummerClass target = kummer_class(E.omega);
  rr_enumerate(L, [&](std::uint64_t, const RationalFunction& w2) {
    if (w2.is_zero()) return;
    if (kummer_class(w2) == target) out.generators.push_back(w2);
  });
  return out;
}

}  // namespace qff
