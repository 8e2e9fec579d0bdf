#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "qff/lfunc.hpp"
#include "qff/quad_ext.hpp"

using namespace qff;

namespace {
const Field& F2() { return field_create(2, 1); }
const Field& F3() { return field_create(3, 1); }
RationalFunction R(const Field& F, const char* s) { return parse_rational(F, s); }
Divisor D(const Field& F, const char* s) { return parse_divisor(F, s); }

template <class Fn>
Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::BadConfig;  // sentinel: nothing thrown
}
}  // namespace

TEST(Kummer, DiscriminantExamples) {
  auto [d1, g1] = kummer_discriminant(R(F3(), "x^3-x"));
  EXPECT_EQ(d1, D(F3(), "[(inf,1),(x,1),(x+1,1),(x+2,1)]"));
  EXPECT_EQ(g1, 1);
  auto [d2, g2] = kummer_discriminant(R(F3(), "x^2-1"));
  EXPECT_EQ(d2, D(F3(), "[(x+1,1),(x+2,1)]"));
  EXPECT_EQ(g2, 0);
  EXPECT_EQ(error_of([] { kummer_discriminant(R(F3(), "2")); }), Errc::ConstantFieldExtension);
  EXPECT_EQ(error_of([] { kummer_discriminant(R(F3(), "x^2+2*x+1")); }), Errc::IsSquareClass);
}

TEST(ArtinSchreier, DifferentExamples) {
  auto a = artin_schreier_different(R(F2(), "1/x"));
  EXPECT_EQ(a.disc, D(F2(), "[(x,2)]"));
  EXPECT_EQ(a.key, D(F2(), "[(x,1)]"));
  EXPECT_EQ(a.genus, 0);
  auto b = artin_schreier_different(R(F2(), "x^3"));
  EXPECT_EQ(b.disc, D(F2(), "[(inf,4)]"));
  EXPECT_EQ(b.key, D(F2(), "[(inf,2)]"));
  EXPECT_EQ(b.genus, 1);
  EXPECT_EQ(error_of([] { artin_schreier_different(R(F2(), "x^2+x")); }), Errc::NotAGenerator);
  EXPECT_EQ(error_of([] { artin_schreier_different(R(F2(), "1")); }), Errc::ConstantFieldExtension);
}

// y^2 + y = x^3 has genus 1: check through the point-count L-polynomial.
TEST(ArtinSchreier, GenusByPointCount) {
  QuadExt E = make_extension(R(F2(), "x^3"));
  EXPECT_EQ(E.genus, 1);
  auto c = oracle::lpoly_by_point_count(E);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c[2], 2);  // functional equation: c_2 = q c_0
}

TEST(Family, OddCounts) {
  for (auto [q, m, expect] : std::vector<std::tuple<int, int, long long>>{{3, 1, 144}, {3, 2, 1296}, {5, 1, 1200}}) {
    BaseField K(field_of_order(q));
    EXPECT_EQ((long long)enumerate_family(K, m).size(), expect);
    EXPECT_EQ(expect, 2 * (checked_pow(q, 2 * m + 2) - checked_pow(q, 2 * m)));
  }
}

TEST(Family, EvenCountsMatchTotientSum) {
  BaseField K(F2());
  for (int m = 1; m <= 3; ++m) {
    long long expect = 0;
    for (auto& d : enumerate_effective(K, m + 1)) expect += 2 * phi(d, 2);
    EXPECT_EQ((long long)enumerate_family(K, m).size(), expect);
  }
  // m=1: seven divisors of degree 2
  EXPECT_EQ(enumerate_effective(K, 2).size(), 7u);
}

TEST(Family, GenusZeroSupported) {
  BaseField K(F3());
  auto fam = enumerate_family(K, 0);
  EXPECT_FALSE(fam.empty());
  for (auto& E : fam) EXPECT_EQ(E.genus, 0);
}

TEST(Family, MembersDistinctAndGenusConsistent) {
  for (int q : {2, 3}) {
    BaseField K(field_of_order(q));
    for (int m = 1; m <= 2; ++m) {
      auto fam = enumerate_family(K, m);
      std::set<std::string> seen;
      for (auto& E : fam) {
        EXPECT_TRUE(seen.insert(E.omega.to_string()).second);
        EXPECT_EQ(2 * (E.genus - 1), -4 + int(E.disc.degree()));
        EXPECT_EQ(E.genus, m);
        if (q == 3) {
          EXPECT_TRUE(E.disc.is_squarefree());
          EXPECT_EQ(kummer_discriminant(E.omega).first, E.disc);
        } else {
          EXPECT_TRUE(E.disc.is_even());
          EXPECT_EQ(artin_schreier_different(E.omega).disc, E.disc);
        }
        // round trip of the emitted strings
        EXPECT_EQ(make_extension(parse_rational(K.field(), E.omega.to_string())), E);
        EXPECT_EQ(parse_divisor(K.field(), E.disc.to_string()), E.disc);
      }
      // pairwise non-isomorphic (sampled for the larger families)
      std::size_t step = fam.size() > 200 ? fam.size() / 60 : 1;
      for (std::size_t i = 0; i < fam.size(); i += step)
        for (std::size_t j = i + 1; j < fam.size(); j += step) EXPECT_FALSE(same_extension(fam[i].omega, fam[j].omega));
    }
  }
}

TEST(Family, GenusMatchesPointCountDegree) {
  for (int q : {2, 3}) {
    BaseField K(field_of_order(q));
    for (int m = 1; m <= 2; ++m) {
      auto fam = enumerate_family(K, m);
      std::size_t step = std::max<std::size_t>(1, fam.size() / 25);
      for (std::size_t i = 0; i < fam.size(); i += step) {
        auto c = oracle::lpoly_by_point_count(fam[i]);
        // degree 2g with leading coefficient q^g
        EXPECT_EQ(c.back(), checked_pow(q, m)) << fam[i].omega.to_string();
      }
    }
  }
}

TEST(Discriminant, CountExamples) {
  BaseField K3(F3()), K2(F2());
  EXPECT_EQ(count_by_discriminant(K3, D(F3(), "[(x,1),(x+1,1)]")), 2);
  EXPECT_EQ(count_by_discriminant(K2, D(F2(), "[(x,1)]")), 2);
  EXPECT_EQ(count_by_discriminant(K2, D(F2(), "[(x,2)]")), 4);
  EXPECT_EQ(oracle::brute_class_count(K3, D(F3(), "[(x,1),(x+1,1)]")), 2);
  EXPECT_EQ(oracle::brute_class_count(K2, D(F2(), "[(x,2)]")), 4);
  EXPECT_EQ(error_of([&] { count_by_discriminant(K3, D(F3(), "[(x,1)]")); }), Errc::InvalidDiscriminantShape);
  EXPECT_EQ(error_of([&] { count_by_discriminant(K3, D(F3(), "[(x,2)]")); }), Errc::InvalidDiscriminantShape);
  EXPECT_EQ(error_of([&] { count_by_discriminant(K2, Divisor()); }), Errc::InvalidDiscriminantShape);
}

TEST(Discriminant, ToExtension) {
  BaseField K3(F3()), K2(F2());
  EXPECT_EQ(discriminant_to_extension(K3, D(F3(), "[(x,1),(x+1,1)]")).omega, R(F3(), "x^2+x"));
  EXPECT_EQ(discriminant_to_extension(K3, D(F3(), "[(inf,1),(x,1)]")).omega, R(F3(), "x"));
  QuadExt E = discriminant_to_extension(K2, D(F2(), "[(x,1)]"));
  EXPECT_TRUE(same_extension(E.omega, R(F2(), "1/x")));
  // totality for odd q: every valid key is realized
  for (int n = 2; n <= 4; n += 2)
    for (auto& d : enumerate_effective(K3, n)) {
      if (!d.is_squarefree()) continue;
      QuadExt X = discriminant_to_extension(K3, d);
      EXPECT_EQ(X.disc, d);
    }
}

TEST(KummerNormal, Examples) {
  BaseField K3(F3());
  QuadExt E = make_extension(R(F3(), "x^3-x"));
  auto nf = kummer_normalize(K3, E, K3.infinity());
  EXPECT_EQ(nf.n, 2);
  EXPECT_EQ(nf.d, 0);
  EXPECT_EQ(nf.generators.size(), 1u);
  for (auto& w : nf.generators) {
    Divisor expect = -2 * nf.n * Divisor::of(K3.infinity()) + 2 * nf.a + E.disc;
    EXPECT_EQ(w.divisor(), expect);
  }
  BaseField K5(field_create(5, 1));
  QuadExt E5 = make_extension(R(field_create(5, 1), "x^3-x"));
  EXPECT_EQ(kummer_normalize(K5, E5, K5.infinity()).generators.size(), 2u);
  EXPECT_EQ(error_of([&] { kummer_normalize(K3, E, places_of_degree(F3(), 2)[0]); }), Errc::EvenDegreePlace);
}

TEST(KummerNormal, GeneratorCountOverFamily) {
  BaseField K(F3());
  for (auto& E : enumerate_family(K, 1)) {
    for (auto& v0 : {K.infinity(), places_of_degree(F3(), 3)[0]}) {
      auto nf = kummer_normalize(K, E, v0);
      EXPECT_EQ(nf.generators.size(), 1u) << E.omega.to_string() << " " << v0.to_string();
    }
  }
}

TEST(ArtinSchreierNormal, RemovesSpuriousPoles) {
  const Field& F = F2();
  // x^3 + 1/x plus a wp-term with an even pole at x+1
  RationalFunction base = R(F, "(x^4+1)/(x)");
  RationalFunction alpha = R(F, "1/(x+1)");
  RationalFunction w = base + alpha * alpha + alpha;
  RationalFunction n = artin_schreier_normalize(w, {Place::infinity(F)});
  EXPECT_TRUE(same_extension(n, w));
  EXPECT_GE(n.ord(parse_place(F, "x+1")), 0);
  EXPECT_EQ(n.ord(parse_place(F, "x")), -1);
  // fixed point up to wp-equivalence
  EXPECT_TRUE(same_extension(artin_schreier_normalize(base, {Place::infinity(F)}), base));
  // poles only at S outside supp d
  RationalFunction m = artin_schreier_normalize(RationalFunction(parse_poly(F, "x^4"), parse_poly(F, "x^2+1")), {Place::infinity(F)});
  Divisor dm = m.divisor();
  for (auto& [v, e] : dm.terms())
    if (e < 0) EXPECT_TRUE(v.is_infinity() || v == parse_place(F, "x+1"));
}

// omega, omega' in L'(d1 + 2 d2) generate the same field iff they differ by
// an element of wp(L(d2)).
TEST(ArtinSchreier, CosetStructure) {
  const Field& F = F2();
  BaseField K(F);
  for (int n = 1; n <= 3; ++n)
    for (auto& d : enumerate_effective(K, n)) {
      auto [d1, d2] = squarefree_split(d);
      Divisor top = d1 + 2 * d2;
      RRSpace Lp(F, top), L2(F, d2);
      std::vector<RationalFunction> gens;
      rr_enumerate(Lp, [&](std::uint64_t, const RationalFunction& w) {
        if (w.is_zero()) return;
        for (auto& [v, e] : top.terms())
          if (w.ord(v) != -e) return;
        gens.push_back(w);
      });
      std::set<std::string> wp;
      rr_enumerate(L2, [&](std::uint64_t, const RationalFunction& b) { wp.insert((b * b + b).to_string()); });
      for (auto& a : gens)
        for (auto& b : gens) EXPECT_EQ(same_extension(a, b), wp.count((a - b).to_string()) == 1) << d.to_string();
      // N(d) = 2 #L' / q^{l(d2)} and wp is two-to-one on L(d2)
      EXPECT_EQ(2 * wp.size(), L2.size());
      EXPECT_EQ((long long)(gens.size() / wp.size()), count_by_discriminant(K, d)) << d.to_string();
    }
}

// Generators of a fixed F in L(d1 + 2 d2 + 2a): q^{l(d2 + a)}/2 of them.
TEST(ArtinSchreier, GeneratorCountWithShift) {
  const Field& F = F2();
  BaseField K(F);
  for (auto& d : {D(F, "[(x,1)]"), D(F, "[(inf,2)]"), D(F, "[(x,1),(x+1,1)]")}) {
    for (auto& a : {Divisor(), D(F, "[(x^2+x+1,1)]")}) {
      if (!a.disjoint(d)) continue;
      auto [d1, d2] = squarefree_split(d);
      QuadExt E = classes_with_key(K, d)[0];
      long long n = 0;
      RRSpace L(F, d1 + 2 * d2 + 2 * a);
      rr_enumerate(L, [&](std::uint64_t, const RationalFunction& w) {
        if (!w.is_zero() && same_extension(w, E.omega)) ++n;
      });
      EXPECT_EQ(n, checked_pow(2, rr_dim(d2 + a)) / 2) << d.to_string() << " " << a.to_string();
    }
  }
}

TEST(Discriminant, TotientRecursion) {
  BaseField K(F2());
  Place v0 = places_of_degree(F2(), 3)[0];
  for (int n = 1; n <= 2; ++n)
    for (auto& d : enumerate_effective(K, n)) {
      long long lhs = (long long)classes_with_key(K, d + Divisor::of(v0)).size() - 2 * phi(d + Divisor::of(v0), 2);
      long long rhs = 2 * phi(d, 2) - (long long)classes_with_key(K, d).size();
      EXPECT_EQ(lhs, rhs);
      EXPECT_EQ(lhs, 0);
    }
}
