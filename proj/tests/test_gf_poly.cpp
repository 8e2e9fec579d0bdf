#include <gtest/gtest.h>

#include "qff/poly.hpp"

using namespace qff;

namespace {
std::uint64_t ipow_u64(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}
}  // namespace

TEST(Field, CreateAndCanonicalModulus) {
  const Field& F3 = field_create(3, 1);
  EXPECT_EQ(F3.q(), 3);
  const Field& F4 = field_create(2, 2);
  EXPECT_EQ(F4.q(), 4);
  EXPECT_EQ(F4.modulus(), (std::vector<int>{1, 1, 1}));  // y^2+y+1
  EXPECT_EQ(&field_create(2, 2), &F4);
}

TEST(Field, Errors) {
  try {
    field_create(4, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonPrime);
  }
  try {
    field_create(2, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SizeExceeded);
  }
}

TEST(Field, InverseLaw) {
  for (auto [p, r] : std::vector<std::pair<int, int>>{{2, 1}, {2, 3}, {3, 2}, {5, 1}, {7, 1}, {2, 4}}) {
    const Field& F = field_create(p, r);
    for (Elem a = 1; a < F.q(); ++a) {
      EXPECT_EQ(F.mul(a, F.pow(a, std::uint64_t(F.q() - 2))), 1);
      EXPECT_EQ(F.mul(a, F.inv(a)), 1);
    }
  }
}

TEST(Field, ResidueSymbol) {
  const Field& F3 = field_create(3, 1);
  EXPECT_EQ(residue_symbol(F3, 0), 0);
  EXPECT_EQ(residue_symbol(F3, 1), 1);
  EXPECT_EQ(residue_symbol(F3, 2), -1);
  try {
    residue_symbol(field_create(2, 1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EvenCharacteristic);
  }
  // multiplicative, exhaustively for q <= 81
  for (auto [p, r] : std::vector<std::pair<int, int>>{{3, 1}, {3, 2}, {3, 3}, {3, 4}, {5, 1}, {5, 2}, {7, 1}}) {
    const Field& F = field_create(p, r);
    for (Elem a = 1; a < F.q(); ++a)
      for (Elem b = 1; b < F.q(); ++b) EXPECT_EQ(residue_symbol(F, F.mul(a, b)), residue_symbol(F, a) * residue_symbol(F, b));
  }
}

TEST(Field, ArtinSchreierSymbol) {
  const Field& F2 = field_create(2, 1);
  EXPECT_EQ(artin_schreier_symbol(F2, 0), 1);
  EXPECT_EQ(artin_schreier_symbol(F2, 1), -1);
  const Field& F4 = field_create(2, 2);
  EXPECT_EQ(artin_schreier_symbol(F4, 2), -1);  // the generator y
  try {
    artin_schreier_symbol(field_create(3, 1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OddCharacteristic);
  }
  for (int r = 1; r <= 6; ++r) {
    const Field& F = field_create(2, r);
    for (Elem a = 0; a < F.q(); ++a)
      for (Elem b = 0; b < F.q(); ++b)
        EXPECT_EQ(artin_schreier_symbol(F, F.add(a, b)), artin_schreier_symbol(F, a) * artin_schreier_symbol(F, b));
  }
}

TEST(Field, SquaresAgreeWithBruteForce) {
  for (auto [p, r] : std::vector<std::pair<int, int>>{{3, 2}, {5, 1}, {7, 1}}) {
    const Field& F = field_create(p, r);
    std::vector<bool> sq(std::size_t(F.q()), false);
    for (Elem a = 0; a < F.q(); ++a) sq[F.mul(a, a)] = true;
    for (Elem a = 0; a < F.q(); ++a) {
      EXPECT_EQ(F.is_square(a), sq[a]);
      if (sq[a]) {
        EXPECT_EQ(F.mul(F.sqrt(a), F.sqrt(a)), a);
      }
    }
  }
}

TEST(Poly, FactorExamples) {
  const Field& F3 = field_create(3, 1);
  auto f = factor(parse_poly(F3, "x^2-1"));
  ASSERT_EQ(f.factors.size(), 2u);
  EXPECT_EQ(f.factors[0].first.to_string(), "x+1");
  EXPECT_EQ(f.factors[1].first.to_string(), "x+2");
  const Field& F2 = field_create(2, 1);
  auto g = factor(parse_poly(F2, "x"));
  ASSERT_EQ(g.factors.size(), 1u);
  EXPECT_EQ(g.factors[0].second, 1);
  auto h = factor(parse_poly(F2, "x^2+x+1"));
  ASSERT_EQ(h.factors.size(), 1u);
  EXPECT_EQ(h.factors[0].first.to_string(), "x^2+x+1");
  try {
    factor(Poly(F2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroPolynomial);
  }
}

TEST(Poly, FactorMultipliesBack) {
  for (auto [p, r] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {3, 1}, {5, 1}}) {
    const Field& F = field_create(p, r);
    for (int d = 1; d <= 6; ++d) {
      std::uint64_t n = std::min<std::uint64_t>(ipow_u64(std::uint64_t(F.q()), d), 400);
      for (std::uint64_t i = 0; i < n; ++i) {
        Poly f = Poly::monic_from_index(F, d, i).scaled(Elem(1 + i % std::uint64_t(F.q() - 1)));
        auto fac = factor(f);
        Poly prod = Poly::constant(F, fac.unit);
        for (auto& [P, e] : fac.factors) {
          EXPECT_TRUE(P.is_monic());
          EXPECT_TRUE(is_irreducible(P));
          prod *= pow(P, e);
        }
        EXPECT_EQ(prod, f);
      }
    }
  }
}

TEST(Poly, NecklaceIdentity) {
  for (int q : {2, 3, 4, 5, 7, 8, 9, 11, 13, 16}) {
    const Field& F = field_of_order(q);
    for (int d = 1; d <= 4; ++d) {
      long long total = 0;
      for (int e = 1; e <= d; ++e)
        if (d % e == 0) total += e * (long long)monic_irreducibles(F, e).size();
      EXPECT_EQ(total, (long long)ipow_u64(std::uint64_t(q), d)) << "q=" << q << " d=" << d;
    }
  }
}

TEST(Poly, DegreeOfProduct) {
  const Field& F = field_create(3, 1);
  for (std::uint64_t i = 1; i < 200; ++i)
    for (std::uint64_t j = 1; j < 50; ++j) {
      Poly a = Poly::from_index(F, i), b = Poly::from_index(F, j);
      EXPECT_EQ((a * b).degree(), a.degree() + b.degree());
    }
}

TEST(Poly, DivModAndGcd) {
  const Field& F = field_create(5, 1);
  for (std::uint64_t i = 1; i < 300; i += 7)
    for (std::uint64_t j = 1; j < 300; j += 11) {
      Poly a = Poly::from_index(F, i), b = Poly::from_index(F, j);
      auto [qq, rr] = divmod(a, b);
      EXPECT_EQ(qq * b + rr, a);
      EXPECT_LT(rr.degree(), b.degree());
      Poly s(F), t(F);
      Poly g = xgcd(a, b, s, t);
      EXPECT_EQ(s * a + t * b, g);
      EXPECT_TRUE((a % g).is_zero());
    }
}

TEST(Poly, ParseRoundTrip) {
  const Field& F = field_create(3, 1);
  for (std::uint64_t i = 0; i < 500; ++i) {
    Poly f = Poly::from_index(F, i);
    EXPECT_EQ(parse_poly(F, f.to_string()), f);
  }
  EXPECT_EQ(parse_poly(F, "x^3-x"), parse_poly(F, "x^3+2*x"));
  EXPECT_EQ(parse_poly(F, "-x"), parse_poly(F, "2*x"));
}

TEST(Poly, JacobiSymbolMatchesEulerCriterion) {
  const Field& F = field_create(3, 1);
  for (int d = 1; d <= 3; ++d)
    for (auto& P : monic_irreducibles(F, d))
      for (std::uint64_t i = 0; i < ipow_u64(3, d); ++i) {
        Poly a = Poly::from_index(F, i);
        std::uint64_t e = (ipow_u64(3, d) - 1) / 2;
        Poly r = powmod(a % P, e, P);
        int expect = a.is_zero() || (a % P).is_zero() ? 0 : (r.is_one() ? 1 : -1);
        EXPECT_EQ(jacobi_symbol(a, P), expect);
      }
}
