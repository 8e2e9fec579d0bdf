#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qff/lfunc.hpp"

using namespace qff;

namespace {
const Field& F2() { return field_create(2, 1); }
const Field& F3() { return field_create(3, 1); }
QuadExt ext(const Field& F, const char* w) { return make_extension(parse_rational(F, w)); }
}  // namespace

TEST(Zeta, Examples) {
  BaseField K3(F3()), K2(F2());
  EXPECT_NEAR(std::abs(zeta_rational(K3, 2.0) - 27.0 / 16.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(zeta_rational(K2, 2.0) - 8.0 / 3.0), 0.0, 1e-12);
  EXPECT_THROW(zeta_rational(K3, 1.0), Error);
  EXPECT_THROW(zeta_rational(K2, 0.0), Error);
}

TEST(LStar, EllipticExamples) {
  // y^2 = x^3 - x over F_3 and y^2 + y = x^3 over F_2 are supersingular
  auto L3 = lstar_coefficients(ext(F3(), "x^3+2*x"));
  EXPECT_EQ(L3.genus, 1);
  EXPECT_EQ(L3.coeffs, (std::vector<long long>{1, 0, 3}));
  auto L2 = lstar_coefficients(ext(F2(), "x^3"));
  EXPECT_EQ(L2.coeffs, (std::vector<long long>{1, 0, 2}));
  EXPECT_NEAR(std::abs(lfunc_eval(L3, 1.0) - 4.0 / 3.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(lfunc_eval(L2, 1.0) - 1.5), 0.0, 1e-12);
}

TEST(LStar, GenusZeroIsOne) {
  auto L = lstar_coefficients(ext(F3(), "x"));
  EXPECT_EQ(L.genus, 0);
  EXPECT_EQ(L.coeffs, (std::vector<long long>{1}));
}

TEST(LStar, CapExceeded) {
  try {
    lstar_coefficients(ext(F3(), "x^3+2*x"), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CapExceeded);
  }
}

TEST(LStar, AgreesWithPointCounts) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    for (int m = 1; m <= 2; ++m) {
      auto fam = enumerate_family(K, m);
      for (auto i : oracle::sample_indices(fam.size(), 40, 5u + unsigned(m)))
        EXPECT_EQ(lstar_coefficients(fam[i]).coeffs, oracle::lpoly_by_point_count(fam[i])) << fam[i].omega.to_string();
    }
  }
}

TEST(LStar, FunctionalEquation) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    long long q = F->q();
    for (int m = 1; m <= 2; ++m)
      for (auto& E : enumerate_family(K, m)) {
        auto L = lstar_coefficients(E);
        int g = L.genus;
        for (int n = 0; n <= g; ++n)
          EXPECT_EQ(L.coeffs[std::size_t(2 * g - n)], checked_pow(q, g - n) * L.coeffs[std::size_t(n)]);
      }
  }
}

// Divisor character sums vanish above 2g.
TEST(LStar, SumsVanishPastTwiceGenus) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    auto fam = enumerate_family(K, 1);
    for (auto i : oracle::sample_indices(fam.size(), 20, 9)) {
      const QuadExt& E = fam[i];
      int top = 2 * E.genus + 3;
      auto sums = divisor_char_sums(E, top);
      for (int n = 0; n <= top; ++n) {
        if (n <= 2 * E.genus + 1) EXPECT_EQ(sums[std::size_t(n)], oracle::char_sum_by_enumeration(K, E, n));
        if (n > 2 * E.genus) EXPECT_EQ(sums[std::size_t(n)], 0) << E.omega.to_string() << " n=" << n;
      }
    }
  }
}

// (sum c_n u^n)(sum b_n u^n) = 1 as power series.
TEST(LStar, InverseSeriesConvolution) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    auto fam = enumerate_family(K, 1);
    for (auto i : oracle::sample_indices(fam.size(), 30, 3)) {
      auto c = lstar_coefficients(fam[i]).coeffs;
      auto b = lstar_inverse_series(fam[i], 10);
      for (int n = 0; n <= 10; ++n) {
        long long acc = 0;
        for (int k = 0; k <= n && k < int(c.size()); ++k) acc += c[std::size_t(k)] * b[std::size_t(n - k)];
        EXPECT_EQ(acc, n == 0 ? 1 : 0);
      }
    }
  }
}

TEST(LStar, DegreeOnePlaceCount) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    for (auto& E : enumerate_family(K, 1)) {
      long long n1 = 0;
      for (auto& v : places_of_degree(*F, 1)) n1 += 1 + chi_place(E, v);
      auto L = lstar_coefficients(E);
      long long c1 = L.coeffs.size() > 1 ? L.coeffs[1] : 0;
      EXPECT_EQ(n1, F->q() + 1 + c1);
      EXPECT_EQ(n1, F->q() + 1 + oracle::point_sum(E, 1));
    }
  }
}

TEST(RH, RootsOnCircle) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    for (int m = 1; m <= 2; ++m)
      for (auto& E : enumerate_family(K, m)) EXPECT_LT(rh_check(lstar_coefficients(E)), 1e-9) << E.omega.to_string();
  }
}

TEST(RH, IntegerRootsHelper) {
  // (u - 1)^2 (u + 2): distinct roots 1 and -2
  auto r = integer_poly_roots({2, -3, 0, 1});
  ASSERT_EQ(r.size(), 2u);
  double a = std::min(r[0].real(), r[1].real()), b = std::max(r[0].real(), r[1].real());
  EXPECT_NEAR(a, -2.0, 1e-12);
  EXPECT_NEAR(b, 1.0, 1e-12);
}
