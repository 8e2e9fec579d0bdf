#include <gtest/gtest.h>

#include <filesystem>

#include "qff/moments.hpp"

using namespace qff;

namespace {
const Field& F2() { return field_create(2, 1); }
const Field& F3() { return field_create(3, 1); }
Divisor D(const Field& F, const char* s) { return parse_divisor(F, s); }

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::BadConfig;
}

// prod over all places of the local factor, truncated at degree D, by a
// different route: plain products over the enumerated places.
cplx naive_product(SigmaKind k, const Field& F, cplx s, cplx t, int D) {
  cplx r = 1;
  for (auto& v : places_up_to(F, D)) r *= sigma_factor(k, F.q(), v.degree(), s, t);
  return r;
}
}  // namespace

TEST(FamilyCharSum, Examples) {
  BaseField K(F3());
  EXPECT_EQ(family_char_sum(K, 1, Divisor()), 144);
  // chi(F/2(x)) is 1 exactly when x is unramified: counted directly
  Place x = parse_place(F3(), "x");
  long long unramified = 0;
  for (auto& E : enumerate_family(K, 1)) unramified += E.disc.contains(x) ? 0 : 1;
  EXPECT_EQ(unramified, 108);
  EXPECT_EQ(family_char_sum(K, 1, 2 * Divisor::of(x)), 108);
  EXPECT_DOUBLE_EQ(family_count_main_term(K, 1, Divisor::of(x)), 108.0);
  // odd-degree moduli
  EXPECT_EQ(family_char_sum(K, 1, Divisor::of(x)), 0);
  EXPECT_EQ(family_char_sum(K, 2, D(F3(), "[(x,1),(x+1,1),(x+2,1)]")), 0);
}

TEST(FamilyCharSum, MultiplicativeInSquares) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    auto fam = load_family(K, 1);
    for (auto& c : enumerate_effective(K, 2))
      for (auto& e : enumerate_effective(K, 1)) {
        long long direct = 0;
        for (auto& E : fam->members) direct += chi_divisor(E, c) * (e.disjoint(E.disc) ? 1 : 0);
        EXPECT_EQ(family_char_sum(*fam, c + 2 * e), direct);
      }
  }
}

TEST(FamilyCharSum, MainTermCounts) {
  BaseField K2(F2()), K3(F3());
  for (int m = 1; m <= 3; ++m) EXPECT_DOUBLE_EQ(family_count_main_term(K2, m, Divisor()), 3.0 * std::pow(2.0, 2 * m + 1));
  EXPECT_DOUBLE_EQ(family_count_main_term(K3, 1, Divisor()), 144.0);
  EXPECT_DOUBLE_EQ(family_count_main_term(K3, 2, Divisor()), 1296.0);
}

TEST(Sigma, ProductMatchesNaiveProduct) {
  for (const Field* F : {&F2(), &F3()}) {
    cplx s(1.3, 0.2), t(1.1, -0.4);
    for (auto k : {SigmaKind::S1, SigmaKind::S2, SigmaKind::S3, SigmaKind::Cor1}) {
      cplx a = sigma_partial(k, F->q(), s, t, 6);
      cplx b = naive_product(k, *F, s, t, 6);
      EXPECT_NEAR(std::abs(a / b - 1.0), 0.0, 1e-12) << sigma_name(k);
    }
  }
}

TEST(Sigma, Symmetry) {
  BaseField K(F3());
  cplx s(1.4, 0.3), t(1.2, -0.7);
  auto a = sigma_product(SigmaKind::S1, K, s, t).value;
  auto b = sigma_product(SigmaKind::S1, K, t, s).value;
  EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12);
  auto c = sigma_product(SigmaKind::S3, K, s, t).value;
  auto d = sigma_product(SigmaKind::S3, K, t, s).value;
  EXPECT_NEAR(std::abs(c - d), 0.0, 1e-12);
}

// As s, t grow every local factor tends to 1 - q^{-2 deg v}: the product is 1/zeta(2).
TEST(Sigma, LargeArgumentLimit) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    cplx big(40.0, 0.0);
    for (auto k : {SigmaKind::S1, SigmaKind::S2, SigmaKind::S3, SigmaKind::Cor1}) {
      auto v = sigma_product(k, K, big, big).value;
      EXPECT_NEAR(std::abs(v * zeta_rational(K, 2.0) - 1.0), 0.0, 1e-12) << sigma_name(k);
    }
  }
}

TEST(Sigma, CutoffStability) {
  BaseField K(F2());
  for (auto k : {SigmaKind::S1, SigmaKind::S2, SigmaKind::S3}) {
    auto a = sigma_product_at(k, K, 2.0, 2.0, 8);
    auto b = sigma_product_at(k, K, 2.0, 2.0, 12);
    EXPECT_LE(std::abs(a.value / b.value - 1.0), a.tail_bound) << sigma_name(k);
  }
  EXPECT_EQ(error_of([&] { sigma_product(SigmaKind::S3, K, 0.4, 0.5); }), Errc::OutsideValidityRegion);
}

TEST(Sigma, SeriesAgreesWithProduct) {
  for (const Field* F : {&F2(), &F3()}) {
    BaseField K(*F);
    for (auto k : {SigmaKind::S1, SigmaKind::S2, SigmaKind::S3}) {
      auto r = sigma_series_check(k, K, 2.0, 2.0, 10);
      EXPECT_LT(r.gap, 1e-6) << sigma_name(k);
      if (F->q() == 3) EXPECT_LT(sigma_series_check(k, K, cplx(1.3, 0.2), cplx(1.1, -0.4), 12).gap, 1e-6);
    }
  }
  EXPECT_EQ(error_of([&] { sigma_series_check(SigmaKind::Cor1, BaseField(F3()), 2.0, 2.0, 4); }), Errc::BadConfig);
}

TEST(Moments, RegionErrors) {
  BaseField K(F3());
  EXPECT_EQ(error_of([&] { main_term(MomentKind::LL, K, 1, 0.7, 2.0); }), Errc::OutsideValidityRegion);
  EXPECT_EQ(error_of([&] { main_term(MomentKind::invLL, K, 1, 1.0, 2.0, 0.01); }), Errc::OutsideValidityRegion);
  EXPECT_EQ(error_of([&] { main_term(MomentKind::invL, K, 1, 2.0, 1.0); }), Errc::OutsideValidityRegion);
  // even q has the wider region
  EXPECT_NO_THROW(main_term(MomentKind::L, BaseField(F2()), 1, 0.6, 2.0));
  EXPECT_EQ(error_of([&] { error_report(MomentKind::L, K, 0, 2.0, 2.0, 0.01); }), Errc::BadConfig);
}

TEST(Moments, LargeSCountsFamily) {
  BaseField K(F3());
  auto fam = load_family(K, 1);
  cplx v = moment_sum(MomentKind::L, *fam, 60.0, 60.0);
  EXPECT_NEAR(v.real(), double(fam->members.size()), 1e-9);
}

TEST(Moments, DiagonalRatioIsFamilySize) {
  BaseField K(F2());
  auto fam = load_family(K, 2);
  cplx v = moment_sum(MomentKind::Lq, *fam, cplx(1.7, 0.3), cplx(1.7, 0.3));
  EXPECT_NEAR(std::abs(v - double(fam->members.size())), 0.0, 1e-9);
}

TEST(Moments, SumMatchesDirectEvaluation) {
  BaseField K(F3());
  auto fam = load_family(K, 1);
  cplx s(2.0, 0.5), t(1.5, -0.2);
  cplx direct = 0;
  for (auto& E : fam->members) direct += lfunc_eval(E, s) * lfunc_eval(E, t);
  EXPECT_NEAR(std::abs(moment_sum(MomentKind::LL, *fam, s, t) - direct), 0.0, 1e-9);
}

TEST(Moments, SweepPasses) {
  BaseField K(F3());
  for (auto k : {MomentKind::LL, MomentKind::L}) {
    auto rows = moment_sweep(k, K, 1, 2, 2.0, 2.0, 0.01);
    ASSERT_EQ(rows.size(), 2u);
    for (auto& r : rows) EXPECT_TRUE(r.pass) << kind_name(k) << " m=" << r.m;
    EXPECT_LT(rows[1].rel_err(), rows[0].rel_err());
  }
}

TEST(Moments, FamilyCacheRoundTrip) {
  BaseField K(F2());
  std::string dir = ::testing::TempDir() + "qff_cache_test";
  std::filesystem::create_directories(dir);
  clear_family_memo();
  auto a = load_family(K, 1, 1, dir);
  clear_family_memo();
  auto b = load_family(K, 1, 1, dir);
  ASSERT_EQ(a->members.size(), b->members.size());
  for (std::size_t i = 0; i < a->members.size(); ++i) {
    EXPECT_TRUE(a->members[i] == b->members[i]);
    EXPECT_TRUE(a->lpolys[i] == b->lpolys[i]);
  }
  std::filesystem::remove_all(dir);
}

TEST(Parsing, KindsAndComplex) {
  EXPECT_EQ(parse_kind("L_over_L"), MomentKind::Lq);
  EXPECT_EQ(parse_kind("inv_LL"), MomentKind::invLL);
  EXPECT_EQ(error_of([] { parse_kind("LLL"); }), Errc::BadConfig);
  EXPECT_EQ(parse_complex("1.5-2i"), cplx(1.5, -2.0));
  EXPECT_EQ(parse_complex("2"), cplx(2.0, 0.0));
  EXPECT_EQ(parse_complex("-i"), cplx(0.0, -1.0));
}

TEST(Identities, SmallSuites) {
  for (auto [F, m] : std::vector<std::pair<const Field*, int>>{{&F3(), 1}, {&F2(), 1}, {&F2(), 2}}) {
    auto rep = identity_suite(BaseField(*F), m);
    EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures[0].identity + " " + rep.failures[0].witness);
    EXPECT_FALSE(rep.checked.empty());
  }
}

TEST(Identities, UnramifiedProduct) {
  BaseField K(F3());
  for (auto k : {SigmaKind::S1, SigmaKind::S2, SigmaKind::S3}) {
    auto r1 = unramified_product_check(k, K, 1, 2.0, 2.0);
    auto r2 = unramified_product_check(k, K, 2, 2.0, 2.0);
    EXPECT_TRUE(std::isfinite(r1.ratio));
    EXPECT_LT(std::abs(r2.lhs / r2.main - 1.0), std::abs(r1.lhs / r1.main - 1.0) + 1e-12) << sigma_name(k);
  }
}

TEST(Identities, CharacterTailBounded) {
  BaseField K(F3());
  auto fam = enumerate_family(K, 2);
  double worst = 0;
  for (std::size_t i = 0; i < fam.size(); i += 37) worst = std::max(worst, character_tail_ratio(K, 2, fam[i], 2.0, 2.0));
  EXPECT_GT(worst, 0.0);
  EXPECT_LT(worst, 10.0);
}

TEST(Bounds, CharSumSweepRows) {
  BaseField K(F3());
  std::vector<Divisor> cs{D(F3(), "[(x,1),(x+1,1)]"), D(F3(), "[(x^2+1,1)]")};
  auto rows = char_sum_bound_sweep(K, 1, 2, cs, 0.01);
  ASSERT_EQ(rows.size(), 4u);
  for (auto& r : rows) EXPECT_LE(std::abs(double(r.sum)), family_count_main_term(K, r.m, Divisor()) + 1);
  EXPECT_EQ(error_of([&] { char_sum_bound_sweep(K, 1, 1, {D(F3(), "[(x,2)]")}, 0.01); }), Errc::BadConfig);
}
