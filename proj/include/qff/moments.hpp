#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qff/characters.hpp"
#include "qff/divisor.hpp"
#include "qff/error.hpp"
#include "qff/lfunc.hpp"
#include "qff/parallel.hpp"
#include "qff/quad_ext.hpp"

namespace qff {

enum class MomentKind { LL, Lq, invLL, L, invL };
enum class SigmaKind { S1, S2, S3, Cor1 };

inline const char* kind_name(MomentKind k) {
  switch (k) {
    case MomentKind::LL: return "LL";
    case MomentKind::Lq: return "Lq";
    case MomentKind::invLL: return "invLL";
    case MomentKind::L: return "L";
    case MomentKind::invL: return "invL";
  }
  return "?";
}

inline MomentKind parse_kind(const std::string& s) {
  if (s == "LL") return MomentKind::LL;
  if (s == "Lq" || s == "L_over_L") return MomentKind::Lq;
  if (s == "invLL" || s == "inv_LL") return MomentKind::invLL;
  if (s == "L") return MomentKind::L;
  if (s == "invL" || s == "inv_L") return MomentKind::invL;
  fail(Errc::BadConfig, "unknown kind '" + s + "'");
}

inline const char* sigma_name(SigmaKind k) {
  switch (k) {
    case SigmaKind::S1: return "sigma1";
    case SigmaKind::S2: return "sigma2";
    case SigmaKind::S3: return "sigma3";
    case SigmaKind::Cor1: return "cor1";
  }
  return "?";
}

inline SigmaKind parse_sigma(const std::string& s) {
  if (s == "sigma1" || s == "s1" || s == "1") return SigmaKind::S1;
  if (s == "sigma2" || s == "s2" || s == "2") return SigmaKind::S2;
  if (s == "sigma3" || s == "s3" || s == "3") return SigmaKind::S3;
  if (s == "cor1") return SigmaKind::Cor1;
  fail(Errc::BadConfig, "unknown sigma kind '" + s + "'");
}

// "a+bi", "a-bi", "a", "bi".
inline cplx parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.empty()) fail(Errc::ParseError, "empty complex number");
  try {
    if (s.back() != 'i') return {std::stod(s), 0.0};
    std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;)
      if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
        split = i;
        break;
      }
    if (split == std::string::npos) {
      if (body.empty() || body == "+") return {0.0, 1.0};
      if (body == "-") return {0.0, -1.0};
      return {0.0, std::stod(body)};
    }
    std::string im = body.substr(split);
    double b = im == "+" ? 1.0 : im == "-" ? -1.0 : std::stod(im);
    return {std::stod(body.substr(0, split)), b};
  } catch (const std::logic_error&) {
    fail(Errc::ParseError, "bad complex number '" + text + "'");
  }
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_complex(cplx z) {
  std::string re = format_double(z.real());
  double im = z.imag();
  if (im == 0.0) return re;
  std::string ims = format_double(std::abs(im));
  return re + (im < 0 || std::signbit(im) ? "-" : "+") + ims + "i";
}

inline int mobius_int(int n) {
  int r = 1;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      r = -r;
    }
  return n > 1 ? -r : r;
}

// ------------------------------------------------------------- families

struct Family {
  int q = 0;
  int m = 0;
  std::vector<QuadExt> members;
  std::vector<LPolynomial> lpolys;
};

namespace detail {

inline std::string family_cache_path(const std::string& dir, int q, int m) {
  return dir + "/family_q" + std::to_string(q) + "_m" + std::to_string(m) + ".txt";
}

inline bool read_family_cache(const std::string& path, const Field& F, int m, Family& fam) {
  std::ifstream in(path);
  if (!in) return false;
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string tag;
  int q = 0, mm = 0;
  std::size_t count = 0;
  if (!(hs >> tag >> q >> mm >> count) || tag != "qff-family" || q != F.q() || mm != m) return false;
  fam.members.reserve(count);
  fam.lpolys.reserve(count);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto semi = line.find(';');
    if (semi == std::string::npos) return false;
    QuadExt E = make_extension(parse_rational(F, line.substr(0, semi)));
    if (E.omega.to_string() != line.substr(0, semi) || E.genus != m) return false;
    LPolynomial L;
    L.q = F.q();
    L.genus = m;
    std::istringstream cs(line.substr(semi + 1));
    std::string tok;
    while (std::getline(cs, tok, ',')) L.coeffs.push_back(std::stoll(tok));
    if (int(L.coeffs.size()) != 2 * m + 1) return false;
    fam.members.push_back(std::move(E));
    fam.lpolys.push_back(std::move(L));
  }
  return fam.members.size() == count;
}

inline void write_family_cache(const std::string& path, const Family& fam) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return;
    out << "qff-family " << fam.q << ' ' << fam.m << ' ' << fam.members.size() << '\n';
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
      out << fam.members[i].omega.to_string() << ';';
      for (std::size_t k = 0; k < fam.lpolys[i].coeffs.size(); ++k) out << (k ? "," : "") << fam.lpolys[i].coeffs[k];
      out << '\n';
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

struct FamilyMemo {
  std::mutex mu;
  std::map<std::pair<int, int>, std::shared_ptr<const Family>> map;
};

inline FamilyMemo& family_memo() {
  static FamilyMemo memo;
  return memo;
}

}  // namespace detail

inline void clear_family_memo() {
  auto& memo = detail::family_memo();
  std::lock_guard<std::mutex> lock(memo.mu);
  memo.map.clear();
}

// The genus-m family with L-polynomials, memoized per (q, m) and optionally
// on disk.
inline std::shared_ptr<const Family> load_family(const BaseField& K, int m, int threads = 1, const std::string& cache_dir = "") {
  auto& mu = detail::family_memo().mu;
  auto& memo = detail::family_memo().map;
  const Field& F = K.field();
  auto key = std::make_pair(F.q(), m);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  auto fam = std::make_shared<Family>();
  fam->q = F.q();
  fam->m = m;
  bool loaded = false;
  if (!cache_dir.empty()) {
    Family tmp;
    tmp.q = F.q();
    tmp.m = m;
    try {
      loaded = detail::read_family_cache(detail::family_cache_path(cache_dir, F.q(), m), F, m, tmp);
    } catch (const std::exception&) {
      loaded = false;
    }
    if (loaded) *fam = std::move(tmp);
  }
  if (!loaded) {
    fam->members = enumerate_family(K, m, threads);
    fam->lpolys = parallel_map(fam->members.size(), threads, [&](std::size_t i) { return lstar_coefficients(fam->members[i]); });
    if (!cache_dir.empty()) detail::write_family_cache(detail::family_cache_path(cache_dir, F.q(), m), *fam);
  }
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = memo.emplace(key, fam);
  return it->second;
}

inline long long family_char_sum(const Family& fam, const Divisor& c, int threads = 1) {
  require_effective(c, "family_char_sum");
  auto vals = parallel_map(fam.members.size(), threads, [&](std::size_t i) { return (long long)chi_divisor(fam.members[i], c); });
  long long s = 0;
  for (auto v : vals) s += v;
  return s;
}

inline long long family_char_sum(const BaseField& K, int m, const Divisor& c, int threads = 1) {
  return family_char_sum(*load_family(K, m, threads), c, threads);
}

// q^{2m} 2 q^3 / (zeta(2) (q-1)) prod_{v | c} (1 + q^{-deg v})^{-1}
inline double family_count_main_term(const BaseField& K, int m, const Divisor& c) {
  double q = K.q();
  double r = std::pow(q, 2 * m) * 2.0 * (q * q - 1.0);
  for (auto& [v, e] : c.terms()) r /= 1.0 + std::pow(q, -v.degree());
  return r;
}

// ------------------------------------------------------- Euler products

// Local factor minus one, kept separate so that log1p keeps full precision.
inline cplx sigma_factor_m1(SigmaKind k, int q, int d, cplx s, cplx t) {
  double x = std::pow(double(q), -d);
  cplx a = q_pow(q, -s * double(d)), b = q_pow(q, -t * double(d));
  switch (k) {
    case SigmaKind::S1:
      return -x * x - (x - x * x) * (a * a - a * a * b * b + b * b) + (1.0 - x) * a * b;
    case SigmaKind::S2:
      return -x * x + x * x * a * a - x * a * a - a * b + x * a * b;
    case SigmaKind::S3:
      return -x * x + a * b - x * a * b;
    case SigmaKind::Cor1:
      return -x * x + x * x * a * a - x * a * a;
  }
  return 0.0;
}

inline cplx sigma_factor(SigmaKind k, int q, int d, cplx s, cplx t) { return 1.0 + sigma_factor_m1(k, q, d, s, t); }

// Number of places of degree d as a double (no overflow for large d).
inline double place_count_real(int q, int d) {
  if (std::pow(double(q), d) < 9e15) return double(place_count(q, d));
  double s = 0;
  for (int e = 1; e <= d; ++e)
    if (d % e == 0) s += double(mobius_int(d / e)) * std::pow(double(q), e);
  return s / d;
}

// log(1 + z) on the principal branch, accurate for small z.
inline cplx log1p_c(cplx z) {
  double re = 0.5 * std::log1p(2 * z.real() + std::norm(z));
  return {re, std::atan2(z.imag(), 1.0 + z.real())};
}

struct SigmaProduct {
  SigmaKind kind;
  cplx s, t;
  int cutoff = 0;
  cplx value;
  double tail_bound = 0;  // relative
};

// |factor - 1| <= B q^{-kappa d}.
inline std::pair<double, double> sigma_decay(SigmaKind k, cplx s, cplx t) {
  double ss = s.real(), tt = t.real();
  switch (k) {
    case SigmaKind::S1: return {9.0, std::min({2.0, 1 + 2 * ss, 1 + 2 * tt, ss + tt})};
    case SigmaKind::S2: return {5.0, std::min({2.0, 1 + 2 * ss, ss + tt})};
    case SigmaKind::S3: return {3.0, std::min(2.0, ss + tt)};
    case SigmaKind::Cor1: return {3.0, std::min(2.0, 1 + 2 * ss)};
  }
  return {0, 0};
}

// Relative error bound from the places of degree > D (with #places <= q^d/d
// and |log(1+z)| <= 2|z| for |z| <= 1/2).
inline double sigma_tail_bound(SigmaKind k, int q, cplx s, cplx t, int D) {
  auto [B, kappa] = sigma_decay(k, s, t);
  if (B * std::pow(double(q), -kappa * (D + 1)) > 0.5) return INFINITY;
  double r = std::pow(double(q), 1 - kappa);
  double T = 2.0 * (B / (D + 1)) * std::pow(double(q), (1 - kappa) * (D + 1)) / (1 - r);
  return std::expm1(T);
}

inline cplx sigma_partial(SigmaKind k, int q, cplx s, cplx t, int D) {
  cplx logsum = 0;
  for (int d = 1; d <= D; ++d) logsum += place_count_real(q, d) * log1p_c(sigma_factor_m1(k, q, d, s, t));
  return std::exp(logsum);
}

inline SigmaProduct sigma_product(SigmaKind k, const BaseField& K, cplx s, cplx t, double tol = 1e-12) {
  auto [B, kappa] = sigma_decay(k, s, t);
  if (kappa <= 1) fail(Errc::OutsideValidityRegion, std::string(sigma_name(k)) + ": Euler product needs decay exponent > 1");
  SigmaProduct out{k, s, t, 0, 0, 0};
  for (int D = 1; D <= 60; ++D) {
    double bnd = sigma_tail_bound(k, K.q(), s, t, D);
    if (bnd < tol) {
      out.cutoff = D;
      out.tail_bound = bnd;
      out.value = sigma_partial(k, K.q(), s, t, D);
      return out;
    }
  }
  fail(Errc::OutsideValidityRegion, std::string(sigma_name(k)) + ": tolerance not reachable by degree 60");
}

inline SigmaProduct sigma_product_at(SigmaKind k, const BaseField& K, cplx s, cplx t, int D) {
  SigmaProduct out{k, s, t, D, sigma_partial(k, K.q(), s, t, D), sigma_tail_bound(k, K.q(), s, t, D)};
  return out;
}

// ------------------------------------------------------ main terms, bounds

inline void check_region(MomentKind k, const BaseField& K, cplx s, cplx t, double eps) {
  double ss = s.real(), tt = t.real();
  bool odd = K.odd();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(Errc::OutsideValidityRegion, "violated: " + what);
  };
  std::string e = eps == 0 ? "" : "+eps";
  switch (k) {
    case MomentKind::LL:
      if (odd) {
        need(ss > 0.75 + eps, "Re(s) > 3/4" + e);
        need(tt > 0.75 + eps, "Re(t) > 3/4" + e);
        need(ss + tt > 2 + 2 * eps, "Re(s)+Re(t) > 2" + std::string(eps == 0 ? "" : "+2eps"));
      } else {
        need(ss > 0.5 + eps, "Re(s) > 1/2" + e);
        need(tt > 0.5 + eps, "Re(t) > 1/2" + e);
        need(ss + tt > 1.5 + 2 * eps, "Re(s)+Re(t) > 3/2" + std::string(eps == 0 ? "" : "+2eps"));
      }
      break;
    case MomentKind::Lq:
      need(ss > (odd ? 0.75 : 0.5) + eps, std::string("Re(s) > ") + (odd ? "3/4" : "1/2") + e);
      need(tt > 1 + eps, "Re(t) > 1" + e);
      if (odd) need(ss + tt > 2 + 2 * eps, "Re(s)+Re(t) > 2" + std::string(eps == 0 ? "" : "+2eps"));
      break;
    case MomentKind::invLL:
      need(ss > 1 + eps, "Re(s) > 1" + e);
      need(tt > 1 + eps, "Re(t) > 1" + e);
      break;
    case MomentKind::L:
      need(ss > (odd ? 0.75 : 0.5) + eps, std::string("Re(s) > ") + (odd ? "3/4" : "1/2") + e);
      break;
    case MomentKind::invL:
      need(tt > 1 + eps, "Re(t) > 1" + e);
      break;
  }
}

inline cplx main_term(MomentKind k, const BaseField& K, int m, cplx s, cplx t, double eps = 0, double tol = 1e-14) {
  check_region(k, K, s, t, eps);
  double q = K.q();
  double pre = std::pow(q, 2 * m) * 2.0 * q * q * q / (q - 1.0);
  switch (k) {
    case MomentKind::LL:
      return pre * zeta_rational(K, 2.0 * s) * zeta_rational(K, 2.0 * t) * sigma_product(SigmaKind::S1, K, s, t, tol).value;
    case MomentKind::Lq:
      return pre * zeta_rational(K, 2.0 * s) * sigma_product(SigmaKind::S2, K, s, t, tol).value;
    case MomentKind::invLL:
      return pre * sigma_product(SigmaKind::S3, K, s, t, tol).value;
    case MomentKind::L:
      return pre * zeta_rational(K, 2.0 * s) * sigma_product(SigmaKind::Cor1, K, s, t, tol).value;
    case MomentKind::invL:
      return pre / zeta_rational(K, cplx(2.0, 0.0));
  }
  return 0;
}

// The O(.) expression of the error term, without its constant.
inline double error_bound(MomentKind k, const BaseField& K, int m, cplx s, cplx t, double eps) {
  double q = K.q(), ss = s.real(), tt = t.real();
  auto P = [&](double e) { return std::pow(q, 2.0 * m * e); };
  double qm = std::pow(q, m);
  bool odd = K.odd();
  switch (k) {
    case MomentKind::LL:
      return odd ? qm * (1 + P(1.25 + eps - ss)) * (1 + P(1.25 + eps - tt)) : qm * (1 + P(1 + eps - ss)) * (1 + P(1 + eps - tt));
    case MomentKind::Lq:
      return odd ? qm * (1 + P(1.25 + eps - ss) + P(2.5 + 2 * eps - 2 * tt) + P(2.5 + 2 * eps - ss - tt)) : qm * (1 + P(1 + eps - ss));
    case MomentKind::invLL:
      return odd ? qm * (1 + P(2.5 + 2 * eps - 2 * ss) + P(2.5 + 2 * eps - 2 * tt)) : qm;
    case MomentKind::L:
      return odd ? qm * (1 + P(1.25 + eps - ss)) : qm * (1 + P(1 + eps - ss));
    case MomentKind::invL:
      return odd ? qm * P(2.5 + 2 * eps - 2 * tt) : qm;
  }
  return 0;
}

// --------------------------------------------------------- moment sums

namespace detail {

inline cplx checked_denominator(const LPolynomial& L, cplx s) {
  cplx v = lfunc_eval(L, s);
  if (std::abs(s.real() - 0.5) < 1e-12 && std::abs(v) < 1e-9)
    fail(Errc::EvaluationOnCriticalCircle, "L-function vanishes at the evaluation point");
  if (v == cplx(0, 0)) fail(Errc::DivisionByZero, "L-function vanishes at the evaluation point");
  return v;
}

}  // namespace detail

inline cplx moment_term(MomentKind k, const LPolynomial& L, cplx s, cplx t) {
  switch (k) {
    case MomentKind::LL: return lfunc_eval(L, s) * lfunc_eval(L, t);
    case MomentKind::Lq: return lfunc_eval(L, s) / detail::checked_denominator(L, t);
    case MomentKind::invLL: return 1.0 / (detail::checked_denominator(L, s) * detail::checked_denominator(L, t));
    case MomentKind::L: return lfunc_eval(L, s);
    case MomentKind::invL: return 1.0 / detail::checked_denominator(L, t);
  }
  return 0;
}

inline cplx moment_sum(MomentKind k, const Family& fam, cplx s, cplx t, int threads = 1) {
  auto terms = parallel_map(fam.lpolys.size(), threads, [&](std::size_t i) { return moment_term(k, fam.lpolys[i], s, t); });
  return pairwise_sum(terms);
}

struct MomentReport {
  MomentKind kind;
  int q = 0, m = 0;
  cplx s, t;
  cplx lhs, main;
  double abs_err = 0;
  double bound = 0;
  double ratio = 0;  // abs_err / bound
  double C = 0;      // calibrated constant
  bool pass = false;
  double rel_err() const { return std::abs(lhs / main - 1.0); }
};

inline MomentReport error_report(MomentKind k, const BaseField& K, int m, cplx s, cplx t, double eps, int threads = 1,
                                 const std::string& cache_dir = "", std::optional<double> C = std::nullopt) {
  if (m < 1) fail(Errc::BadConfig, "moments need m >= 1");
  MomentReport r;
  r.kind = k;
  r.q = K.q();
  r.m = m;
  r.s = s;
  r.t = t;
  r.main = main_term(k, K, m, s, t, eps);
  auto fam = load_family(K, m, threads, cache_dir);
  r.lhs = moment_sum(k, *fam, s, t, threads);
  r.abs_err = std::abs(r.lhs - r.main);
  r.bound = error_bound(k, K, m, s, t, eps);
  r.ratio = r.abs_err / r.bound;
  r.C = C ? *C : r.ratio;
  // constants are fitted at the smallest m; allow the 3x slack of the sweep protocol
  r.pass = std::isfinite(r.ratio) && r.ratio <= 3.0 * r.C + 1e-12;
  return r;
}

// Reports for m = m_lo..m_hi with C calibrated at m_lo.
inline std::vector<MomentReport> moment_sweep(MomentKind k, const BaseField& K, int m_lo, int m_hi, cplx s, cplx t, double eps,
                                              int threads = 1, const std::string& cache_dir = "") {
  std::vector<MomentReport> out;
  std::optional<double> C;
  for (int m = m_lo; m <= m_hi; ++m) {
    out.push_back(error_report(k, K, m, s, t, eps, threads, cache_dir, C));
    if (!C) C = out.back().C;
  }
  return out;
}

// ------------------------------------------------------ divisor-sum checks

struct SigmaSeriesCheck {
  cplx lhs, rhs;
  double gap = 0;
};

// Partial sum over c with deg c <= D of
//   prod_{v | c}(1+q^{-deg v})^{-1} sum_{a + b = 2c} w(a, b) q^{-s deg a} q^{-t deg b}
// with w = 1, mu(b), mu(a) mu(b) for sigma1..3, against the closed form.
inline SigmaSeriesCheck sigma_series_check(SigmaKind k, const BaseField& K, cplx s, cplx t, int D) {
  if (k == SigmaKind::Cor1) fail(Errc::BadConfig, "sigma_series_check covers sigma1..sigma3");
  if (s.real() <= 0.5 || t.real() <= 0.5) fail(Errc::OutsideValidityRegion, "Re(s), Re(t) > 1/2 required");
  const Field& F = K.field();
  int q = F.q();
  // graded partial sums: series[n] = sum over c of degree n
  std::vector<cplx> series(std::size_t(D + 1), 0.0);
  series[0] = 1.0;
  for (auto& v : places_up_to(F, std::max(D, 1))) {
    int d = v.degree();
    if (d > D) break;
    double wv = 1.0 / (1.0 + std::pow(double(q), -d));
    cplx a = q_pow(q, -s * double(d)), b = q_pow(q, -t * double(d));
    std::vector<cplx> local(std::size_t(D + 1), 0.0);
    local[0] = 1.0;
    for (int c = 1; c * d <= D; ++c) {
      cplx inner = 0;
      for (int j = 0; j <= 2 * c; ++j) {  // ord_v b = j, ord_v a = 2c - j
        int w = 1;
        if (k == SigmaKind::S2) w = j == 0 ? 1 : j == 1 ? -1 : 0;
        if (k == SigmaKind::S3) {
          int i = 2 * c - j;
          w = (i <= 1 && j <= 1) ? ((i == 1 ? -1 : 1) * (j == 1 ? -1 : 1)) : 0;
        }
        if (w != 0) inner += double(w) * std::pow(a, 2 * c - j) * std::pow(b, j);
      }
      local[std::size_t(c * d)] = wv * inner;
    }
    std::vector<cplx> next(std::size_t(D + 1), 0.0);
    for (int i = 0; i <= D; ++i) {
      if (series[std::size_t(i)] == cplx(0, 0)) continue;
      for (int j = 0; i + j <= D; ++j) next[std::size_t(i + j)] += series[std::size_t(i)] * local[std::size_t(j)];
    }
    series = std::move(next);
  }
  SigmaSeriesCheck r;
  r.lhs = 0;
  for (auto& x : series) r.lhs += x;
  cplx z2 = zeta_rational(K, cplx(2.0, 0.0));
  switch (k) {
    case SigmaKind::S1:
      r.rhs = z2 * zeta_rational(K, 2.0 * s) * zeta_rational(K, 2.0 * t) * sigma_product(SigmaKind::S1, K, s, t, 1e-15).value;
      break;
    case SigmaKind::S2:
      r.rhs = z2 * zeta_rational(K, 2.0 * s) * sigma_product(SigmaKind::S2, K, s, t, 1e-15).value;
      break;
    default:
      r.rhs = z2 * sigma_product(SigmaKind::S3, K, s, t, 1e-15).value;
      break;
  }
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

// 2Div-restricted family sum: sum_F sum_{c disjoint from disc F} sum_{a+b=2c}
// w(a,b) q^{-s deg a - t deg b}, each F contributing the Euler product over its
// unramified places.
struct UnramifiedProductCheck {
  cplx lhs, main;
  double ratio = 0;  // |lhs - main| / q^{m/2} (odd) or q^m (even)
};

namespace detail {

inline cplx unramified_local(SigmaKind k, int q, int d, cplx s, cplx t) {
  cplx a = q_pow(q, -s * double(d)), b = q_pow(q, -t * double(d));
  switch (k) {
    case SigmaKind::S1: return 0.5 * (1.0 / ((1.0 - a) * (1.0 - b)) + 1.0 / ((1.0 + a) * (1.0 + b)));
    case SigmaKind::S2: return (1.0 - a * b) / (1.0 - a * a);
    case SigmaKind::S3: return 1.0 + a * b;
    default: return 1.0;
  }
}

}  // namespace detail

inline UnramifiedProductCheck unramified_product_check(SigmaKind k, const BaseField& K, int m, cplx s, cplx t, int threads = 1,
                                   const std::string& cache_dir = "") {
  if (k == SigmaKind::Cor1) fail(Errc::BadConfig, "unramified_product_check covers sigma1..sigma3");
  if (s.real() <= 0.5 || t.real() <= 0.5) fail(Errc::OutsideValidityRegion, "Re(s), Re(t) > 1/2 required");
  int q = K.q();
  cplx logall = 0;
  for (int d = 1; d <= 60; ++d) logall += place_count_real(q, d) * log1p_c(detail::unramified_local(k, q, d, s, t) - 1.0);
  cplx all = std::exp(logall);
  auto fam = load_family(K, m, threads, cache_dir);
  auto terms = parallel_map(fam->members.size(), threads, [&](std::size_t i) {
    cplx r = all;
    for (auto& [v, e] : fam->members[i].disc.terms()) r /= detail::unramified_local(k, q, v.degree(), s, t);
    return r;
  });
  UnramifiedProductCheck out;
  out.lhs = pairwise_sum(terms);
  double pre = std::pow(double(q), 2 * m) * 2.0 * q * q * q / (q - 1.0);
  switch (k) {
    case SigmaKind::S1:
      out.main = pre * zeta_rational(K, 2.0 * s) * zeta_rational(K, 2.0 * t) * sigma_product(SigmaKind::S1, K, s, t, 1e-15).value;
      break;
    case SigmaKind::S2: out.main = pre * zeta_rational(K, 2.0 * s) * sigma_product(SigmaKind::S2, K, s, t, 1e-15).value; break;
    default: out.main = pre * sigma_product(SigmaKind::S3, K, s, t, 1e-15).value; break;
  }
  out.ratio = std::abs(out.lhs - out.main) / std::pow(double(q), K.odd() ? 0.5 * m : double(m));
  return out;
}

// sum_b q^{-Re(t) deg b} |sum_{a: a+b not in 2Div, deg a > 2m} q^{-s deg a} chi(F/a)|
// divided by q^{-2m(Re(s)-1/2)}.  The inner sum is evaluated exactly through the
// vanishing of degree-n character sums for n > 2m.
inline double character_tail_ratio(const BaseField& K, int m, const QuadExt& E, cplx s, cplx t) {
  if (s.real() <= 0.5 || t.real() <= 0.5) fail(Errc::OutsideValidityRegion, "Re(s), Re(t) > 1/2 required");
  int q = K.q();
  std::vector<int> ram;
  for (auto& [v, e] : E.disc.terms()) ram.push_back(v.degree());
  const int N = 600;
  // A_k rho^k with rho = q^{-2s}: divisors of degree k prime to disc
  cplx rho = q_pow(q, -2.0 * s);
  std::vector<cplx> A(std::size_t(N + 1));
  for (int k = 0; k <= N; ++k) {
    // coefficient of Z(u): (q^{k+1}-1)/(q-1)
    A[std::size_t(k)] = (double(q) * std::pow(double(q) * rho, k) - std::pow(rho, k)) / double(q - 1);
  }
  for (int d : ram)
    for (int k = N; k >= d; --k) A[std::size_t(k)] -= std::pow(rho, d) * A[std::size_t(k - d)];
  // suffix sums of A_k rho^k
  std::vector<cplx> suffix(std::size_t(N + 2), 0.0);
  for (int k = N; k >= 0; --k) suffix[std::size_t(k)] = suffix[std::size_t(k + 1)] + A[std::size_t(k)];
  auto G = [&](int j) {
    int k0 = std::max(0, (2 * m - j) / 2 + 1);
    if (2 * k0 + j <= 2 * m) ++k0;
    if (k0 > N) return 0.0;
    return std::abs(q_pow(q, -s * double(j)) * suffix[std::size_t(k0)]);
  };
  // B_j r^j, r = q^{-Re t}: square-free divisors of degree j prime to disc.
  double r = std::pow(double(q), -t.real());
  std::vector<double> Bs(std::size_t(N + 1), 0.0);
  {
    // Z(ru)/Z(r^2u^2) = (1 - r^2u^2)(1 - q r^2 u^2) / ((1 - ru)(1 - q r u))
    std::vector<double> z(std::size_t(N + 1));
    for (int k = 0; k <= N; ++k) z[std::size_t(k)] = (double(q) * std::pow(double(q) * r, k) - std::pow(r, k)) / double(q - 1);
    std::vector<double> num{1.0, 0.0, -(1.0 + q) * r * r, 0.0, double(q) * std::pow(r, 4)};
    for (int k = 0; k <= N; ++k)
      for (int i = 0; i < 5 && i <= k; ++i) Bs[std::size_t(k)] += num[std::size_t(i)] * z[std::size_t(k - i)];
    for (int d : ram) {  // divide by (1 + (ru)^d)
      double rd = std::pow(r, d);
      for (int k = d; k <= N; ++k) Bs[std::size_t(k)] -= rd * Bs[std::size_t(k - d)];
    }
  }
  double T = 0;
  for (int j = 0; j <= N; ++j) {
    double term = Bs[std::size_t(j)] * G(j);
    if (!std::isfinite(term)) break;
    T += term;
    if (j > 2 * m + 8 && term < 1e-18 * T) break;
  }
  double zeta2t = 1.0 / ((1.0 - std::pow(double(q), -2 * t.real())) * (1.0 - std::pow(double(q), 1 - 2 * t.real())));
  T *= zeta2t;
  return T / std::pow(double(q), -2.0 * m * (s.real() - 0.5));
}

// --------------------------------------------------------- bound sweeps

struct CharSumBoundRow {
  int m = 0;
  Divisor c;
  long long sum = 0;
  double bound = 0;
  double ratio = 0;
  bool small_m = false;  // m <= deg c / 4, bound q^{2m}
};

inline std::vector<CharSumBoundRow> char_sum_bound_sweep(const BaseField& K, int m_lo, int m_hi, const std::vector<Divisor>& cs, double eps,
                                                int threads = 1, const std::string& cache_dir = "") {
  std::vector<CharSumBoundRow> rows;
  double q = K.q();
  for (int m = m_lo; m <= m_hi; ++m) {
    auto fam = load_family(K, m, threads, cache_dir);
    for (auto& c : cs) {
      if (c.is_even()) fail(Errc::BadConfig, c.to_string() + " lies in 2Div(K)");
      CharSumBoundRow r;
      r.m = m;
      r.c = c;
      r.sum = family_char_sum(*fam, c, threads);
      double dc = double(c.degree());
      r.small_m = 4 * m <= c.degree();
      if (r.small_m)
        r.bound = std::pow(q, 2 * m);
      else
        r.bound = std::pow(q, m) * std::pow(q, (K.odd() ? eps + 0.25 : eps) * dc);
      r.ratio = std::abs(double(r.sum)) / r.bound;
      rows.push_back(r);
    }
  }
  return rows;
}

// ---------------------------------------------------------- identities

struct IdentityFailure {
  std::string identity;
  std::string witness;
};

struct IdentityReport {
  std::map<std::string, long long> checked;
  std::vector<IdentityFailure> failures;
  bool ok() const { return failures.empty(); }
  void record(const std::string& id, bool good, const std::string& witness) {
    ++checked[id];
    if (!good) failures.push_back({id, witness});
  }
};

namespace detail {

inline std::vector<Divisor> effective_up_to(const BaseField& K, int n) {
  std::vector<Divisor> out;
  for (int k = 0; k <= n; ++k)
    for (auto& d : enumerate_effective(K, k)) out.push_back(d);
  return out;
}

// sum_{deg b = n, b square-free, disjoint from S} mu(b), for n <= N.
inline std::vector<long long> mobius_counts_avoiding(const Field& F, const Divisor& S, int N) {
  std::vector<long long> c(std::size_t(N + 1), 0);
  c[0] = 1;
  for (auto& v : places_up_to(F, std::max(N, 1))) {
    int d = v.degree();
    if (d > N) break;
    if (S.contains(v)) continue;
    for (int k = N; k >= d; --k) c[std::size_t(k)] -= c[std::size_t(k - d)];
  }
  return c;
}

}  // namespace detail

// Odd q: (q-1)/2 sum_F chi(F/c) against
//   sum_{b, (b, c+v0)=0} mu(b) sum_{k deg v0 - i = m+1-deg b}
//       sum_{alpha in L(2k v0 - 2a_i) \ L(2(k-1) v0 - 2a_i)} chi_c(alpha)
// with a_i = i w for a degree-1 place w outside supp c + v0.
inline std::pair<long long, long long> generator_sum_sides(const BaseField& K, const Family& fam, const Divisor& c, const Place& v0) {
  const Field& F = K.field();
  if (!K.odd()) fail(Errc::EvenCharacteristic, "this identity is for odd q");
  if (v0.degree() % 2 == 0) fail(Errc::EvenDegreePlace, v0.to_string());
  if (c.contains(v0)) fail(Errc::PlaceInSupport, v0.to_string());
  int m = fam.m;
  long long lhs = (F.q() - 1) / 2 * family_char_sum(fam, c);
  Place w;
  bool have_w = false;
  for (auto& v : places_of_degree(F, 1))
    if (!c.contains(v) && v != v0) {
      w = v;
      have_w = true;
      break;
    }
  if (!have_w && v0.degree() > 1) fail(Errc::BadConfig, "no degree-1 place outside supp c");
  ChiModulus chi(F, c);
  int top = m + 1;
  auto mob = detail::mobius_counts_avoiding(F, c + Divisor::of(v0), top);
  std::map<std::pair<int, int>, long long> T;
  auto Tsum = [&](int i, int k) {
    auto key = std::make_pair(i, k);
    auto it = T.find(key);
    if (it != T.end()) return it->second;
    Divisor ai = i == 0 ? Divisor() : Divisor::of(w, i);
    Divisor A = 2 * k * Divisor::of(v0) - 2 * ai;
    RRSpace L(F, A), Lsmall(F, A - 2 * Divisor::of(v0));
    long long s = 0;
    rr_enumerate(L, [&](std::uint64_t, const RationalFunction& a) {
      if (a.is_zero() || Lsmall.contains(a)) return;
      s += chi(a);
    });
    T.emplace(key, s);
    return s;
  };
  long long rhs = 0;
  int dv = v0.degree();
  for (int db = 0; db <= top; ++db) {
    if (mob[std::size_t(db)] == 0) continue;
    int target = top - db;
    for (int i = 0; i < dv; ++i) {
      if ((target + i) % dv != 0) continue;
      int k = (target + i) / dv;
      rhs += mob[std::size_t(db)] * Tsum(i, k);
    }
  }
  return {lhs, rhs};
}

// Even q: sum over S(d) of chi(F/c), cached per key.
class KeySums {
 public:
  explicit KeySums(const BaseField& K) : K_(K) {}
  long long operator()(const Divisor& c, const Divisor& d) {
    if (d.is_zero()) return 0;
    auto it = classes_.find(d);
    if (it == classes_.end()) it = classes_.emplace(d, classes_with_key(K_, d)).first;
    long long s = 0;
    for (auto& E : it->second) s += chi_divisor(E, c);
    return s;
  }

 private:
  BaseField K_;
  std::map<Divisor, std::vector<QuadExt>> classes_;
};

struct GeneratorCountSides {
  long long lhs = 0, generators = 0, mobius = 0;
};

// Even q, (c, d) = 0, d > 0: q^{l(d2)}/2 sum_{S(d)} chi(F/c), the chi_c sum over
// the generator space L'(d1 + 2 d2), and its Mobius-inverted form.
inline GeneratorCountSides generator_count_sides(const BaseField& K, KeySums& S, const Divisor& c, const Divisor& d) {
  const Field& F = K.field();
  auto [d1, d2] = squarefree_split(d);
  Divisor A = d1 + 2 * d2;
  GeneratorCountSides r;
  r.lhs = checked_pow(F.q(), d2.degree() + 1) / 2 * S(c, d);
  ChiModulus chi(F, c);
  RRSpace L(F, A);
  rr_enumerate(L, [&](std::uint64_t, const RationalFunction& w) {
    if (w.is_zero()) return;
    for (auto& [v, e] : A.terms())
      if (w.ord(v) != -e) return;
    r.generators += chi(w);
  });
  for_each_subdivisor(d1, [&](const Divisor& a) {
    long long inner = 0;
    RRSpace La(F, A - a);
    rr_enumerate(La, [&](std::uint64_t, const RationalFunction& w) { inner += chi(w); });
    r.mobius += mobius(a) * inner;
  });
  return r;
}

inline int floor_half(int n) { return n >= 0 ? n / 2 : -((-n + 1) / 2); }

// Identity suite. Odd q: the generator-sum identity for the family character
// sums.  Even q: the generator count identity, vanishing under 2 d2 not <=
// c_chi, the telescoping sums along v0 and their unrolled form.
inline IdentityReport identity_suite(const BaseField& K, int m, int threads = 1, const std::string& cache_dir = "") {
  const Field& F = K.field();
  IdentityReport rep;
  if (K.odd()) {
    auto fam = load_family(K, m, threads, cache_dir);
    struct Job {
      Divisor c;
      Place v0;
    };
    std::vector<Job> jobs;
    int cmax = std::min(m + 1, 2);
    for (auto& c : detail::effective_up_to(K, cmax)) {
      for (auto& v0 : places_up_to(F, 3)) {
        if (v0.degree() == 2 || c.contains(v0)) continue;
        if (v0.degree() == 3 && (c.degree() > 1 || v0 != places_of_degree(F, 3).front())) continue;
        if (v0.degree() == 1 && !v0.is_infinity() && c.degree() > 1) continue;
        jobs.push_back({c, v0});
      }
    }
    auto res = parallel_map(jobs.size(), threads, [&](std::size_t i) { return generator_sum_sides(K, *fam, jobs[i].c, jobs[i].v0); });
    for (std::size_t i = 0; i < jobs.size(); ++i)
      rep.record("generator_sum", res[i].first == res[i].second,
                 "c=" + jobs[i].c.to_string() + " v0=" + jobs[i].v0.to_string() + " m=" + std::to_string(m) + " lhs=" +
                     std::to_string(res[i].first) + " rhs=" + std::to_string(res[i].second));
    return rep;
  }

  // even q
  KeySums S(K);
  auto ds = detail::effective_up_to(K, m + 1);
  auto cs = detail::effective_up_to(K, 3);
  for (auto& c : cs) {
    if (c.is_zero() || c.is_even()) continue;
    KernelDivisor kd = kernel_divisor_even(K, c);
    ChiModulus chi(F, c);
    std::map<Place, int> nv;
    for (auto& [v, n] : kd.n_v) nv[v] = n;
    auto n_of = [&](const Place& v) {
      auto it = nv.find(v);
      if (it != nv.end()) return it->second;
      int n = c.contains(v) ? 0 : kernel_order(chi, v);
      nv[v] = n;
      return n;
    };
    long long sign_c = c.degree() % 2 == 0 ? 1 : -1;
    for (auto& d : ds) {
      if (!d.disjoint(c)) continue;
      std::string wit = "c=" + c.to_string() + " d=" + d.to_string();
      if (!d.is_zero()) {
        auto gc = generator_count_sides(K, S, c, d);
        rep.record("generator_count", gc.lhs == gc.generators && gc.generators == gc.mobius,
                   wit + " lhs=" + std::to_string(gc.lhs) + " gen=" + std::to_string(gc.generators) + " mob=" + std::to_string(gc.mobius));
        auto [d1, d2] = squarefree_split(d);
        if (kd.has_c_chi && !leq(2 * d2, kd.c_chi)) rep.record("kernel_vanishing", S(c, d) == 0, wit);
      }
      // telescoping along v0
      for (auto& v0 : places_up_to(F, 2)) {
        if (c.contains(v0) || d.contains(v0)) continue;
        int N = floor_half(n_of(v0)) + 1;
        long long sum = 0;
        for (int i = d.is_zero() ? 1 : 0; i <= N; ++i) sum += S(c, d + i * Divisor::of(v0));
        long long expect = d.is_zero() ? -1 - sign_c : 0;
        rep.record("telescoping", sum == expect, wit + " v0=" + v0.to_string() + " sum=" + std::to_string(sum));
      }
      // unrolled telescoping over the multiplicity-one places of d
      std::vector<Place> ones;
      std::vector<Divisor::Term> rest;
      for (auto& [v, e] : d.terms()) {
        if (e == 1)
          ones.push_back(v);
        else
          rest.emplace_back(v, e);
      }
      if (ones.empty()) continue;
      Divisor dp = Divisor::from_terms(rest);
      int mm = int(ones.size());
      long long sgn_m = mm % 2 == 0 ? 1 : -1;
      long long rhs = dp.is_zero() ? sgn_m * (1 + sign_c) : sgn_m * S(c, dp);
      Divisor prefix = dp;
      for (int i = 1; i <= mm; ++i) {
        const Place& vi = ones[std::size_t(i - 1)];
        long long sg = (mm - i - 1) % 2 == 0 ? 1 : -1;
        int N = floor_half(n_of(vi)) + 1;
        for (int j = 2; j <= N; ++j) rhs += sg * S(c, prefix + j * Divisor::of(vi));
        prefix += Divisor::of(vi);
      }
      rep.record("unrolled_telescoping", S(c, d) == rhs, wit + " lhs=" + std::to_string(S(c, d)) + " rhs=" + std::to_string(rhs));
    }
  }
  return rep;
}

}  // namespace qff
