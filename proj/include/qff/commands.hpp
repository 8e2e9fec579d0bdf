#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qff/characters.hpp"
#include "qff/lfunc.hpp"
#include "qff/moments.hpp"
#include "qff/quad_ext.hpp"

namespace qff {

struct RunConfig {
  std::string command;
  int q = 0, p = 0, r = 1;
  int m = 1, m_max = -1;
  std::string kind;
  std::string s = "2", t = "2";
  double epsilon = 0.01;
  double tol = 1e-12;
  std::uint64_t cap = kDefaultEnumerationCap;
  int threads = 1;
  std::string format = "csv";
  std::string out;
  std::string cache_dir;
};

inline const Field& config_field(const RunConfig& cfg) {
  if (cfg.q > 0) return field_of_order(cfg.q);
  if (cfg.p > 0) return field_create(cfg.p, cfg.r);
  fail(Errc::BadConfig, "one of --q or --p is required");
}

inline void check_config(const RunConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json") fail(Errc::BadConfig, "format must be csv or json");
  if (cfg.threads < 1) fail(Errc::BadConfig, "threads must be >= 1");
  if (cfg.m < 0) fail(Errc::BadConfig, "m must be >= 0");
  if (cfg.m_max >= 0 && cfg.m_max < cfg.m) fail(Errc::BadConfig, "m-max must be >= m");
  if (!(cfg.epsilon > 0)) fail(Errc::BadConfig, "epsilon must be > 0");
  if (!(cfg.tol > 0)) fail(Errc::BadConfig, "tol must be > 0");
}

// ------------------------------------------------------------ tables

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<nlohmann::ordered_json>> rows;

  void add(std::vector<nlohmann::ordered_json> row) { rows.push_back(std::move(row)); }

  static std::string csv_cell(const nlohmann::ordered_json& v) {
    std::string s;
    if (v.is_string())
      s = v.get<std::string>();
    else if (v.is_number_float())
      s = format_double(v.get<double>());
    else if (v.is_boolean())
      s = v.get<bool>() ? "true" : "false";
    else
      s = v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  void write(std::ostream& os, const std::string& format) const {
    if (format == "json") {
      auto arr = nlohmann::ordered_json::array();
      for (auto& row : rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < cols.size(); ++i) obj[cols[i]] = row[i];
        arr.push_back(std::move(obj));
      }
      os << arr.dump(1) << '\n';
      return;
    }
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << '\n';
    }
  }
};

// -------------------------------------------------------- enumerate

inline int cmd_enumerate(const RunConfig& cfg, std::ostream* records, std::ostream& log) {
  check_config(cfg);
  BaseField K(config_field(cfg));
  auto fam = enumerate_family(K, cfg.m, cfg.threads, cfg.cap);
  if (records) {
    Table t{{"char", "omega", "disc", "genus"}, {}};
    for (auto& E : fam) t.add({K.odd() ? "odd" : "even", E.omega.to_string(), E.disc.to_string(), E.genus});
    t.write(*records, cfg.format);
  }
  log << "count=" << fam.size() << '\n';
  return 0;
}

// ------------------------------------------------------------ lpoly

inline int cmd_lpoly(const RunConfig& cfg, std::ostream& os) {
  check_config(cfg);
  BaseField K(config_field(cfg));
  auto fam = load_family(K, cfg.m, cfg.threads, cfg.cache_dir);
  auto dev = parallel_map(fam->lpolys.size(), cfg.threads, [&](std::size_t i) { return rh_check(fam->lpolys[i]); });
  Table t{{"index", "omega", "disc", "genus", "coeffs", "rh_dev"}, {}};
  for (std::size_t i = 0; i < fam->members.size(); ++i) {
    std::string cs;
    for (std::size_t k = 0; k < fam->lpolys[i].coeffs.size(); ++k) cs += (k ? " " : "") + std::to_string(fam->lpolys[i].coeffs[k]);
    t.add({i, fam->members[i].omega.to_string(), fam->members[i].disc.to_string(), fam->members[i].genus, cs, dev[i]});
  }
  t.write(os, cfg.format);
  return 0;
}

// ----------------------------------------------------------- moment

inline Table moment_table(const std::vector<MomentReport>& rows) {
  Table t{{"kind", "q", "m", "s", "t", "lhs_re", "lhs_im", "main_re", "main_im", "abs_err", "bound", "C", "pass"}, {}};
  for (auto& r : rows)
    t.add({kind_name(r.kind), r.q, r.m, format_complex(r.s), format_complex(r.t), r.lhs.real(), r.lhs.imag(), r.main.real(),
           r.main.imag(), r.abs_err, r.bound, r.C, r.pass});
  return t;
}

inline int cmd_moment(const RunConfig& cfg, std::ostream& os) {
  check_config(cfg);
  BaseField K(config_field(cfg));
  MomentKind kind = parse_kind(cfg.kind.empty() ? "LL" : cfg.kind);
  cplx s = parse_complex(cfg.s), t = parse_complex(cfg.t);
  check_region(kind, K, s, t, cfg.epsilon);
  int hi = cfg.m_max >= 0 ? cfg.m_max : cfg.m;
  auto rows = moment_sweep(kind, K, cfg.m, hi, s, t, cfg.epsilon, cfg.threads, cfg.cache_dir);
  moment_table(rows).write(os, cfg.format);
  for (auto& r : rows)
    if (!r.pass) return 1;
  return 0;
}

// ------------------------------------------------------------ sigma

inline int cmd_sigma(const RunConfig& cfg, std::ostream& os) {
  check_config(cfg);
  BaseField K(config_field(cfg));
  cplx s = parse_complex(cfg.s), t = parse_complex(cfg.t);
  std::vector<SigmaKind> kinds;
  if (cfg.kind.empty() || cfg.kind == "all")
    kinds = {SigmaKind::S1, SigmaKind::S2, SigmaKind::S3, SigmaKind::Cor1};
  else
    kinds = {parse_sigma(cfg.kind)};
  Table tb{{"kind", "q", "s", "t", "cutoff", "value_re", "value_im", "tail_bound"}, {}};
  for (auto k : kinds) {
    auto r = sigma_product(k, K, s, t, cfg.tol);
    tb.add({sigma_name(k), K.q(), format_complex(s), format_complex(t), r.cutoff, r.value.real(), r.value.imag(), r.tail_bound});
  }
  tb.write(os, cfg.format);
  return 0;
}

// ---------------------------------------------------------- charsum

struct CharSumRow {
  Divisor c, d;
  std::string character;
  Place v0;
  int n = 0;
  cplx sum;
  bool exact_zero = false;
  bool vanishing = false;  // n deg v0 >= deg c + deg d - 1
  double bound_trivial = 0, bound_pv = 0, ratio = 0;
};

struct CharSumSweep {
  std::vector<CharSumRow> rows;
  long long vanishing_failures = 0;
  double max_ratio = 0;
};

// Incomplete character sums over theta_c(L(n v0 - d)) for finite c of degree
// 1..max_deg, v0 of degree <= 2, d in {0, one degree-1 place}, n from 0 to one
// past the vanishing threshold. Characters: all exponents 1 (square-free c),
// the quadratic character (odd q) and one imprimitive character (c with two or
// more places).
inline CharSumSweep incomplete_sum_sweep(const BaseField& K, int max_deg = 4, int threads = 1) {
  const Field& F = K.field();
  double q = K.q();
  struct Ctx {
    Divisor c;
    std::unique_ptr<QuotientRing> R;
    std::vector<std::pair<std::string, MultChar>> chars;
  };
  std::vector<Ctx> ctxs;
  for (int deg = 1; deg <= max_deg; ++deg) {
    for (auto& c : enumerate_effective(K, deg)) {
      if (c.contains(K.infinity())) continue;
      bool sqfree = c.is_squarefree();
      if (!sqfree && !K.odd()) continue;
      Ctx x;
      x.c = c;
      x.R = std::make_unique<QuotientRing>(F, c);
      if (sqfree) {
        std::size_t np = c.terms().size();
        auto ones = MultChar::from_exponents(*x.R, std::vector<long long>(np, 1));
        if (!ones.principal()) x.chars.emplace_back("ones", std::move(ones));
        if (np >= 2) {
          std::vector<long long> a(np, 0);
          a[0] = 1;
          auto imp = MultChar::from_exponents(*x.R, a);
          if (!imp.principal()) x.chars.emplace_back("imprimitive", std::move(imp));
        }
      }
      if (K.odd()) {
        auto quad = MultChar::quadratic(*x.R);
        if (!quad.principal()) x.chars.emplace_back("quadratic", std::move(quad));
      }
      ctxs.push_back(std::move(x));
    }
  }
  struct Job {
    std::size_t ctx, chr;
    Place v0;
    Divisor d;
    int n;
  };
  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < ctxs.size(); ++ci) {
    const Divisor& c = ctxs[ci].c;
    for (auto& v0 : places_up_to(F, 2)) {
      if (c.contains(v0)) continue;
      std::vector<Divisor> ds{Divisor()};
      for (auto& w : places_of_degree(F, 1))
        if (!c.contains(w) && w != v0) {
          ds.push_back(Divisor::of(w));
          break;
        }
      for (auto& d : ds) {
        int thresh = int(c.degree() + d.degree()) - 1;
        int n_hi = (std::max(thresh, 0) + v0.degree() - 1) / v0.degree() + 1;
        for (std::size_t h = 0; h < ctxs[ci].chars.size(); ++h)
          for (int n = 0; n <= n_hi; ++n) jobs.push_back({ci, h, v0, d, n});
      }
    }
  }
  auto sums = parallel_map(jobs.size(), threads, [&](std::size_t i) {
    auto& j = jobs[i];
    return incomplete_sum(ctxs[j.ctx].chars[j.chr].second, j.n, j.v0, j.d);
  });
  CharSumSweep out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& j = jobs[i];
    CharSumRow r;
    r.c = ctxs[j.ctx].c;
    r.d = j.d;
    r.character = ctxs[j.ctx].chars[j.chr].first;
    r.v0 = j.v0;
    r.n = j.n;
    r.sum = sums[i].value;
    r.exact_zero = sums[i].exact_zero;
    long long nd = (long long)j.n * j.v0.degree();
    r.vanishing = nd >= r.c.degree() + r.d.degree() - 1;
    r.bound_trivial = std::pow(q, double(nd - r.d.degree()));
    r.bound_pv = std::pow(q, r.c.degree() / 2.0 + j.v0.degree());
    r.ratio = r.exact_zero ? 0.0 : std::abs(r.sum) / std::min(r.bound_trivial, r.bound_pv);
    if (r.vanishing && !r.exact_zero) ++out.vanishing_failures;
    out.max_ratio = std::max(out.max_ratio, r.ratio);
    out.rows.push_back(std::move(r));
  }
  return out;
}

inline Table charsum_table(const BaseField& K, const CharSumSweep& sw) {
  Table t{{"q", "c", "char", "d", "v0", "n", "sum_re", "sum_im", "bound_trivial", "bound_pv", "ratio"}, {}};
  for (auto& r : sw.rows) {
    double re = r.exact_zero ? 0.0 : r.sum.real(), im = r.exact_zero ? 0.0 : r.sum.imag();
    t.add({K.q(), r.c.to_string(), r.character, r.d.to_string(), r.v0.to_string(), r.n, re, im, r.bound_trivial, r.bound_pv, r.ratio});
  }
  return t;
}

// Failure threshold for the sweep-max constant.
constexpr double kCharSumFailRatio = 16.0;

inline int cmd_charsum(const RunConfig& cfg, std::ostream& os, std::ostream& log) {
  check_config(cfg);
  BaseField K(config_field(cfg));
  auto sw = incomplete_sum_sweep(K, 4, cfg.threads);
  charsum_table(K, sw).write(os, cfg.format);
  log << "rows=" << sw.rows.size() << " vanishing_failures=" << sw.vanishing_failures << " max_C=" << format_double(sw.max_ratio) << '\n';
  return sw.vanishing_failures == 0 && sw.max_ratio <= kCharSumFailRatio ? 0 : 1;
}

// ----------------------------------------------------------- verify

// Invariant checks on the genus-m family, recorded into the report.
inline void invariant_suite(const BaseField& K, int m, IdentityReport& rep, int threads = 1, const std::string& cache_dir = "") {
  auto fam = load_family(K, m, threads, cache_dir);
  long long q = K.q();
  long long expect = 0;
  if (K.odd()) {
    expect = 2 * (checked_pow(q, 2 * m + 2) - checked_pow(q, 2 * m));
  } else {
    for (auto& d : enumerate_effective(K, m + 1)) expect += 2 * phi(d, int(q));
  }
  rep.record("family_count", (long long)fam->members.size() == expect,
             "m=" + std::to_string(m) + " got=" + std::to_string(fam->members.size()) + " expected=" + std::to_string(expect));

  auto dev = parallel_map(fam->lpolys.size(), threads, [&](std::size_t i) { return rh_check(fam->lpolys[i]); });
  for (std::size_t i = 0; i < dev.size(); ++i)
    rep.record("riemann_hypothesis", dev[i] < 1e-9, fam->members[i].omega.to_string() + " dev=" + format_double(dev[i]));

  // L* times its Mobius series is 1, up to degree 10
  std::size_t step = std::max<std::size_t>(1, fam->members.size() / 100);
  for (std::size_t i = 0; i < fam->members.size(); i += step) {
    auto b = lstar_inverse_series(fam->members[i], 10);
    auto& c = fam->lpolys[i].coeffs;
    bool ok = true;
    for (int n = 0; n <= 10 && ok; ++n) {
      long long acc = 0;
      for (int k = 0; k <= n; ++k)
        if (k < int(c.size())) acc += c[std::size_t(k)] * b[std::size_t(n - k)];
      ok = acc == (n == 0 ? 1 : 0);
    }
    rep.record("inverse_series", ok, fam->members[i].omega.to_string());
  }

  for (int deg = 1; deg <= 3; deg += 2)
    for (auto& c : enumerate_effective(K, deg)) {
      long long s = family_char_sum(*fam, c, threads);
      rep.record("odd_degree_vanishing", s == 0, "c=" + c.to_string() + " sum=" + std::to_string(s));
    }
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& os) {
  check_config(cfg);
  BaseField K(config_field(cfg));
  IdentityReport rep;
  invariant_suite(K, cfg.m, rep, cfg.threads, cfg.cache_dir);
  auto ids = identity_suite(K, cfg.m, cfg.threads, cfg.cache_dir);
  for (auto& [k, v] : ids.checked) rep.checked[k] += v;
  for (auto& f : ids.failures) rep.failures.push_back(f);
  for (auto& [name, n] : rep.checked) {
    long long bad = 0;
    for (auto& f : rep.failures)
      if (f.identity == name) ++bad;
    os << "check=" << name << " checked=" << n << " failures=" << bad << " status=" << (bad ? "FAIL" : "PASS") << '\n';
  }
  std::size_t shown = 0;
  for (auto& f : rep.failures) {
    if (shown++ == 20) break;
    os << "witness " << f.identity << ": " << f.witness << '\n';
  }
  os << (rep.ok() ? "verify=PASS" : "verify=FAIL") << '\n';
  return rep.ok() ? 0 : 1;
}

}  // namespace qff
