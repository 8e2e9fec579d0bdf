#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qff/error.hpp"
#include "qff/field.hpp"

namespace qff {

// Dense polynomial over F_q, coefficients low to high, no trailing zeros.
class Poly {
 public:
  Poly() = default;
  explicit Poly(const Field& F) : F_(&F) {}
  Poly(const Field& F, std::vector<Elem> c) : F_(&F), c_(std::move(c)) { trim(); }

  static Poly constant(const Field& F, Elem a) { return Poly(F, std::vector<Elem>{a}); }
  static Poly one(const Field& F) { return constant(F, 1); }
  static Poly monomial(const Field& F, int k, Elem a = 1) {
    std::vector<Elem> c(std::size_t(k + 1), 0);
    c[std::size_t(k)] = a;
    return Poly(F, std::move(c));
  }
  static Poly x(const Field& F) { return monomial(F, 1); }
  // Coefficient vector read as a base-q integer, constant term least significant.
  static Poly from_index(const Field& F, std::uint64_t idx) {
    std::vector<Elem> c;
    while (idx > 0) {
      c.push_back(Elem(idx % std::uint64_t(F.q())));
      idx /= std::uint64_t(F.q());
    }
    return Poly(F, std::move(c));
  }
  // Monic polynomial of degree d whose lower d coefficients encode idx.
  static Poly monic_from_index(const Field& F, int d, std::uint64_t idx) {
    std::vector<Elem> c(std::size_t(d + 1), 0);
    for (int i = 0; i < d; ++i) {
      c[std::size_t(i)] = Elem(idx % std::uint64_t(F.q()));
      idx /= std::uint64_t(F.q());
    }
    c[std::size_t(d)] = 1;
    return Poly(F, std::move(c));
  }

  std::uint64_t index() const {
    std::uint64_t v = 0;
    for (int i = degree(); i >= 0; --i) v = v * std::uint64_t(F_->q()) + c_[std::size_t(i)];
    return v;
  }

  const Field& field() const { return *F_; }
  const Field* field_ptr() const { return F_; }
  int degree() const { return int(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_one() const { return c_.size() == 1 && c_[0] == 1; }
  Elem coeff(int i) const { return (i >= 0 && i < int(c_.size())) ? c_[std::size_t(i)] : Elem(0); }
  Elem lead() const { return c_.empty() ? Elem(0) : c_.back(); }
  const std::vector<Elem>& coeffs() const { return c_; }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }

  Poly scaled(Elem a) const {
    if (a == 0) return Poly(*F_);
    std::vector<Elem> c(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) c[i] = F_->mul(c_[i], a);
    return Poly(*F_, std::move(c));
  }
  Poly monic() const {
    if (c_.empty()) fail(Errc::ZeroPolynomial, "monic() of zero");
    return is_monic() ? *this : scaled(F_->inv(lead()));
  }
  Poly derivative() const {
    if (c_.size() <= 1) return Poly(*F_);
    std::vector<Elem> c(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) c[i - 1] = F_->mul(c_[i], F_->from_int((long long)i));
    return Poly(*F_, std::move(c));
  }
  Poly shifted(int k) const {
    if (c_.empty()) return *this;
    std::vector<Elem> c(std::size_t(k), 0);
    c.insert(c.end(), c_.begin(), c_.end());
    return Poly(*F_, std::move(c));
  }
  Elem eval(Elem x) const {
    Elem v = 0;
    for (int i = degree(); i >= 0; --i) v = F_->add(F_->mul(v, x), c_[std::size_t(i)]);
    return v;
  }

  Poly& operator+=(const Poly& o) {
    if (!F_) F_ = o.F_;
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0);
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] = F_->add(c_[i], o.c_[i]);
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (!F_) F_ = o.F_;
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0);
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] = F_->sub(c_[i], o.c_[i]);
    trim();
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(const Poly& a) { return Poly(*a.F_) - a; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    const Field* F = a.F_ ? a.F_ : b.F_;
    if (a.c_.empty() || b.c_.empty()) return Poly(*F);
    std::vector<Elem> c(a.c_.size() + b.c_.size() - 1, 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      Elem ai = a.c_[i];
      if (ai == 0) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = F->add(c[i + j], F->mul(ai, b.c_[j]));
    }
    return Poly(*F, std::move(c));
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }
  // Canonical order: degree first, then the coefficient vector as a base-q integer.
  friend bool operator<(const Poly& a, const Poly& b) {
    if (a.c_.size() != b.c_.size()) return a.c_.size() < b.c_.size();
    for (std::size_t i = a.c_.size(); i-- > 0;)
      if (a.c_[i] != b.c_[i]) return a.c_[i] < b.c_[i];
    return false;
  }

  // "x^2+2*x+1"; coefficients are printed as element indices.
  std::string to_string() const {
    if (c_.empty()) return "0";
    std::string s;
    for (int k = degree(); k >= 0; --k) {
      Elem c = c_[std::size_t(k)];
      if (c == 0) continue;
      if (!s.empty()) s += "+";
      if (k == 0) {
        s += std::to_string(c);
        continue;
      }
      if (c != 1) s += std::to_string(c) + "*";
      s += (k == 1) ? "x" : "x^" + std::to_string(k);
    }
    return s;
  }

  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

 private:
  const Field* F_ = nullptr;
  std::vector<Elem> c_;
};

inline Poly parse_poly(const Field& F, const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s += ch;
  if (s == "0") return Poly(F);
  if (s.empty()) fail(Errc::ParseError, "empty polynomial");
  std::vector<Elem> c;
  std::size_t pos = 0;
  auto read_int = [&](std::size_t& i) -> long long {
    std::size_t st = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (st == i) fail(Errc::ParseError, "expected integer in '" + text + "'");
    return std::stoll(s.substr(st, i - st));
  };
  bool negate = false;
  if (s[0] == '-') {
    negate = true;
    ++pos;
  }
  while (pos < s.size()) {
    long long coef = 1;
    bool have_coef = false;
    if (std::isdigit(static_cast<unsigned char>(s[pos]))) {
      coef = read_int(pos);
      have_coef = true;
      if (pos < s.size() && s[pos] == '*') ++pos;
    }
    int k = 0;
    if (pos < s.size() && s[pos] == 'x') {
      ++pos;
      k = 1;
      if (pos < s.size() && s[pos] == '^') {
        ++pos;
        k = int(read_int(pos));
      }
    } else if (!have_coef) {
      fail(Errc::ParseError, "bad term in '" + text + "'");
    }
    if (coef < 0 || coef >= F.q()) fail(Errc::ParseError, "coefficient out of range in '" + text + "'");
    if (int(c.size()) <= k) c.resize(std::size_t(k + 1), 0);
    Elem term = negate ? F.neg(Elem(coef)) : Elem(coef);
    c[std::size_t(k)] = F.add(c[std::size_t(k)], term);
    if (pos < s.size()) {
      if (s[pos] != '+' && s[pos] != '-') fail(Errc::ParseError, "expected '+' or '-' in '" + text + "'");
      negate = s[pos] == '-';
      ++pos;
      if (pos == s.size()) fail(Errc::ParseError, "trailing sign in '" + text + "'");
    }
  }
  return Poly(F, std::move(c));
}

inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) fail(Errc::DivisionByZero, "polynomial division by zero");
  const Field& F = b.field();
  int db = b.degree();
  if (a.degree() < db) return {Poly(F), a};
  std::vector<Elem> r = a.coeffs();
  std::vector<Elem> qt(std::size_t(a.degree() - db + 1), 0);
  Elem inv = F.inv(b.lead());
  const auto& bc = b.coeffs();
  for (int k = a.degree(); k >= db; --k) {
    Elem c = r[std::size_t(k)];
    if (c == 0) continue;
    Elem t = F.mul(c, inv);
    qt[std::size_t(k - db)] = t;
    for (int i = 0; i <= db; ++i) {
      Elem& x = r[std::size_t(k - db + i)];
      x = F.sub(x, F.mul(t, bc[std::size_t(i)]));
    }
  }
  r.resize(std::size_t(db));
  return {Poly(F, std::move(qt)), Poly(F, std::move(r))};
}

inline Poly operator%(const Poly& a, const Poly& b) {
  if (b.is_zero()) fail(Errc::DivisionByZero, "polynomial reduction mod zero");
  if (a.degree() < b.degree()) return a;
  const Field& F = b.field();
  int db = b.degree();
  std::vector<Elem> r = a.coeffs();
  Elem inv = F.inv(b.lead());
  const auto& bc = b.coeffs();
  for (int k = a.degree(); k >= db; --k) {
    Elem c = r[std::size_t(k)];
    if (c == 0) continue;
    Elem t = F.mul(c, inv);
    for (int i = 0; i <= db; ++i) {
      Elem& x = r[std::size_t(k - db + i)];
      x = F.sub(x, F.mul(t, bc[std::size_t(i)]));
    }
  }
  r.resize(std::size_t(db));
  return Poly(F, std::move(r));
}
inline Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }

// Monic gcd; gcd(0, 0) = 0.
inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a.is_zero() ? a : a.monic();
}

// Returns g = gcd(a, b) (monic) with s*a + t*b = g.
inline Poly xgcd(const Poly& a, const Poly& b, Poly& s, Poly& t) {
  const Field& F = a.field_ptr() ? a.field() : b.field();
  Poly r0 = a, r1 = b, s0 = Poly::one(F), s1(F), t0(F), t1 = Poly::one(F);
  while (!r1.is_zero()) {
    auto [qt, r2] = divmod(r0, r1);
    Poly s2 = s0 - qt * s1, t2 = t0 - qt * t1;
    r0 = std::move(r1);
    r1 = std::move(r2);
    s0 = std::move(s1);
    s1 = std::move(s2);
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  if (r0.is_zero()) {
    s = s0;
    t = t0;
    return r0;
  }
  Elem li = F.inv(r0.lead());
  s = s0.scaled(li);
  t = t0.scaled(li);
  return r0.scaled(li);
}

inline Poly inverse_mod(const Poly& a, const Poly& m) {
  Poly s, t;
  Poly g = xgcd(a % m, m, s, t);
  if (!g.is_one()) fail(Errc::DivisionByZero, "not invertible modulo " + m.to_string());
  return s % m;
}

inline Poly mulmod(const Poly& a, const Poly& b, const Poly& m) { return (a * b) % m; }

inline Poly powmod(Poly base, std::uint64_t e, const Poly& m) {
  Poly result = Poly::one(m.field()) % m;
  base = base % m;
  while (e > 0) {
    if (e & 1) result = mulmod(result, base, m);
    e >>= 1;
    if (e) base = mulmod(base, base, m);
  }
  return result;
}

inline Poly pow(const Poly& a, int e) {
  Poly result = Poly::one(a.field());
  for (int i = 0; i < e; ++i) result *= a;
  return result;
}

// a^{q^k} mod m.
inline Poly frobenius_powmod(Poly a, int k, const Poly& m) {
  for (int i = 0; i < k; ++i) a = powmod(a, std::uint64_t(a.field().q()), m);
  return a % m;
}

namespace detail {

// p-th root of a polynomial all of whose exponents are multiples of p.
inline Poly pth_root(const Poly& f) {
  const Field& F = f.field();
  int p = F.p();
  std::vector<Elem> c(std::size_t(f.degree() / p + 1), 0);
  for (int i = 0; i <= f.degree(); i += p) c[std::size_t(i / p)] = F.pow(f.coeff(i), std::uint64_t(F.q() / p));
  return Poly(F, std::move(c));
}

inline void squarefree_rec(const Poly& f, int mult, std::vector<std::pair<Poly, int>>& out) {
  if (f.degree() <= 0) return;
  const Field& F = f.field();
  Poly d = f.derivative();
  if (d.is_zero()) {
    squarefree_rec(pth_root(f), mult * F.p(), out);
    return;
  }
  Poly c = gcd(f, d);
  Poly w = f / c;
  int i = 1;
  while (w.degree() > 0) {
    Poly y = gcd(w, c);
    Poly z = w / y;
    if (z.degree() > 0) out.emplace_back(z.monic(), i * mult);
    ++i;
    w = y;
    c = c / y;
  }
  if (c.degree() > 0) squarefree_rec(pth_root(c.monic()), mult * F.p(), out);
}

// Deterministic equal-degree splitting of a squarefree monic f whose
// irreducible factors all have degree d.
inline void equal_degree_split(const Poly& f, int d, std::vector<Poly>& out) {
  if (f.degree() <= d) {
    if (f.degree() > 0) out.push_back(f);
    return;
  }
  const Field& F = f.field();
  const std::uint64_t q = std::uint64_t(F.q());
  for (std::uint64_t seed = q;; ++seed) {
    Poly a = Poly::from_index(F, seed) % f;
    if (a.degree() <= 0) continue;
    Poly g;
    if (F.p() == 2) {
      Poly t = a, s = a;
      for (int i = 1; i < F.r() * d; ++i) {
        t = mulmod(t, t, f);
        s += t;
      }
      g = gcd(s, f);
    } else {
      Poly norm = a, t = a;
      for (int i = 1; i < d; ++i) {
        t = powmod(t, q, f);
        norm = mulmod(norm, t, f);
      }
      Poly b = powmod(norm, (q - 1) / 2, f);
      g = gcd(b - Poly::one(F), f);
    }
    if (g.degree() > 0 && g.degree() < f.degree()) {
      equal_degree_split(g, d, out);
      equal_degree_split(f / g, d, out);
      return;
    }
  }
}

// Distinct-degree factorization of a squarefree monic f.
inline std::vector<std::pair<Poly, int>> distinct_degree(Poly f) {
  std::vector<std::pair<Poly, int>> out;
  const Field& F = f.field();
  Poly x = Poly::x(F);
  Poly h = x % f;
  for (int i = 1; 2 * i <= f.degree(); ++i) {
    h = powmod(h, std::uint64_t(F.q()), f);
    Poly g = gcd(h - x, f);
    if (g.degree() > 0) {
      out.emplace_back(g, i);
      f = f / g;
      h = h % f;
    }
  }
  if (f.degree() > 0) out.emplace_back(f.monic(), f.degree());
  return out;
}

}  // namespace detail

struct Factorization {
  Elem unit = 1;
  std::vector<std::pair<Poly, int>> factors;  // monic irreducibles, canonical order
};

inline Factorization factor(const Poly& f) {
  if (f.is_zero()) fail(Errc::ZeroPolynomial, "factor of the zero polynomial");
  Factorization out;
  out.unit = f.lead();
  std::vector<std::pair<Poly, int>> sqf;
  detail::squarefree_rec(f.monic(), 1, sqf);
  for (auto& [g, mult] : sqf) {
    for (auto& [h, d] : detail::distinct_degree(g)) {
      std::vector<Poly> parts;
      detail::equal_degree_split(h, d, parts);
      for (auto& p : parts) out.factors.emplace_back(p.monic(), mult);
    }
  }
  std::sort(out.factors.begin(), out.factors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Merge equal factors coming from different square-free layers (cannot
  // happen for exact input, kept for safety).
  std::vector<std::pair<Poly, int>> merged;
  for (auto& fm : out.factors) {
    if (!merged.empty() && merged.back().first == fm.first)
      merged.back().second += fm.second;
    else
      merged.push_back(fm);
  }
  out.factors = std::move(merged);
  return out;
}

inline bool is_squarefree(const Poly& f) {
  if (f.is_zero()) return false;
  if (f.degree() <= 0) return true;
  Poly d = f.derivative();
  if (d.is_zero()) return false;
  return gcd(f, d).degree() == 0;
}

// Rabin's test.
inline bool is_irreducible(const Poly& f) {
  int n = f.degree();
  if (n <= 0) return false;
  if (n == 1) return true;
  const Field& F = f.field();
  Poly m = f.monic();
  Poly x = Poly::x(F);
  std::vector<int> primes;
  for (int t = n, d = 2; t > 1; ++d) {
    if (t % d == 0) {
      primes.push_back(d);
      while (t % d == 0) t /= d;
    }
  }
  std::vector<Poly> frob(std::size_t(n + 1));
  frob[0] = x % m;
  for (int k = 1; k <= n; ++k) frob[std::size_t(k)] = powmod(frob[std::size_t(k - 1)], std::uint64_t(F.q()), m);
  if (frob[std::size_t(n)] != x % m) return false;
  for (int l : primes)
    if (gcd(frob[std::size_t(n / l)] - x, m).degree() != 0) return false;
  return true;
}

inline std::vector<Poly> monic_irreducibles(const Field& F, int d) {
  std::vector<Poly> out;
  std::uint64_t count = 1;
  for (int i = 0; i < d; ++i) count *= std::uint64_t(F.q());
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    Poly f = Poly::monic_from_index(F, d, idx);
    if (is_irreducible(f)) out.push_back(std::move(f));
  }
  return out;
}

// Jacobi symbol (a / b) for odd q, b monic, via reciprocity in F_q[x]:
// (a/b) = (-1)^{(q-1)/2 deg a deg b} (b/a) for monic coprime a, b and
// (c/b) = chi(c)^{deg b} for constants c.
inline int jacobi_symbol(Poly a, Poly b) {
  const Field& F = b.field();
  if (F.p() == 2) fail(Errc::EvenCharacteristic, "Jacobi symbol needs odd characteristic");
  if (!b.is_monic()) fail(Errc::ParseError, "Jacobi symbol modulus must be monic");
  const bool half_odd = ((F.q() - 1) / 2) % 2 == 1;
  int result = 1;
  while (true) {
    if (b.degree() == 0) return result;
    a = a % b;
    if (a.is_zero()) return 0;
    Elem c = a.lead();
    if (b.degree() % 2 == 1 && residue_symbol(F, c) == -1) result = -result;
    a = a.monic();
    if (a.degree() == 0) return result;
    if (half_odd && a.degree() % 2 == 1 && b.degree() % 2 == 1) result = -result;
    std::swap(a, b);
  }
}

// Residue symbol of a mod P in F_q[x]/(P) by Euler's criterion; P monic irreducible.
inline int residue_symbol_mod(const Poly& a, const Poly& P) {
  const Field& F = P.field();
  if (F.p() == 2) fail(Errc::EvenCharacteristic, "residue symbol needs odd characteristic");
  Poly r = a % P;
  if (r.is_zero()) return 0;
  // a^{(Q-1)/2} = N(a)^{(q-1)/2} with N(a) = a^{1+q+...+q^{d-1}} in F_q.
  Poly norm = r, t = r;
  for (int i = 1; i < P.degree(); ++i) {
    t = powmod(t, std::uint64_t(F.q()), P);
    norm = mulmod(norm, t, P);
  }
  if (norm.degree() != 0) fail(Errc::ZeroPolynomial, "norm not constant: modulus not irreducible");
  return residue_symbol(F, norm.coeff(0));
}

// Absolute trace to F_p of a mod P, computed by repeated p-th powers in
// F_q[x]/(P); P monic irreducible.
inline int trace_mod(const Poly& a, const Poly& P) {
  const Field& F = P.field();
  Poly r = a % P;
  Poly s = r, t = r;
  int n = F.r() * P.degree();
  for (int i = 1; i < n; ++i) {
    t = powmod(t, std::uint64_t(F.p()), P);
    s += t;
  }
  if (s.degree() > 0) fail(Errc::ZeroPolynomial, "trace not constant: modulus not irreducible");
  return int(s.coeff(0));
}

// Square root in F_q[x]/(P) for q even (Frobenius inverse).
inline Poly sqrt_mod_char2(const Poly& a, const Poly& P) {
  const Field& F = P.field();
  if (F.p() != 2) fail(Errc::OddCharacteristic, "Frobenius square root needs characteristic 2");
  Poly t = a % P;
  int n = F.r() * P.degree();
  for (int i = 1; i < n; ++i) t = mulmod(t, t, P);
  return t;
}

}  // namespace qff
