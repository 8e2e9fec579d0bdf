#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "qff/error.hpp"
#include "qff/field.hpp"
#include "qff/poly.hpp"

namespace qff {

// A place of F_q(x): a monic irreducible polynomial or the degree valuation
// at infinity.  Infinity sorts first, finite places by (degree, coefficients).
class Place {
 public:
  Place() = default;
  static Place infinity(const Field& F) {
    Place v;
    v.F_ = &F;
    v.inf_ = true;
    return v;
  }
  // The caller guarantees P is monic irreducible.
  static Place finite(Poly P) {
    Place v;
    v.F_ = P.field_ptr();
    v.poly_ = std::move(P);
    return v;
  }
  static Place finite_checked(const Poly& P) {
    if (!P.is_monic() || !is_irreducible(P)) fail(Errc::ParseError, P.to_string() + " is not a monic irreducible");
    return finite(P);
  }

  bool is_infinity() const { return inf_; }
  int degree() const { return inf_ ? 1 : poly_.degree(); }
  const Poly& poly() const { return poly_; }
  const Field& field() const { return *F_; }
  std::string to_string() const { return inf_ ? "inf" : poly_.to_string(); }

  friend bool operator==(const Place& a, const Place& b) { return a.inf_ == b.inf_ && (a.inf_ || a.poly_ == b.poly_); }
  friend bool operator!=(const Place& a, const Place& b) { return !(a == b); }
  friend bool operator<(const Place& a, const Place& b) {
    if (a.inf_ != b.inf_) return a.inf_;
    if (a.inf_) return false;
    return a.poly_ < b.poly_;
  }

 private:
  const Field* F_ = nullptr;
  bool inf_ = false;
  Poly poly_;
};

inline Place parse_place(const Field& F, const std::string& s) {
  if (s == "inf") return Place::infinity(F);
  return Place::finite_checked(parse_poly(F, s));
}

// Sparse divisor: sorted (place, nonzero multiplicity) list.
class Divisor {
 public:
  using Term = std::pair<Place, int>;

  Divisor() = default;
  static Divisor of(const Place& v, int n = 1) {
    Divisor d;
    if (n != 0) d.t_.emplace_back(v, n);
    return d;
  }
  // Terms need not be sorted or merged.
  static Divisor from_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    Divisor d;
    for (auto& t : terms) {
      if (!d.t_.empty() && d.t_.back().first == t.first)
        d.t_.back().second += t.second;
      else
        d.t_.push_back(std::move(t));
      if (d.t_.back().second == 0) d.t_.pop_back();
    }
    return d;
  }

  const std::vector<Term>& terms() const { return t_; }
  int ord(const Place& v) const {
    auto it = std::lower_bound(t_.begin(), t_.end(), v, [](const Term& a, const Place& b) { return a.first < b; });
    return (it != t_.end() && it->first == v) ? it->second : 0;
  }
  long long degree() const {
    long long d = 0;
    for (auto& [v, n] : t_) d += (long long)n * v.degree();
    return d;
  }
  bool is_zero() const { return t_.empty(); }
  bool is_effective() const {
    for (auto& [v, n] : t_)
      if (n < 0) return false;
    return true;
  }
  bool is_squarefree() const {
    for (auto& [v, n] : t_)
      if (n != 1) return false;
    return true;
  }
  // In 2 Div(K): every multiplicity even.
  bool is_even() const {
    for (auto& [v, n] : t_)
      if (n % 2 != 0) return false;
    return true;
  }
  std::vector<Place> support() const {
    std::vector<Place> s;
    for (auto& [v, n] : t_) s.push_back(v);
    return s;
  }
  bool contains(const Place& v) const { return ord(v) != 0; }
  bool disjoint(const Divisor& o) const {
    std::size_t i = 0, j = 0;
    while (i < t_.size() && j < o.t_.size()) {
      if (t_[i].first == o.t_[j].first) return false;
      if (t_[i].first < o.t_[j].first)
        ++i;
      else
        ++j;
    }
    return true;
  }

  Divisor& operator+=(const Divisor& o) { return *this = combine(*this, o, 1); }
  Divisor& operator-=(const Divisor& o) { return *this = combine(*this, o, -1); }
  friend Divisor operator+(const Divisor& a, const Divisor& b) { return combine(a, b, 1); }
  friend Divisor operator-(const Divisor& a, const Divisor& b) { return combine(a, b, -1); }
  friend Divisor operator*(int k, const Divisor& a) {
    Divisor d;
    if (k == 0) return d;
    d.t_ = a.t_;
    for (auto& t : d.t_) t.second *= k;
    return d;
  }
  friend Divisor operator-(const Divisor& a) { return (-1) * a; }

  friend bool operator==(const Divisor& a, const Divisor& b) {
    if (a.t_.size() != b.t_.size()) return false;
    for (std::size_t i = 0; i < a.t_.size(); ++i)
      if (a.t_[i].first != b.t_[i].first || a.t_[i].second != b.t_[i].second) return false;
    return true;
  }
  friend bool operator!=(const Divisor& a, const Divisor& b) { return !(a == b); }
  // Lexicographic on the sorted (place, multiplicity) list: the enumeration order.
  friend bool operator<(const Divisor& a, const Divisor& b) {
    std::size_t n = std::min(a.t_.size(), b.t_.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (a.t_[i].first != b.t_[i].first) return a.t_[i].first < b.t_[i].first;
      if (a.t_[i].second != b.t_[i].second) return a.t_[i].second < b.t_[i].second;
    }
    return a.t_.size() < b.t_.size();
  }
  // Partial order a <= b: ord_v(a) <= ord_v(b) at every place.
  friend bool leq(const Divisor& a, const Divisor& b) { return (b - a).is_effective(); }

  Divisor positive_part() const {
    Divisor d;
    for (auto& t : t_)
      if (t.second > 0) d.t_.push_back(t);
    return d;
  }
  Divisor negative_part() const {
    Divisor d;
    for (auto& t : t_)
      if (t.second < 0) d.t_.emplace_back(t.first, -t.second);
    return d;
  }
  // Product of the finite places raised to their multiplicities (multiplicities
  // must be nonnegative); Infinity is ignored.
  Poly finite_poly(const Field& F) const {
    Poly P = Poly::one(F);
    for (auto& [v, n] : t_) {
      if (v.is_infinity()) continue;
      if (n < 0) fail(Errc::NotEffective, "finite_poly of a non-effective divisor");
      for (int i = 0; i < n; ++i) P *= v.poly();
    }
    return P;
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i) s += ",";
      s += "(" + t_[i].first.to_string() + "," + std::to_string(t_[i].second) + ")";
    }
    return s + "]";
  }

 private:
  static Divisor combine(const Divisor& a, const Divisor& b, int sign) {
    Divisor d;
    std::size_t i = 0, j = 0;
    while (i < a.t_.size() || j < b.t_.size()) {
      if (j == b.t_.size() || (i < a.t_.size() && a.t_[i].first < b.t_[j].first)) {
        d.t_.push_back(a.t_[i++]);
      } else if (i == a.t_.size() || b.t_[j].first < a.t_[i].first) {
        d.t_.emplace_back(b.t_[j].first, sign * b.t_[j].second);
        ++j;
      } else {
        int n = a.t_[i].second + sign * b.t_[j].second;
        if (n != 0) d.t_.emplace_back(a.t_[i].first, n);
        ++i;
        ++j;
      }
    }
    return d;
  }

  std::vector<Term> t_;
};

inline Divisor parse_divisor(const Field& F, const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s += ch;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail(Errc::ParseError, "divisor must be bracketed: '" + text + "'");
  s = s.substr(1, s.size() - 2);
  std::vector<Divisor::Term> terms;
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (s[pos] != '(') fail(Errc::ParseError, "expected '(' in '" + text + "'");
    std::size_t close = s.find(')', pos);
    if (close == std::string::npos) fail(Errc::ParseError, "unterminated term in '" + text + "'");
    std::string body = s.substr(pos + 1, close - pos - 1);
    std::size_t comma = body.rfind(',');
    if (comma == std::string::npos) fail(Errc::ParseError, "missing multiplicity in '" + text + "'");
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(body.substr(comma + 1), &used);
      if (used != body.size() - comma - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(Errc::ParseError, "bad multiplicity in '" + text + "'");
    }
    terms.emplace_back(parse_place(F, body.substr(0, comma)), n);
    pos = close + 1;
    if (pos < s.size()) {
      if (s[pos] != ',') fail(Errc::ParseError, "expected ',' in '" + text + "'");
      ++pos;
    }
  }
  return Divisor::from_terms(std::move(terms));
}

// K = F_q(x): genus 0, class number 1, canonical divisor -2 inf.
class BaseField {
 public:
  explicit BaseField(const Field& F) : F_(&F) {}
  const Field& field() const { return *F_; }
  int q() const { return F_->q(); }
  int p() const { return F_->p(); }
  bool odd() const { return F_->p() != 2; }
  int genus() const { return 0; }
  int class_number() const { return 1; }
  Place infinity() const { return Place::infinity(*F_); }
  Divisor canonical_divisor() const { return Divisor::of(infinity(), -2); }

 private:
  const Field* F_;
};

namespace detail {

struct PlaceCache {
  std::mutex mu;
  std::map<std::pair<const Field*, int>, std::shared_ptr<const std::vector<Place>>> by_degree;
  std::map<std::pair<const Field*, int>, std::shared_ptr<const std::vector<Place>>> up_to;
};
inline PlaceCache& place_cache() {
  static PlaceCache c;
  return c;
}

}  // namespace detail

// Places of degree d in canonical order (Infinity included for d = 1).
inline const std::vector<Place>& places_of_degree(const Field& F, int d) {
  auto& c = detail::place_cache();
  {
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.by_degree.find({&F, d});
    if (it != c.by_degree.end()) return *it->second;
  }
  auto v = std::make_shared<std::vector<Place>>();
  if (d == 1) v->push_back(Place::infinity(F));
  if (d >= 1)
    for (auto& P : monic_irreducibles(F, d)) v->push_back(Place::finite(P));
  std::lock_guard<std::mutex> lock(c.mu);
  auto& slot = c.by_degree[{&F, d}];
  if (!slot) slot = v;
  return *slot;
}
inline const std::vector<Place>& places_of_degree(const BaseField& K, int d) { return places_of_degree(K.field(), d); }

// All places of degree <= D in canonical order.
inline const std::vector<Place>& places_up_to(const Field& F, int D) {
  auto& c = detail::place_cache();
  {
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.up_to.find({&F, D});
    if (it != c.up_to.end()) return *it->second;
  }
  auto v = std::make_shared<std::vector<Place>>();
  for (int d = 1; d <= D; ++d) {
    const auto& pd = places_of_degree(F, d);
    v->insert(v->end(), pd.begin(), pd.end());
  }
  std::lock_guard<std::mutex> lock(c.mu);
  auto& slot = c.up_to[{&F, D}];
  if (!slot) slot = v;
  return *slot;
}

// Number of places of degree d of F_q(x), by the necklace formula.
inline long long place_count(int q, int d) {
  auto ipow = [](long long b, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  };
  long long s = 0;
  for (int e = 1; e <= d; ++e) {
    if (d % e != 0) continue;
    int m = d / e, mu = 1;
    for (int pr = 2, t = m; t > 1; ++pr) {
      if (t % pr == 0) {
        t /= pr;
        if (t % pr == 0) {
          mu = 0;
          break;
        }
        mu = -mu;
      }
    }
    s += mu * ipow(q, e);
  }
  return s / d + (d == 1 ? 1 : 0);
}

// Visit every effective divisor of degree n supported on `places` (sorted by
// degree, canonical order) in lexicographic order; the callback receives the
// (index, multiplicity) list.
template <class Fn>
void for_each_effective_indexed(const std::vector<Place>& places, int n, Fn&& fn) {
  std::vector<std::pair<int, int>> cur;
  std::function<void(std::size_t, int)> rec = [&](std::size_t start, int rem) {
    if (rem == 0) {
      fn(static_cast<const std::vector<std::pair<int, int>>&>(cur));
      return;
    }
    for (std::size_t i = start; i < places.size(); ++i) {
      int d = places[i].degree();
      if (d > rem) break;
      for (int k = 1; k * d <= rem; ++k) {
        cur.emplace_back(int(i), k);
        rec(i + 1, rem - k * d);
        cur.pop_back();
      }
    }
  };
  rec(0, n);
}

// Same for square-free divisors.
template <class Fn>
void for_each_squarefree_indexed(const std::vector<Place>& places, int n, Fn&& fn) {
  std::vector<int> cur;
  std::function<void(std::size_t, int)> rec = [&](std::size_t start, int rem) {
    if (rem == 0) {
      fn(static_cast<const std::vector<int>&>(cur));
      return;
    }
    for (std::size_t i = start; i < places.size(); ++i) {
      int d = places[i].degree();
      if (d > rem) break;
      cur.push_back(int(i));
      rec(i + 1, rem - d);
      cur.pop_back();
    }
  };
  rec(0, n);
}

inline std::vector<Divisor> enumerate_effective(const BaseField& K, int n) {
  std::vector<Divisor> out;
  if (n < 0) return out;
  const auto& places = places_up_to(K.field(), std::max(n, 1));
  for_each_effective_indexed(places, n, [&](const std::vector<std::pair<int, int>>& t) {
    std::vector<Divisor::Term> terms;
    terms.reserve(t.size());
    for (auto [i, k] : t) terms.emplace_back(places[std::size_t(i)], k);
    out.push_back(Divisor::from_terms(std::move(terms)));
  });
  return out;
}

inline void require_effective(const Divisor& a, const char* what) {
  if (!a.is_effective()) fail(Errc::NotEffective, std::string(what) + ": " + a.to_string() + " is not effective");
}

inline int mobius(const Divisor& a) {
  require_effective(a, "mobius");
  if (!a.is_squarefree()) return 0;
  return a.terms().size() % 2 == 0 ? 1 : -1;
}

inline long long checked_pow(long long b, long long e) {
  long long r = 1;
  for (long long i = 0; i < e; ++i) {
    if (r > (1LL << 62) / b) fail(Errc::Overflow, "integer power overflow");
    r *= b;
  }
  return r;
}

inline long long phi(const Divisor& a, int q) {
  require_effective(a, "phi");
  long long r = 1;
  for (auto& [v, n] : a.terms()) {
    long long hi = checked_pow(q, (long long)n * v.degree());
    long long lo = checked_pow(q, (long long)(n - 1) * v.degree());
    long long f = hi - lo;
    if (r > (1LL << 62) / f) fail(Errc::Overflow, "phi overflow");
    r *= f;
  }
  return r;
}

inline std::pair<Divisor, Divisor> squarefree_split(const Divisor& a) {
  require_effective(a, "squarefree_split");
  std::vector<Divisor::Term> t1;
  for (auto& [v, n] : a.terms()) t1.emplace_back(v, 1);
  Divisor a1 = Divisor::from_terms(std::move(t1));
  return {a1, a - a1};
}

// Visit every effective b with 0 <= b <= a.
template <class Fn>
void for_each_subdivisor(const Divisor& a, Fn&& fn) {
  require_effective(a, "for_each_subdivisor");
  const auto& t = a.terms();
  std::vector<Divisor::Term> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == t.size()) {
      fn(Divisor::from_terms(cur));
      return;
    }
    rec(i + 1);
    for (int k = 1; k <= t[i].second; ++k) {
      cur.emplace_back(t[i].first, k);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

inline long long mobius_interval_sum(const Divisor& a) {
  long long s = 0;
  for_each_subdivisor(a, [&](const Divisor& c) { s += mobius(c); });
  return s;
}

// #{b : 0 <= b <= a}.
inline long long subdivisor_count(const Divisor& a) {
  require_effective(a, "subdivisor_count");
  long long n = 1;
  for (auto& [v, k] : a.terms()) n *= (k + 1);
  return n;
}

}  // namespace qff
