#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "qff/error.hpp"

namespace qff {

// Field elements are indices in [0, q): the coefficient vector of the
// representative in F_p[y]/(modulus) read as a base-p integer, constant term
// least significant.  0 and 1 are the additive and multiplicative identities.
using Elem = std::uint16_t;

inline bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

class Field;
const Field& field_create(int p, int r, int max_q);

class Field {
 public:
  Field(const Field&) = delete;
  Field& operator=(const Field&) = delete;

  int p() const { return p_; }
  int r() const { return r_; }
  int q() const { return q_; }
  // Modulus over F_p, constant term first, length r+1, monic.
  const std::vector<int>& modulus() const { return modulus_; }

  Elem add(Elem a, Elem b) const {
    if (p_ == 2) return Elem(a ^ b);
    if (!add_.empty()) return add_[std::size_t(a) * q_ + b];
    return add_slow(a, b);
  }
  Elem neg(Elem a) const { return neg_[a]; }
  Elem sub(Elem a, Elem b) const { return add(a, neg_[b]); }
  Elem mul(Elem a, Elem b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[std::size_t(log_[a]) + std::size_t(log_[b])];
  }
  Elem inv(Elem a) const {
    if (a == 0) fail(Errc::DivisionByZero, "inverse of zero in F_" + std::to_string(q_));
    return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
  }
  Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }
  Elem pow(Elem a, std::uint64_t e) const {
    if (e == 0) return 1;
    if (a == 0) return 0;
    std::uint64_t k = (std::uint64_t(log_[a]) * (e % std::uint64_t(q_ - 1))) % std::uint64_t(q_ - 1);
    return exp_[k];
  }
  Elem frobenius(Elem a) const { return pow(a, std::uint64_t(p_)); }

  // Image of an integer under Z -> F_p -> F_q.
  Elem from_int(long long n) const {
    long long m = n % p_;
    if (m < 0) m += p_;
    return Elem(m);
  }
  std::vector<int> rep(Elem a) const {
    std::vector<int> d(std::size_t(r_), 0);
    for (int i = 0; i < r_; ++i) {
      d[std::size_t(i)] = a % p_;
      a = Elem(a / p_);
    }
    return d;
  }
  Elem from_rep(const std::vector<int>& d) const {
    int v = 0;
    for (int i = r_ - 1; i >= 0; --i) v = v * p_ + (i < int(d.size()) ? ((d[std::size_t(i)] % p_) + p_) % p_ : 0);
    return Elem(v);
  }

  // Least generator of F_q^x under element order.
  Elem primitive() const { return exp_[1]; }
  int log(Elem a) const {
    if (a == 0) fail(Errc::DivisionByZero, "discrete log of zero");
    return log_[a];
  }
  Elem exp(long long k) const {
    long long m = k % (q_ - 1);
    if (m < 0) m += q_ - 1;
    return exp_[std::size_t(m)];
  }

  bool is_square(Elem a) const { return a == 0 || p_ == 2 || log_[a] % 2 == 0; }
  // Square root: Frobenius inverse in characteristic 2, otherwise one of the
  // two roots (the one with even discrete log / 2).
  Elem sqrt(Elem a) const {
    if (a == 0) return 0;
    if (p_ == 2) return pow(a, std::uint64_t(q_ / 2));
    if (log_[a] % 2 != 0) fail(Errc::IsSquareClass, "sqrt of a nonsquare");
    return exp_[std::size_t(log_[a] / 2)];
  }

  // Tr_{F_q/F_p}(a) as an integer in [0, p).
  int trace_to_prime(Elem a) const {
    Elem t = a, s = a;
    for (int i = 1; i < r_; ++i) {
      t = frobenius(t);
      s = add(s, t);
    }
    return int(s);
  }

  // Least nonsquare (odd q) under element order.
  Elem least_nonsquare() const {
    if (p_ == 2) fail(Errc::EvenCharacteristic, "no nonsquares in characteristic 2");
    for (int a = 1; a < q_; ++a)
      if (!is_square(Elem(a))) return Elem(a);
    fail(Errc::SizeExceeded, "unreachable");
  }
  // Least element of absolute trace 1 (even q).
  Elem least_trace_one() const {
    if (p_ != 2) fail(Errc::OddCharacteristic, "trace-one constant needs characteristic 2");
    for (int a = 1; a < q_; ++a)
      if (trace_to_prime(Elem(a)) == 1) return Elem(a);
    fail(Errc::SizeExceeded, "unreachable");
  }

  std::string name() const { return "F_" + std::to_string(q_); }

 private:
  friend const Field& field_create(int p, int r, int max_q);

  Field(int p, int r, std::vector<int> modulus) : p_(p), r_(r), modulus_(std::move(modulus)) {
    q_ = 1;
    for (int i = 0; i < r_; ++i) q_ *= p_;
    build_tables();
  }

  Elem add_slow(Elem a, Elem b) const {
    int v = 0, w = 1;
    for (int i = 0; i < r_; ++i) {
      v += ((a % p_ + b % p_) % p_) * w;
      a = Elem(a / p_);
      b = Elem(b / p_);
      w *= p_;
    }
    return Elem(v);
  }

  // Multiplication of representatives, used only while building the tables.
  Elem mul_slow(Elem a, Elem b) const {
    std::vector<int> x = rep(a), y = rep(b), z(std::size_t(2 * r_), 0);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < r_; ++j) z[std::size_t(i + j)] = (z[std::size_t(i + j)] + x[std::size_t(i)] * y[std::size_t(j)]) % p_;
    for (int k = 2 * r_ - 1; k >= r_; --k) {
      int c = z[std::size_t(k)];
      if (c == 0) continue;
      for (int i = 0; i <= r_; ++i) {
        int& t = z[std::size_t(k - r_ + i)];
        t = ((t - c * modulus_[std::size_t(i)]) % p_ + p_) % p_;
      }
    }
    z.resize(std::size_t(r_));
    return from_rep(z);
  }

  void build_tables() {
    neg_.assign(std::size_t(q_), 0);
    for (int a = 0; a < q_; ++a) {
      std::vector<int> d = rep(Elem(a));
      for (int& c : d) c = (p_ - c) % p_;
      neg_[std::size_t(a)] = from_rep(d);
    }
    if (p_ != 2 && q_ <= 4096) {
      add_.assign(std::size_t(q_) * std::size_t(q_), 0);
      for (int a = 0; a < q_; ++a)
        for (int b = 0; b < q_; ++b) add_[std::size_t(a) * q_ + b] = add_slow(Elem(a), Elem(b));
    }
    log_.assign(std::size_t(q_), 0);
    exp_.assign(std::size_t(2 * (q_ - 1)) + 1, 0);
    if (q_ == 2) {
      exp_[0] = exp_[1] = exp_[2] = 1;
      return;
    }
    for (int g = 2; g < q_; ++g) {
      int order = 1;
      Elem x = Elem(g);
      while (x != 1) {
        x = mul_slow(x, Elem(g));
        ++order;
      }
      if (order != q_ - 1) continue;
      Elem y = 1;
      for (int k = 0; k < q_ - 1; ++k) {
        exp_[std::size_t(k)] = y;
        log_[y] = k;
        y = mul_slow(y, Elem(g));
      }
      for (int k = q_ - 1; k < 2 * (q_ - 1) + 1; ++k) exp_[std::size_t(k)] = exp_[std::size_t(k - (q_ - 1))];
      return;
    }
  }

  int p_, r_, q_ = 1;
  std::vector<int> modulus_;
  std::vector<Elem> add_, neg_, exp_;
  std::vector<int> log_;
};

namespace detail {

// Monic polynomial over F_p given by its coefficient vector (constant first) is
// irreducible iff no monic polynomial of degree <= deg/2 divides it.
inline bool fp_irreducible(const std::vector<int>& f, int p) {
  int n = int(f.size()) - 1;
  for (int d = 1; 2 * d <= n; ++d) {
    long long count = 1;
    for (int i = 0; i < d; ++i) count *= p;
    for (long long idx = 0; idx < count; ++idx) {
      std::vector<int> g(std::size_t(d + 1), 0);
      long long t = idx;
      for (int i = 0; i < d; ++i) {
        g[std::size_t(i)] = int(t % p);
        t /= p;
      }
      g[std::size_t(d)] = 1;
      std::vector<int> rem = f;
      for (int k = n; k >= d; --k) {
        int c = rem[std::size_t(k)];
        if (c == 0) continue;
        for (int i = 0; i <= d; ++i) {
          int& x = rem[std::size_t(k - d + i)];
          x = ((x - c * g[std::size_t(i)]) % p + p) % p;
        }
      }
      bool zero = true;
      for (int i = 0; i < d; ++i) zero = zero && rem[std::size_t(i)] == 0;
      if (zero) return false;
    }
  }
  return true;
}

inline std::vector<int> canonical_modulus(int p, int r) {
  if (r == 1) return {0, 1};
  long long count = 1;
  for (int i = 0; i < r; ++i) count *= p;
  for (long long idx = 0; idx < count; ++idx) {
    std::vector<int> f(std::size_t(r + 1), 0);
    long long t = idx;
    for (int i = 0; i < r; ++i) {
      f[std::size_t(i)] = int(t % p);
      t /= p;
    }
    f[std::size_t(r)] = 1;
    if (fp_irreducible(f, p)) return f;
  }
  fail(Errc::SizeExceeded, "no irreducible modulus found");
}

}  // namespace detail

constexpr int kDefaultMaxQ = 1024;

// Fields are interned: the same (p, r) always yields the same object, so
// pointer identity is field identity.
inline const Field& field_create(int p, int r, int max_q = kDefaultMaxQ) {
  if (!is_prime(p)) fail(Errc::NonPrime, std::to_string(p) + " is not prime");
  if (r < 1) fail(Errc::SizeExceeded, "extension degree must be >= 1");
  long long q = 1;
  for (int i = 0; i < r; ++i) {
    q *= p;
    if (q > max_q || q > 65535) fail(Errc::SizeExceeded, "q = " + std::to_string(p) + "^" + std::to_string(r) + " exceeds bound " + std::to_string(max_q));
  }
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<Field>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[{p, r}];
  if (!slot) slot.reset(new Field(p, r, detail::canonical_modulus(p, r)));
  return *slot;
}

// F_q for a prime power q.
inline const Field& field_of_order(int q, int max_q = kDefaultMaxQ) {
  if (q < 2) fail(Errc::NonPrime, "q must be a prime power >= 2");
  int p = 2;
  while (q % p != 0) ++p;
  int r = 0, t = q;
  while (t % p == 0) {
    t /= p;
    ++r;
  }
  if (t != 1) fail(Errc::NonPrime, std::to_string(q) + " is not a prime power");
  return field_create(p, r, max_q);
}

// Quadratic residue symbol a^{(q-1)/2} in {-1, 0, 1}.
inline int residue_symbol(const Field& F, Elem a) {
  if (F.p() == 2) fail(Errc::EvenCharacteristic, "residue symbol needs odd characteristic");
  if (a == 0) return 0;
  return F.log(a) % 2 == 0 ? 1 : -1;
}

// +1 iff Y^2 + Y + a splits over F, i.e. the absolute trace of a vanishes.
inline int artin_schreier_symbol(const Field& F, Elem a) {
  if (F.p() != 2) fail(Errc::OddCharacteristic, "Artin-Schreier symbol needs characteristic 2");
  return F.trace_to_prime(a) == 0 ? 1 : -1;
}

}  // namespace qff
