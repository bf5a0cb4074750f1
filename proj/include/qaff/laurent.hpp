#pragma once

// Exact Laurent polynomials in one variable q with arbitrary-precision integer
// coefficients, plus the quantum integers/binomials and the grading-shift
// dictionary used throughout the library.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qaff {

using Int = boost::multiprecision::cpp_int;

struct InexactDivision : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : std::runtime_error {
  std::size_t offset;
  SyntaxError(std::string msg, std::size_t off)
      : std::runtime_error(std::move(msg) + " (at offset " +
                           std::to_string(off) + ")"),
        offset(off) {}
};

// The two grading dictionaries. On the symmetric side the categorical shift
// <1> evaluates to q; on the skew side to -q^{-1}.
enum class Side { skew, symmetric };

inline std::string to_string(Side s) {
  return s == Side::skew ? "skew" : "symmetric";
}

inline Side side_from_string(const std::string& s) {
  if (s == "skew") return Side::skew;
  if (s == "symmetric" || s == "sym") return Side::symmetric;
  throw std::invalid_argument("unknown side: " + s);
}

class Laurent {
 public:
  Laurent() = default;
  Laurent(long v) {  // NOLINT(google-explicit-constructor)
    if (v != 0) c_[0] = v;
  }
  explicit Laurent(Int v) {
    if (v != 0) c_[0] = std::move(v);
  }

  static Laurent monomial(Int coeff, int exp) {
    Laurent r;
    if (coeff != 0) r.c_[exp] = std::move(coeff);
    return r;
  }
  // q^e
  static Laurent q_pow(int e) { return monomial(1, e); }

  bool is_zero() const { return c_.empty(); }

  Int coeff(int e) const {
    auto it = c_.find(e);
    return it == c_.end() ? Int(0) : it->second;
  }

  int min_exp() const {
    require_nonzero("min_exp");
    return c_.begin()->first;
  }
  int max_exp() const {
    require_nonzero("max_exp");
    return c_.rbegin()->first;
  }
  std::size_t term_count() const { return c_.size(); }

  const std::map<int, Int>& terms() const { return c_; }

  Laurent& operator+=(const Laurent& o) {
    for (const auto& [e, v] : o.c_) add_term(e, v);
    return *this;
  }
  Laurent& operator-=(const Laurent& o) {
    for (const auto& [e, v] : o.c_) add_term(e, -v);
    return *this;
  }
  Laurent operator+(const Laurent& o) const {
    Laurent r = *this;
    r += o;
    return r;
  }
  Laurent operator-(const Laurent& o) const {
    Laurent r = *this;
    r -= o;
    return r;
  }
  Laurent operator-() const {
    Laurent r;
    for (const auto& [e, v] : c_) r.c_[e] = -v;
    return r;
  }
  Laurent operator*(const Laurent& o) const {
    Laurent r;
    for (const auto& [e1, v1] : c_)
      for (const auto& [e2, v2] : o.c_) r.add_term(e1 + e2, v1 * v2);
    return r;
  }
  Laurent& operator*=(const Laurent& o) { return *this = *this * o; }

  bool operator==(const Laurent& o) const { return c_ == o.c_; }
  bool operator!=(const Laurent& o) const { return !(*this == o); }

  // Deterministic total order (by descending-exponent term sequence); used
  // only to sort report rows and summand sets stably.
  std::strong_ordering operator<=>(const Laurent& o) const {
    auto a = c_.rbegin(), b = o.c_.rbegin();
    for (; a != c_.rend() && b != o.c_.rend(); ++a, ++b) {
      if (a->first != b->first)
        return a->first <=> b->first;
      if (a->second != b->second)
        return a->second < b->second ? std::strong_ordering::less
                                     : std::strong_ordering::greater;
    }
    if (a != c_.rend()) return std::strong_ordering::greater;
    if (b != o.c_.rend()) return std::strong_ordering::less;
    return std::strong_ordering::equal;
  }

  // q -> q^{-1}
  Laurent bar() const {
    Laurent r;
    for (const auto& [e, v] : c_) r.c_[-e] = v;
    return r;
  }

  // Membership in N[q,q^{-1}] (no negative coefficients; zero qualifies).
  bool is_positive() const {
    for (const auto& [e, v] : c_)
      if (v < 0) return false;
    return true;
  }

  // Ring homomorphism q -> 1.
  Int eval_q1() const {
    Int s = 0;
    for (const auto& [e, v] : c_) s += v;
    return s;
  }

  Laurent pow(unsigned long p) const {
    Laurent r{1};
    for (unsigned long i = 0; i < p; ++i) r *= *this;
    return r;
  }

  // Exact division; throws InexactDivision if *this is not a multiple of d.
  Laurent divide_exact(const Laurent& d) const {
    if (d.is_zero()) throw InexactDivision("division by zero");
    if (is_zero()) return Laurent{};
    Laurent rem = *this, quot;
    const int dwidth = d.max_exp() - d.min_exp();
    const int dlead = d.max_exp();
    const Int& dc = d.c_.rbegin()->second;
    while (!rem.is_zero()) {
      if (rem.max_exp() - rem.min_exp() < dwidth)
        throw InexactDivision("remainder narrower than divisor");
      const Int& rc = rem.c_.rbegin()->second;
      if (rc % dc != 0) throw InexactDivision("leading coefficient not divisible");
      Laurent t = monomial(rc / dc, rem.max_exp() - dlead);
      quot += t;
      rem -= t * d;
    }
    return quot;
  }

  std::string to_string() const {
    if (c_.empty()) return "0";
    std::string out;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      Int v = it->second;
      const bool neg = v < 0;
      if (neg) v = -v;
      if (out.empty())
        out += neg ? "-" : "";
      else
        out += neg ? " - " : " + ";
      const int e = it->first;
      if (e == 0) {
        out += v.str();
      } else {
        if (v != 1) out += v.str() + "*";
        out += (e == 1) ? "q" : "q^" + std::to_string(e);
      }
    }
    return out;
  }

  static Laurent parse(const std::string& s);

 private:
  std::map<int, Int> c_;

  void add_term(int e, const Int& v) {
    if (v == 0) return;
    auto [it, fresh] = c_.try_emplace(e, v);
    if (!fresh) {
      it->second += v;
      if (it->second == 0) c_.erase(it);
    }
  }
  void require_nonzero(const char* who) const {
    if (c_.empty())
      throw std::logic_error(std::string(who) + " on zero polynomial");
  }
};

inline Laurent operator*(const Int& a, const Laurent& p) {
  return Laurent(a) * p;
}

namespace detail {

struct LaurentScanner {
  const std::string& s;
  std::size_t i = 0;
  explicit LaurentScanner(const std::string& str) : s(str) {}
  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool at_end() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool accept(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  // signed decimal integer (no internal sign handling beyond leading -)
  Int integer() {
    skip_ws();
    std::size_t start = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    std::size_t digits = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits) throw SyntaxError("expected integer", start);
    return Int(s.substr(start, i - start));
  }
  int small_int() {
    Int v = integer();
    if (v > 1000000 || v < -1000000)
      throw SyntaxError("exponent out of range", i);
    return static_cast<int>(v);
  }
};

}  // namespace detail

inline Laurent Laurent::parse(const std::string& s) {
  detail::LaurentScanner sc(s);
  Laurent out;
  bool first = true;
  while (!sc.at_end()) {
    int sign = 1;
    if (sc.accept('-'))
      sign = -1;
    else if (sc.accept('+')) {
      if (first) throw SyntaxError("unexpected leading +", sc.i);
    } else if (!first) {
      throw SyntaxError("expected + or - between terms", sc.i);
    }
    // term: INT [* qpart] | qpart
    Int coeff = 1;
    int exp = 0;
    bool have_q = false, have_coeff = false;
    if (std::isdigit(static_cast<unsigned char>(sc.peek()))) {
      coeff = sc.integer();
      have_coeff = true;
      if (sc.accept('*')) {
        if (sc.peek() != 'q') throw SyntaxError("expected q after *", sc.i);
      }
    }
    if (sc.peek() == 'q') {
      sc.accept('q');
      have_q = true;
      exp = 1;
      if (sc.accept('^')) exp = sc.small_int();
    }
    if (!have_q && !have_coeff) throw SyntaxError("expected term", sc.i);
    out += monomial(sign * coeff, exp);
    first = false;
  }
  if (first) throw SyntaxError("empty polynomial", 0);
  return out;
}

// [n] = q^{n-1} + q^{n-3} + ... + q^{-n+1}; [-n] = -[n]; [0] = 0.
inline Laurent qint(long n) {
  if (n < 0) return -qint(-n);
  Laurent r;
  for (long j = 0; j < n; ++j) r += Laurent::q_pow(static_cast<int>(n - 1 - 2 * j));
  return r;
}

// [n]! = [n][n-1]...[1]
inline Laurent qfact(long n) {
  if (n < 0) throw std::invalid_argument("qfact of negative");
  Laurent r{1};
  for (long i = 2; i <= n; ++i) r *= qint(i);
  return r;
}

// Gaussian binomial [n choose k]; zero outside 0 <= k <= n. Computed by
// iterated exact division so any inexactness is a hard bug, never a
// rounding artifact.
inline Laurent qbinom(long n, long k) {
  if (k < 0 || n < 0 || k > n) return Laurent{};
  if (2 * k > n) k = n - k;
  Laurent r{1};
  for (long i = 1; i <= k; ++i)
    r = (r * qint(n - k + i)).divide_exact(qint(i));
  return r;
}

// Class of the pure shift [cohom]{internal}: (-1)^cohom q^internal. The side
// is part of the signature because the categorical shift dictionary is
// side-dependent; the cohomological/internal part itself is not.
inline Laurent shift_class(Side /*side*/, long cohom, long internal) {
  Int c = (cohom % 2 == 0) ? 1 : -1;
  return Laurent::monomial(c, static_cast<int>(internal));
}

// Class of the categorical shift <s> on the given side:
// symmetric: <1> = {1}  => q^s ; skew: <1> = [1]{-1} => (-1)^s q^{-s}.
inline Laurent angle_class(Side side, long s) {
  if (side == Side::symmetric) return Laurent::q_pow(static_cast<int>(s));
  Int c = (s % 2 == 0) ? 1 : -1;
  return Laurent::monomial(c, static_cast<int>(-s));
}

// Combined class of a shift triple (angle, cohom, internal).
inline Laurent shift_triple_class(Side side, long angle, long cohom,
                                  long internal) {
  return angle_class(side, angle) * shift_class(side, cohom, internal);
}

}  // namespace qaff
