#pragma once

// Formal words in the generating 1-morphisms: E_i^{(a)}, F_i^{(a)}, the
// symbolic loop generators E_{i,1}/F_{i,-1}, braid generators T_i/T'_i,
// phi_i, R', idempotents 1_k and grading shifts. Provides the grammar
// (parse/print round-trip), weight-flow typechecking and formal adjoints.
//
// Convention (used everywhere): factor lists read left to right as written;
// the rightmost factor applies first to a vector.

#include <array>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaff/laurent.hpp"
#include "qaff/weight.hpp"

namespace qaff {

struct UnsupportedFactor : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FactorKind {
  E,        // E_i^{(a)}
  F,        // F_i^{(a)}
  Eloop1,   // E_{i,1}   (symbolic only)
  Floop_1,  // F_{i,-1}  (symbolic only)
  T,        // T_i^{±1}
  Tprime,   // T'_i^{±1}
  Phi,      // phi_i^{±1} (symbolic only)
  Rprime,   // R'^{±1}
  Idem,     // 1_k
  Shift,    // <a>[c]{m} combined shift triple
};

struct Factor {
  FactorKind kind;
  int index = -1;          // root index for E/F/T/T'/phi
  int power = 1;           // divided power (E/F, >=1) or exponent ±1 (braids)
  std::array<int, 3> shift{0, 0, 0};  // (angle, cohom, internal)
  Weight idem;             // for Idem

  bool operator==(const Factor&) const = default;
};

inline Factor make_gen(FactorKind k, int i, int a = 1) {
  Factor f;
  f.kind = k;
  f.index = i;
  f.power = a;
  return f;
}
inline Factor make_E(int i, int a = 1) { return make_gen(FactorKind::E, i, a); }
inline Factor make_F(int i, int a = 1) { return make_gen(FactorKind::F, i, a); }
inline Factor make_T(int i, bool primed = false, bool inverse = false) {
  Factor f;
  f.kind = primed ? FactorKind::Tprime : FactorKind::T;
  f.index = i;
  f.power = inverse ? -1 : 1;
  return f;
}
inline Factor make_phi(int i, bool inverse = false) {
  Factor f;
  f.kind = FactorKind::Phi;
  f.index = i;
  f.power = inverse ? -1 : 1;
  return f;
}
inline Factor make_Rprime(bool inverse = false) {
  Factor f;
  f.kind = FactorKind::Rprime;
  f.power = inverse ? -1 : 1;
  return f;
}
inline Factor make_idem(Weight k) {
  Factor f;
  f.kind = FactorKind::Idem;
  f.idem = std::move(k);
  return f;
}
inline Factor make_shift(int angle, int cohom, int internal) {
  Factor f;
  f.kind = FactorKind::Shift;
  f.shift = {angle, cohom, internal};
  return f;
}

struct WordExpr {
  std::vector<Factor> factors;  // leftmost first; rightmost applies first

  bool operator==(const WordExpr&) const = default;
  bool empty() const { return factors.empty(); }
  std::size_t size() const { return factors.size(); }
};

inline std::string factor_to_string(const Factor& f) {
  switch (f.kind) {
    case FactorKind::E:
    case FactorKind::F: {
      std::string s(f.kind == FactorKind::E ? "E" : "F");
      s += std::to_string(f.index);
      if (f.power != 1) s += "^(" + std::to_string(f.power) + ")";
      return s;
    }
    case FactorKind::Eloop1:
      return "E" + std::to_string(f.index) + ",1";
    case FactorKind::Floop_1:
      return "F" + std::to_string(f.index) + ",1";
    case FactorKind::T:
    case FactorKind::Tprime: {
      std::string s = "T" + std::to_string(f.index);
      if (f.kind == FactorKind::Tprime) s += "'";
      if (f.power < 0) s += "^-1";
      return s;
    }
    case FactorKind::Phi: {
      std::string s = "phi" + std::to_string(f.index);
      if (f.power < 0) s += "^-1";
      return s;
    }
    case FactorKind::Rprime:
      return f.power < 0 ? "R'^-1" : "R'";
    case FactorKind::Idem:
      return "1_" + weight_to_string(f.idem);
    case FactorKind::Shift: {
      std::string s;
      if (f.shift[0]) s += "<" + std::to_string(f.shift[0]) + ">";
      if (f.shift[1]) s += "[" + std::to_string(f.shift[1]) + "]";
      if (f.shift[2]) s += "{" + std::to_string(f.shift[2]) + "}";
      if (s.empty()) s = "<0>";
      return s;
    }
  }
  throw std::logic_error("unreachable factor kind");
}

inline std::string word_to_string(const WordExpr& w) {
  std::string s;
  for (std::size_t i = 0; i < w.factors.size(); ++i) {
    if (i) s += " ";
    s += factor_to_string(w.factors[i]);
  }
  return s;
}

namespace detail {

// Parses one factor starting at sc.i (no leading whitespace).
inline Factor parse_factor(LaurentScanner& sc, int n) {
  const std::size_t start = sc.i;
  const std::string& s = sc.s;
  auto check_index = [&](int idx, bool finite_only) {
    const int lo = finite_only ? 1 : 0;
    if (idx < lo || (n > 0 && idx >= n))
      throw SyntaxError("index out of range", start);
    return idx;
  };
  auto read_index = [&]() -> int {
    std::size_t d = sc.i;
    while (sc.i < s.size() && std::isdigit(static_cast<unsigned char>(s[sc.i])))
      ++sc.i;
    if (sc.i == d) throw SyntaxError("expected index", sc.i);
    return std::stoi(s.substr(d, sc.i - d));
  };
  const char c = s[sc.i];
  if (c == '1' && sc.i + 1 < s.size() && s[sc.i + 1] == '_') {
    sc.i += 2;
    if (sc.i >= s.size() || s[sc.i] != '(')
      throw SyntaxError("expected ( after 1_", sc.i);
    ++sc.i;
    Weight k;
    for (;;) {
      k.push_back(sc.small_int());
      if (sc.i < s.size() && s[sc.i] == ',') {
        ++sc.i;
        continue;
      }
      if (sc.i < s.size() && s[sc.i] == ')') {
        ++sc.i;
        break;
      }
      throw SyntaxError("expected , or ) in weight", sc.i);
    }
    if (n > 0 && static_cast<int>(k.size()) != n)
      throw SyntaxError("weight arity mismatch", start);
    return make_idem(std::move(k));
  }
  if (c == 'E' || c == 'F') {
    ++sc.i;
    int idx = read_index();
    if (sc.i < s.size() && s[sc.i] == ',') {
      ++sc.i;
      if (sc.i >= s.size() || s[sc.i] != '1')
        throw SyntaxError("expected 1 after , in loop generator", sc.i);
      ++sc.i;
      check_index(idx, /*finite_only=*/true);
      return make_gen(c == 'E' ? FactorKind::Eloop1 : FactorKind::Floop_1, idx);
    }
    check_index(idx, /*finite_only=*/false);
    int a = 1;
    if (sc.i + 1 < s.size() && s[sc.i] == '^' && s[sc.i + 1] == '(') {
      sc.i += 2;
      a = sc.small_int();
      if (a < 1) throw SyntaxError("divided power must be >= 1", sc.i);
      if (sc.i >= s.size() || s[sc.i] != ')')
        throw SyntaxError("expected ) after power", sc.i);
      ++sc.i;
    }
    return make_gen(c == 'E' ? FactorKind::E : FactorKind::F, idx, a);
  }
  if (c == 'T') {
    ++sc.i;
    int idx = read_index();
    check_index(idx, false);
    bool primed = false, inv = false;
    if (sc.i < s.size() && s[sc.i] == '\'') {
      primed = true;
      ++sc.i;
    }
    if (s.compare(sc.i, 3, "^-1") == 0) {
      inv = true;
      sc.i += 3;
    }
    return make_T(idx, primed, inv);
  }
  if (s.compare(sc.i, 3, "phi") == 0) {
    sc.i += 3;
    int idx = read_index();
    check_index(idx, false);
    bool inv = false;
    if (s.compare(sc.i, 3, "^-1") == 0) {
      inv = true;
      sc.i += 3;
    }
    return make_phi(idx, inv);
  }
  if (c == 'R') {
    ++sc.i;
    if (sc.i >= s.size() || s[sc.i] != '\'')
      throw SyntaxError("expected ' after R", sc.i);
    ++sc.i;
    bool inv = false;
    if (s.compare(sc.i, 3, "^-1") == 0) {
      inv = true;
      sc.i += 3;
    }
    return make_Rprime(inv);
  }
  if (c == '<' || c == '[' || c == '{') {
    // One shift factor may combine adjacent <a>[c]{m} brackets.
    Factor f = make_shift(0, 0, 0);
    while (sc.i < s.size() &&
           (s[sc.i] == '<' || s[sc.i] == '[' || s[sc.i] == '{')) {
      const char open = s[sc.i];
      const char close = open == '<' ? '>' : (open == '[' ? ']' : '}');
      ++sc.i;
      int v = sc.small_int();
      if (sc.i >= s.size() || s[sc.i] != close)
        throw SyntaxError(std::string("expected ") + close, sc.i);
      ++sc.i;
      f.shift[open == '<' ? 0 : (open == '[' ? 1 : 2)] += v;
    }
    return f;
  }
  throw SyntaxError("unexpected character in word", sc.i);
}

}  // namespace detail

// Parse a whitespace-separated word. If n > 0, indices and weight arities are
// validated against it.
inline WordExpr parse_word(const std::string& text, int n = -1) {
  detail::LaurentScanner sc(text);
  WordExpr w;
  while (!sc.at_end()) {
    w.factors.push_back(detail::parse_factor(sc, n));
    if (sc.i < text.size() && !std::isspace(static_cast<unsigned char>(text[sc.i])))
      throw SyntaxError("expected whitespace between factors", sc.i);
  }
  return w;
}

// How one factor transforms a weight (applied to `k`, producing the next
// weight); Idem/Shift are transparent. Returns nullopt for symbolic-only
// factors only when `allow_symbolic`; otherwise throws.
inline Weight factor_target(const Factor& f, const Weight& k) {
  const int n = static_cast<int>(k.size());
  switch (f.kind) {
    case FactorKind::E:
    case FactorKind::Eloop1: {
      Weight r = k;
      const Weight a = alpha(n, f.index);
      for (int t = 0; t < n; ++t)
        r[static_cast<std::size_t>(t)] +=
            (f.kind == FactorKind::E ? f.power : 1) * a[static_cast<std::size_t>(t)];
      return r;
    }
    case FactorKind::F:
    case FactorKind::Floop_1: {
      Weight r = k;
      const Weight a = alpha(n, f.index);
      for (int t = 0; t < n; ++t)
        r[static_cast<std::size_t>(t)] -=
            (f.kind == FactorKind::F ? f.power : 1) * a[static_cast<std::size_t>(t)];
      return r;
    }
    case FactorKind::T:
    case FactorKind::Tprime:
      return reflect(k, f.index);
    case FactorKind::Phi:
      return k;
    case FactorKind::Rprime: {
      if (f.power > 0) return rotate(k);
      Weight r;  // inverse rotation
      r.push_back(k.back());
      r.insert(r.end(), k.begin(), k.end() - 1);
      return r;
    }
    case FactorKind::Idem:
    case FactorKind::Shift:
      return k;
  }
  throw std::logic_error("unreachable");
}

// Weight flow from `source` through every factor (rightmost first). Returns
// the boundary weights: source first, then one entry per weight-carrying
// factor (Idem/Shift are validated but add no entry). nullopt = the word is
// zero on this source (some boundary leaves the nonzero-object set or an
// idempotent mismatches).
inline std::optional<std::vector<Weight>> weight_flow(const WordExpr& w,
                                                      const Weight& source,
                                                      int N) {
  if (!is_nonzero_object(source, N)) return std::nullopt;
  std::vector<Weight> out{source};
  Weight cur = source;
  for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
    const Factor& f = *it;
    if (f.kind == FactorKind::Idem) {
      if (f.idem.size() != cur.size())
        throw DimensionMismatch("idempotent arity mismatch");
      if (f.idem != cur) return std::nullopt;
      continue;
    }
    if (f.kind == FactorKind::Shift) continue;
    cur = factor_target(f, cur);
    if (!is_nonzero_object(cur, N)) return std::nullopt;
    out.push_back(cur);
  }
  return out;
}

inline Weight flow_target(const WordExpr& w, const Weight& source) {
  Weight cur = source;
  for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
    if (it->kind == FactorKind::Idem || it->kind == FactorKind::Shift) continue;
    cur = factor_target(*it, cur);
  }
  return cur;
}

namespace detail {

// Adjoint of a single E/F divided power at local source weight k (the weight
// the factor is applied to). Returns the converted factor and the angle-shift
// it contributes. Closed forms obtained by iterating the single-power
// adjunction and merging:
//   (E_i^{(a)} 1_k)^R = 1_k F_i^{(a)} <a(<k,a_i>+a)>
//   (F_i^{(a)} 1_v)^R = E_i^{(a)} 1_{v-a·a_i} <a(-<v,a_i>+a)>
// and the left adjoints with negated shifts.
inline std::pair<Factor, long> adjoint_gen(const Factor& f, const Weight& k,
                                           bool right) {
  const int n = static_cast<int>(k.size());
  const long a = f.power;
  long sh;
  Factor g;
  if (f.kind == FactorKind::E) {
    sh = a * (pairing(k, alpha(n, f.index)) + a);
    g = make_F(f.index, f.power);
  } else {
    sh = a * (-pairing(k, alpha(n, f.index)) + a);
    g = make_E(f.index, f.power);
  }
  if (!right) sh = -sh;
  return {g, sh};
}

}  // namespace detail

// Formal right adjoint: reverse factor order, swap E <-> F with the
// adjunction shifts accumulated at each factor's local weight, negate
// explicit shifts, keep idempotents. Only E/F/Idem/Shift words supported.
inline WordExpr formal_adjoint(const WordExpr& w, const Weight& source,
                               bool right) {
  WordExpr out;
  std::array<long, 3> net{0, 0, 0};
  Weight cur = source;
  // Walk in application order (right to left); adjoints compose in reverse,
  // so collecting converted factors by push_back yields the reversed word.
  for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
    const Factor& f = *it;
    switch (f.kind) {
      case FactorKind::E:
      case FactorKind::F: {
        auto [g, sh] = detail::adjoint_gen(f, cur, right);
        out.factors.push_back(g);
        net[0] += sh;
        cur = factor_target(f, cur);
        break;
      }
      case FactorKind::Idem:
        if (f.idem != cur)
          throw DimensionMismatch("idempotent mismatch in adjoint");
        out.factors.push_back(f);
        break;
      case FactorKind::Shift:
        net[0] -= f.shift[0];
        net[1] -= f.shift[1];
        net[2] -= f.shift[2];
        break;
      default:
        throw UnsupportedFactor(
            "adjoint of braid/loop factors is handled as inverses, not here");
    }
  }
  if (net[0] || net[1] || net[2])
    out.factors.push_back(make_shift(static_cast<int>(net[0]),
                                     static_cast<int>(net[1]),
                                     static_cast<int>(net[2])));
  return out;
}

inline WordExpr right_adjoint(const WordExpr& w, const Weight& source) {
  return formal_adjoint(w, source, true);
}
inline WordExpr left_adjoint(const WordExpr& w, const Weight& source) {
  return formal_adjoint(w, source, false);
}

}  // namespace qaff
