#pragma once

// Rule registry: local rewrite laws for generator words (divided-power
// merges/splits, same-index commutations with quantum-integer correction
// terms, the three-index shuffle family, loop-absorption) and the symbolic
// braid-conjugation laws used by replayable derivation scripts. Each rule
// application consumes a word, a position and a small context and produces a
// SummandSet: a multiset of (multiplicity, word) entries together with an
// `exact` flag. `exact == true` claims the input equals the output
// combination on the nose (checkable as a matrix identity); `exact == false`
// claims only that the input is a direct summand of the output combination
// (multiplicities are upper-bound placeholders, 1 where unconstrained).

#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaff/laurent.hpp"
#include "qaff/weight.hpp"
#include "qaff/word.hpp"

namespace qaff {

struct PatternMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Summand {
  Laurent mult;
  WordExpr word;
};

struct SummandSet {
  std::vector<Summand> entries;
  bool exact = true;
};

// Quantum binomial extended to negative tops via
//   [m choose t] = (-1)^t [t-m-1 choose t]  (m < 0),
// matching the expansion coefficients of E^{(a)}F^{(b)} commutation at
// arbitrary weights. Values for m < 0 are not in N[q,q^-1].
inline Laurent qbinom_signed(long top, long bot) {
  if (bot < 0) return Laurent{};
  if (bot == 0) return Laurent{1};
  if (top >= 0) return qbinom(top, bot);
  Laurent v = qbinom(bot - top - 1, bot);
  if (bot % 2) v = -v;
  return v;
}

struct RuleCtx {
  int n = 2;   // number of weight slots
  int N = 0;   // total weight (for loop-block rules); 0 = unspecified
};

// ---------------------------------------------------------------------------
// Weight anchoring: words that contain at least one idempotent factor have a
// well-defined weight at every slot (slot j = boundary left of factor j;
// slot L = right-hand source). Returns nullopt when no idempotent is present.
// Inconsistent idempotents throw PatternMismatch.
// ---------------------------------------------------------------------------

inline Weight factor_source(const Factor& f, const Weight& target) {
  const int n = static_cast<int>(target.size());
  switch (f.kind) {
    case FactorKind::E:
    case FactorKind::Eloop1: {
      Weight r = target;
      const Weight a = alpha(n, f.index);
      for (int t = 0; t < n; ++t)
        r[static_cast<std::size_t>(t)] -=
            (f.kind == FactorKind::E ? f.power : 1) *
            a[static_cast<std::size_t>(t)];
      return r;
    }
    case FactorKind::F:
    case FactorKind::Floop_1: {
      Weight r = target;
      const Weight a = alpha(n, f.index);
      for (int t = 0; t < n; ++t)
        r[static_cast<std::size_t>(t)] +=
            (f.kind == FactorKind::F ? f.power : 1) *
            a[static_cast<std::size_t>(t)];
      return r;
    }
    case FactorKind::T:
    case FactorKind::Tprime:
      return reflect(target, f.index);
    case FactorKind::Phi:
      return target;
    case FactorKind::Rprime: {
      if (f.power > 0) {  // target = rotate(source)
        Weight r;
        r.push_back(target.back());
        r.insert(r.end(), target.begin(), target.end() - 1);
        return r;
      }
      return rotate(target);
    }
    case FactorKind::Idem:
    case FactorKind::Shift:
      return target;
  }
  throw std::logic_error("unreachable");
}

inline std::optional<std::vector<Weight>> anchored_weights(const WordExpr& w) {
  const std::size_t L = w.size();
  std::ptrdiff_t anchor = -1;
  for (std::size_t j = 0; j < L; ++j)
    if (w.factors[j].kind == FactorKind::Idem) {
      anchor = static_cast<std::ptrdiff_t>(j);
      break;
    }
  if (anchor < 0) return std::nullopt;
  std::vector<Weight> slots(L + 1);
  const auto p = static_cast<std::size_t>(anchor);
  slots[p] = w.factors[p].idem;
  slots[p + 1] = w.factors[p].idem;
  for (std::size_t j = p + 1; j < L; ++j)
    slots[j + 1] = factor_source(w.factors[j], slots[j]);
  for (std::size_t j = p; j-- > 0;)
    slots[j] = factor_target(w.factors[j], slots[j + 1]);
  // Validate every other idempotent against the anchored flow.
  for (std::size_t j = 0; j < L; ++j)
    if (w.factors[j].kind == FactorKind::Idem && w.factors[j].idem != slots[j])
      throw PatternMismatch("inconsistent idempotents in word");
  return slots;
}

namespace ruledetail {

inline bool adjacent_mod(int i, int j, int n) {
  return ((i + 1) % n == j) || ((j + 1) % n == i);
}
inline bool doubly_adjacent(int i, int j, int n) {
  return ((i + 1) % n == j) && ((j + 1) % n == i);
}
// Cartan pairing <alpha_i, alpha_j> in the cyclic (affine) index set.
inline int root_pairing(int i, int j, int n) {
  if (i == j) return 2;
  if (doubly_adjacent(i, j, n)) return -2;
  if (adjacent_mod(i, j, n)) return -1;
  return 0;
}

inline bool is_gen(const Factor& f) {
  return f.kind == FactorKind::E || f.kind == FactorKind::F;
}
inline bool is_braid_t(const Factor& f) { return f.kind == FactorKind::T; }

inline void need(bool cond, const std::string& msg) {
  if (!cond) throw PatternMismatch(msg);
}

inline WordExpr splice(const WordExpr& w, std::size_t pos, std::size_t len,
                       const std::vector<Factor>& repl) {
  WordExpr r;
  r.factors.reserve(w.size() - len + repl.size());
  r.factors.insert(r.factors.end(), w.factors.begin(),
                   w.factors.begin() + static_cast<std::ptrdiff_t>(pos));
  for (const auto& f : repl) r.factors.push_back(f);
  r.factors.insert(r.factors.end(),
                   w.factors.begin() + static_cast<std::ptrdiff_t>(pos + len),
                   w.factors.end());
  return r;
}

// Push a divided power into a factor list, dropping zero powers.
inline void push_pow(std::vector<Factor>& v, FactorKind kind, int idx,
                     int pow) {
  if (pow == 0) return;
  need(pow > 0, "negative residual power");
  v.push_back(make_gen(kind, idx, pow));
}

inline const Factor& at(const WordExpr& w, std::size_t pos,
                        const char* rule) {
  need(pos < w.size(), std::string(rule) + ": position out of range");
  return w.factors[pos];
}

inline Weight weight_right_of(const WordExpr& w, std::size_t pos,
                              const char* rule) {
  auto slots = anchored_weights(w);
  need(slots.has_value(), std::string(rule) + ": rule needs a weight anchor "
                                              "(no idempotent in word)");
  return (*slots)[pos];
}

// The inverse braid-ish factors: T/T'/phi/R' with power negated.
inline Factor inverted(Factor f) {
  f.power = -f.power;
  return f;
}

inline bool same_braid_gen(const Factor& a, const Factor& b) {
  return a.kind == b.kind && a.index == b.index;
}

// T_1^{-1} T_2^{-1} ... T_{n-1}^{-1} ... T_2^{-1} T_1^{-1} (2n-3 factors).
inline std::vector<Factor> palindrome_up(int n) {
  std::vector<Factor> v;
  for (int i = 1; i <= n - 1; ++i) v.push_back(make_T(i, false, true));
  for (int i = n - 2; i >= 1; --i) v.push_back(make_T(i, false, true));
  return v;
}
// T_{n-1}^{-1} ... T_1^{-1} ... T_{n-1}^{-1}.
inline std::vector<Factor> palindrome_down(int n) {
  std::vector<Factor> v;
  for (int i = n - 1; i >= 1; --i) v.push_back(make_T(i, false, true));
  for (int i = 2; i <= n - 1; ++i) v.push_back(make_T(i, false, true));
  return v;
}
inline std::vector<Factor> inverse_of(const std::vector<Factor>& v) {
  std::vector<Factor> r;
  for (auto it = v.rbegin(); it != v.rend(); ++it) r.push_back(inverted(*it));
  return r;
}

}  // namespace ruledetail

// ---------------------------------------------------------------------------
// apply_rule
// ---------------------------------------------------------------------------
//
// Rules and their positions (pos = index of the leftmost matched factor; for
// insertion rules pos = the gap left of factor pos):
//
//   merge-dp          E_i^{(a)} E_i^{(b)} -> [a+b over a] E_i^{(a+b)}   exact
//   split-dp (a1)     E_i^{(a)} -> E_i^{(a1)} E_i^{(a-a1)}              summand
//   commute           X Y -> Y X for generator pairs with zero pairing
//                     (E vs F at distinct indices always; E/E, F/F only at
//                     non-adjacent indices; braid generator vs generator at
//                     non-adjacent indices)                             exact
//   ef-to-fe          E_i^{(a)} F_i^{(b)} 1_v -> sum_t [a-b+<v,a_i> over t]
//                     F^{(b-t)} E^{(a-t)};  negative-coefficient terms are
//                     dropped and the result is then flagged inexact
//   fe-to-ef          mirror image of ef-to-fe
//   sl3               F_i^{(a)} F_j^{(b)} F_i^{(c)} (|i-j|=1 cyclically) ->
//                     { F_j^{(l)} F_i^{(a+c)} F_j^{(b-l)} : 0<=l<=b };
//                     exact only in the cubic case a=b=c=1
//   serre2            F_i^{(a)} F_j^{(b)} F_i^{(c)} at the doubly-adjacent
//                     rank-two pairing with a+c >= 2b+1 -> the alternating
//                     family { (-1)^{s-a+1} F_i^{(s)} F_j^{(b)} F_i^{(a+c-s)}
//                     : 0<=s<=a+c, s != a }                             exact
//   wrap-restructure  trailing ascending block F_0^{(a_0)}...F_{n-1}^{(a_{n-1})}
//                     at the top weight -> F_0^{(a_0)} F_{n-1}^{(delta)}
//                     F_1^{(a_1)} ... F_{n-2}^{(a_{n-2})} F_{n-1}^{(a_{n-2})}
//   insert-fe (j)     1 -> F_j E_j inserted at a gap whose weight pairs
//                     negatively with alpha_j                           summand
//   absorb-e-into-block  E_j directly left of a full ascending block ending
//                     at the top weight; the E is absorbed, lowering the
//                     block's j-th power by one                         exact
//   absorb-loop       leftmost factor E_{n-1}^{(l)} of a top-weight
//                     endomorphism word is traded for the F-block
//                     F_0^{(N)}..F_{n-2}^{(N)}F_{n-1}^{(N-l)} (caller
//                     accounts for the prepended inverse loop)          exact
//
// Braid-symbolic rules (no weight anchor needed):
//
//   cancel-t          G G^{-1} -> (empty) for T/T'/phi/R'               exact
//   insert-t (i,e)    gap -> T_i^{e} T_i^{-e}                           exact
//   insert-phi (i,e)  gap -> phi_i^{e} phi_i^{-e}                       exact
//   braid3            T_i^e T_j^e T_i^e -> T_j^e T_i^e T_j^e (adjacent) exact
//   braid2            T_i^d T_j^e -> T_j^e T_i^d (non-adjacent)         exact
//   titjei / titjfi   T_x^e T_y^e E_g -> E_{g'} T_x^e T_y^e (adjacent
//                     x,y; g = x for e=+1, g = y for e=-1; g' the other) exact
//   titjei-rev        right-to-left form of the same law                exact
//   t0-def            T_0^{e} <-> phi_0^{-1} (T_1^{-1}..T_{n-1}^{-1}..T_1^{-1})
//   t0-def-alt        same with the reversed palindrome
//   t0-def-rev / t0-def-alt-rev   contraction directions
//   palindrome-flip   the two palindromes are equal words               exact
//   phi0-def          phi_1 phi_2 ... phi_{n-1} <-> phi_0^{-1}
//   e0-def / f0-def   E_0 <-> T_1^{-1} T_0^{-1} E_1 T_0 T_1 (and F)
//   loop-twist        phi_0 E_i phi_0^{-1} -> E_{i,1}, i in {1, n-1}
//   loop-twist-rev    expansion direction
//   loop-slide        T_i T_{i+1}^{-1} E_{i,1} T_{i+1} T_i^{-1} -> E_{i+1,1}
//   loop-slide-conj   E_{i,1} -> T_{i+1} T_i^{-1} E_{i+1,1} T_i T_{i+1}^{-1}
//   loop-conj         T_i^{-1} E_{j,1} T_i -> T_j^{-1} E_{i,1} T_j (adjacent)
//
// Positions are factor indices in the current word, counted from the left.

inline SummandSet apply_rule(const WordExpr& w, const std::string& rule,
                             std::size_t pos, const RuleCtx& ctx,
                             const std::vector<int>& args = {}) {
  using namespace ruledetail;
  const int n = ctx.n;
  SummandSet out;

  auto single = [&](WordExpr nw, Laurent mult = Laurent{1}, bool exact = true) {
    out.entries.push_back({std::move(mult), std::move(nw)});
    out.exact = exact;
    return out;
  };

  if (rule == "merge-dp") {
    const Factor& f = at(w, pos, "merge-dp");
    const Factor& g = at(w, pos + 1, "merge-dp");
    need(is_gen(f) && g.kind == f.kind && g.index == f.index,
         "merge-dp: needs two equal-kind equal-index divided powers");
    const int a = f.power, b = g.power;
    return single(splice(w, pos, 2, {make_gen(f.kind, f.index, a + b)}),
                  qbinom(a + b, a), true);
  }

  if (rule == "split-dp") {
    need(args.size() == 1, "split-dp: needs one argument (left power)");
    const Factor& f = at(w, pos, "split-dp");
    need(is_gen(f), "split-dp: needs a divided power");
    const int a1 = args[0], a2 = f.power - a1;
    need(a1 >= 1 && a2 >= 1, "split-dp: powers must be positive");
    return single(splice(w, pos, 1,
                         {make_gen(f.kind, f.index, a1),
                          make_gen(f.kind, f.index, a2)}),
                  Laurent{1}, false);
  }

  if (rule == "commute") {
    const Factor& f = at(w, pos, "commute");
    const Factor& g = at(w, pos + 1, "commute");
    if (is_gen(f) && is_gen(g)) {
      if (f.kind != g.kind) {
        need(f.index != g.index, "commute: same-index EF pair needs ef-to-fe");
      } else {
        need(root_pairing(f.index, g.index, n) == 0,
             "commute: same-kind pair must be non-adjacent");
      }
    } else {
      // Braid generator past a generator or loop generator.
      const bool fb = f.kind == FactorKind::T || f.kind == FactorKind::Tprime ||
                      f.kind == FactorKind::Phi;
      const bool gb = g.kind == FactorKind::T || g.kind == FactorKind::Tprime ||
                      g.kind == FactorKind::Phi;
      need(fb != gb, "commute: unsupported factor pair");
      const Factor& braid = fb ? f : g;
      const Factor& gen = fb ? g : f;
      need(is_gen(gen) || gen.kind == FactorKind::Eloop1 ||
               gen.kind == FactorKind::Floop_1,
           "commute: unsupported factor pair");
      need(root_pairing(braid.index, gen.index, n) == 0,
           "commute: indices must be non-adjacent");
    }
    return single(splice(w, pos, 2, {g, f}), Laurent{1}, true);
  }

  if (rule == "ef-to-fe" || rule == "fe-to-ef") {
    const bool ef = rule == "ef-to-fe";
    const Factor& f = at(w, pos, rule.c_str());
    const Factor& g = at(w, pos + 1, rule.c_str());
    const FactorKind first = ef ? FactorKind::E : FactorKind::F;
    const FactorKind second = ef ? FactorKind::F : FactorKind::E;
    need(f.kind == first && g.kind == second && f.index == g.index,
         rule + ": needs a same-index pair in the given order");
    const int i = f.index;
    const int a = ef ? f.power : g.power;  // E power
    const int b = ef ? g.power : f.power;  // F power
    const Weight v = weight_right_of(w, pos + 2, rule.c_str());
    const long lam = pairing(v, alpha(n, i));
    const long top = ef ? (a - b + lam) : (b - a - lam);
    bool dropped = false;
    for (int t = 0; t <= std::min(a, b); ++t) {
      Laurent c = qbinom_signed(top, t);
      if (c.is_zero()) continue;
      if (!c.is_positive()) {
        dropped = true;
        continue;
      }
      std::vector<Factor> repl;
      if (ef) {
        push_pow(repl, FactorKind::F, i, b - t);
        push_pow(repl, FactorKind::E, i, a - t);
      } else {
        push_pow(repl, FactorKind::E, i, a - t);
        push_pow(repl, FactorKind::F, i, b - t);
      }
      out.entries.push_back({std::move(c), splice(w, pos, 2, repl)});
    }
    out.exact = !dropped;
    return out;
  }

  if (rule == "sl3") {
    const Factor& f = at(w, pos, "sl3");
    const Factor& g = at(w, pos + 1, "sl3");
    const Factor& h = at(w, pos + 2, "sl3");
    need(f.kind == FactorKind::F && g.kind == FactorKind::F &&
             h.kind == FactorKind::F,
         "sl3: needs three F factors");
    need(f.index == h.index && root_pairing(f.index, g.index, n) == -1,
         "sl3: needs pattern F_i F_j F_i with adjacent i,j");
    const int i = f.index, j = g.index;
    const int a = f.power, b = g.power, c = h.power;
    for (int l = 0; l <= b; ++l) {
      std::vector<Factor> repl;
      push_pow(repl, FactorKind::F, j, l);
      push_pow(repl, FactorKind::F, i, a + c);
      push_pow(repl, FactorKind::F, j, b - l);
      out.entries.push_back({Laurent{1}, splice(w, pos, 3, repl)});
    }
    out.exact = (a == 1 && b == 1 && c == 1);
    return out;
  }

  if (rule == "serre2") {
    const Factor& f = at(w, pos, "serre2");
    const Factor& g = at(w, pos + 1, "serre2");
    const Factor& h = at(w, pos + 2, "serre2");
    need(f.kind == FactorKind::F && g.kind == FactorKind::F &&
             h.kind == FactorKind::F,
         "serre2: needs three F factors");
    need(f.index == h.index && root_pairing(f.index, g.index, n) == -2,
         "serre2: needs pattern F_i F_j F_i with doubly adjacent i,j");
    const int i = f.index, j = g.index;
    const int a = f.power, b = g.power, c = h.power;
    need(a + c >= 2 * b + 1, "serre2: needs outer power sum >= 2*middle+1");
    const int S = a + c;
    for (int s = 0; s <= S; ++s) {
      if (s == a) continue;
      std::vector<Factor> repl;
      push_pow(repl, FactorKind::F, i, s);
      push_pow(repl, FactorKind::F, j, b);
      push_pow(repl, FactorKind::F, i, S - s);
      const long sign = ((s - a) % 2 != 0) ? 1 : -1;
      out.entries.push_back({Laurent::monomial(sign, 0), splice(w, pos, 3, repl)});
    }
    out.exact = true;
    return out;
  }

  if (rule == "wrap-restructure") {
    // Trailing ascending-index block, anchored at the top weight.
    need(n >= 2, "wrap-restructure: needs n >= 2");
    need(pos + static_cast<std::size_t>(n) <= w.size(),
         "wrap-restructure: out of range");
    std::vector<int> a(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      const Factor& f = at(w, pos + static_cast<std::size_t>(t),
                           "wrap-restructure");
      need(f.kind == FactorKind::F && f.index == t,
           "wrap-restructure: needs a full ascending F block");
      a[static_cast<std::size_t>(t)] = f.power;
    }
    for (int t = 1; t < n; ++t)
      need(a[static_cast<std::size_t>(t - 1)] <= a[static_cast<std::size_t>(t)],
           "wrap-restructure: block powers must be ascending");
    const int delta = a[static_cast<std::size_t>(n - 1)] -
                      a[static_cast<std::size_t>(n - 2)];
    need(delta > 0, "wrap-restructure: top step must be positive");
    const Weight v = weight_right_of(w, pos + static_cast<std::size_t>(n),
                                     "wrap-restructure");
    for (int t = 0; t < n; ++t)
      need(v[static_cast<std::size_t>(t)] == (t == n - 1 ? ctx.N : 0),
           "wrap-restructure: block must be applied at the top weight");
    std::vector<Factor> repl;
    push_pow(repl, FactorKind::F, 0, a[0]);
    push_pow(repl, FactorKind::F, n - 1, delta);
    for (int t = 1; t <= n - 2; ++t)
      push_pow(repl, FactorKind::F, t, a[static_cast<std::size_t>(t)]);
    push_pow(repl, FactorKind::F, n - 1, a[static_cast<std::size_t>(n - 2)]);
    return single(splice(w, pos, static_cast<std::size_t>(n), repl),
                  Laurent{1}, n >= 3);
  }

  if (rule == "insert-fe") {
    need(args.size() == 1, "insert-fe: needs the index argument");
    const int j = args[0];
    need(j >= 0 && j < n, "insert-fe: index out of range");
    need(pos <= w.size(), "insert-fe: position out of range");
    const Weight v = weight_right_of(w, pos, "insert-fe");
    const long lam = pairing(v, alpha(n, j));
    need(lam <= -1, "insert-fe: needs <v,alpha_j> <= -1 at the gap");
    return single(splice(w, pos, 0, {make_F(j), make_E(j)}), Laurent{1},
                  false);
  }

  if (rule == "absorb-e-into-block") {
    const Factor& e = at(w, pos, "absorb-e-into-block");
    need(e.kind == FactorKind::E && e.power == 1,
         "absorb-e-into-block: needs a single E power");
    const int j = e.index;
    need(j >= 1 && j <= n - 2, "absorb-e-into-block: index must be interior");
    need(pos + 1 + static_cast<std::size_t>(n) <= w.size(),
         "absorb-e-into-block: out of range");
    std::vector<int> a(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      const Factor& f =
          at(w, pos + 1 + static_cast<std::size_t>(t), "absorb-e-into-block");
      need(f.kind == FactorKind::F && f.index == t,
           "absorb-e-into-block: needs a full ascending F block");
      a[static_cast<std::size_t>(t)] = f.power;
    }
    const Weight v = weight_right_of(
        w, pos + 1 + static_cast<std::size_t>(n), "absorb-e-into-block");
    for (int t = 0; t < n; ++t)
      need(v[static_cast<std::size_t>(t)] == (t == n - 1 ? ctx.N : 0),
           "absorb-e-into-block: block must be applied at the top weight");
    need(a[static_cast<std::size_t>(j)] >= 1,
         "absorb-e-into-block: vanishing target power");
    // The identity E_j F^{(a)} = F^{(..a_j-1..)} has unit coefficient exactly
    // when j is the largest ascent of the block and the tail is flat; other
    // positions pick up quantum-integer coefficients.
    need(a[static_cast<std::size_t>(j)] > a[static_cast<std::size_t>(j - 1)],
         "absorb-e-into-block: j must be an ascent");
    for (int t = j + 1; t < n; ++t)
      need(a[static_cast<std::size_t>(t)] == a[static_cast<std::size_t>(j)],
           "absorb-e-into-block: tail powers must be flat");
    std::vector<Factor> repl;
    for (int t = 0; t < n; ++t)
      push_pow(repl, FactorKind::F, t,
               a[static_cast<std::size_t>(t)] - (t == j ? 1 : 0));
    return single(splice(w, pos, 1 + static_cast<std::size_t>(n), repl),
                  Laurent{1}, true);
  }

  if (rule == "absorb-loop") {
    need(ctx.N >= 1, "absorb-loop: needs the total weight in context");
    need(pos == 0, "absorb-loop: applies to the leftmost factor");
    const Factor& e = at(w, 0, "absorb-loop");
    need(e.kind == FactorKind::E && e.index == n - 1,
         "absorb-loop: leftmost factor must be E at the last finite index");
    const int l = e.power;
    need(l >= 1 && l <= ctx.N, "absorb-loop: power out of range");
    std::vector<Factor> repl;
    for (int t = 0; t <= n - 2; ++t) push_pow(repl, FactorKind::F, t, ctx.N);
    push_pow(repl, FactorKind::F, n - 1, ctx.N - l);
    return single(splice(w, 0, 1, repl), Laurent{1}, true);
  }

  // ------------------------------------------------------------------
  // Braid-symbolic rules.
  // ------------------------------------------------------------------

  if (rule == "cancel-t") {
    const Factor& f = at(w, pos, "cancel-t");
    const Factor& g = at(w, pos + 1, "cancel-t");
    const bool invertible = f.kind == FactorKind::T ||
                            f.kind == FactorKind::Tprime ||
                            f.kind == FactorKind::Phi ||
                            f.kind == FactorKind::Rprime;
    need(invertible && same_braid_gen(f, g) && f.power == -g.power,
         "cancel-t: needs an adjacent inverse pair");
    return single(splice(w, pos, 2, {}), Laurent{1}, true);
  }

  if (rule == "insert-t" || rule == "insert-phi") {
    need(args.size() == 2, rule + ": needs (index, exponent) arguments");
    need(pos <= w.size(), rule + ": position out of range");
    const int i = args[0], e = args[1];
    need(e == 1 || e == -1, rule + ": exponent must be +-1");
    Factor a = rule == "insert-t" ? make_T(i, false, e < 0)
                                  : make_phi(i, e < 0);
    Factor b = inverted(a);
    return single(splice(w, pos, 0, {a, b}), Laurent{1}, true);
  }

  if (rule == "braid3") {
    const Factor& f = at(w, pos, "braid3");
    const Factor& g = at(w, pos + 1, "braid3");
    const Factor& h = at(w, pos + 2, "braid3");
    need((f.kind == FactorKind::T || f.kind == FactorKind::Tprime) &&
             g.kind == f.kind && h.kind == f.kind,
         "braid3: needs three braid factors of one kind");
    need(f.index == h.index && f.power == g.power && f.power == h.power,
         "braid3: needs pattern T_i^e T_j^e T_i^e");
    need(root_pairing(f.index, g.index, n) == -1,
         "braid3: indices must be simply adjacent");
    Factor a = g, b = f, c = g;
    return single(splice(w, pos, 3, {a, b, c}), Laurent{1}, true);
  }

  if (rule == "braid2") {
    const Factor& f = at(w, pos, "braid2");
    const Factor& g = at(w, pos + 1, "braid2");
    need((f.kind == FactorKind::T || f.kind == FactorKind::Tprime) &&
             g.kind == f.kind,
         "braid2: needs two braid factors of one kind");
    need(root_pairing(f.index, g.index, n) == 0,
         "braid2: indices must be non-adjacent");
    return single(splice(w, pos, 2, {g, f}), Laurent{1}, true);
  }

  if (rule == "titjei" || rule == "titjfi" || rule == "titjei-rev" ||
      rule == "titjfi-rev") {
    const bool isE = rule.rfind("titje", 0) == 0;
    const bool rev = rule.size() > 6;
    const FactorKind gk = isE ? FactorKind::E : FactorKind::F;
    if (!rev) {
      const Factor& f = at(w, pos, rule.c_str());
      const Factor& g = at(w, pos + 1, rule.c_str());
      const Factor& x = at(w, pos + 2, rule.c_str());
      need(is_braid_t(f) && is_braid_t(g) && x.kind == gk,
           rule + ": needs T T G pattern");
      need(f.power == g.power &&
               root_pairing(f.index, g.index, n) == -1,
           rule + ": braid pair must be adjacent with equal exponents");
      const int expect = f.power == 1 ? f.index : g.index;
      const int outidx = f.power == 1 ? g.index : f.index;
      need(x.index == expect, rule + ": generator index mismatch");
      return single(
          splice(w, pos, 3, {make_gen(gk, outidx, x.power), f, g}),
          Laurent{1}, true);
    }
    const Factor& x = at(w, pos, rule.c_str());
    const Factor& f = at(w, pos + 1, rule.c_str());
    const Factor& g = at(w, pos + 2, rule.c_str());
    need(x.kind == gk && is_braid_t(f) && is_braid_t(g),
         rule + ": needs G T T pattern");
    need(f.power == g.power && root_pairing(f.index, g.index, n) == -1,
         rule + ": braid pair must be adjacent with equal exponents");
    const int expect = f.power == 1 ? g.index : f.index;
    const int outidx = f.power == 1 ? f.index : g.index;
    need(x.index == expect, rule + ": generator index mismatch");
    return single(splice(w, pos, 3, {f, g, make_gen(gk, outidx, x.power)}),
                  Laurent{1}, true);
  }

  if (rule == "t0-def" || rule == "t0-def-alt") {
    need(n >= 3, rule + ": needs n >= 3");
    const Factor& f = at(w, pos, rule.c_str());
    need(f.kind == FactorKind::T && f.index == 0,
         rule + ": needs a T_0 factor");
    const auto pal = rule == "t0-def" ? palindrome_up(n) : palindrome_down(n);
    std::vector<Factor> repl;
    if (f.power == 1) {
      repl.push_back(make_phi(0, true));
      repl.insert(repl.end(), pal.begin(), pal.end());
    } else {
      repl = inverse_of(pal);
      repl.push_back(make_phi(0, false));
    }
    return single(splice(w, pos, 1, repl), Laurent{1}, true);
  }

  if (rule == "t0-def-rev" || rule == "t0-def-alt-rev") {
    need(n >= 3, rule + ": needs n >= 3");
    const bool alt = rule == "t0-def-alt-rev";
    const auto pal = alt ? palindrome_down(n) : palindrome_up(n);
    const std::size_t L = pal.size() + 1;
    need(pos + L <= w.size(), rule + ": out of range");
    // Try the direct orientation: phi_0^{-1} PAL -> T_0.
    auto matches = [&](const std::vector<Factor>& pat) {
      for (std::size_t t = 0; t < pat.size(); ++t)
        if (!(w.factors[pos + t] == pat[t])) return false;
      return true;
    };
    std::vector<Factor> pat1{make_phi(0, true)};
    pat1.insert(pat1.end(), pal.begin(), pal.end());
    if (matches(pat1)) return single(splice(w, pos, L, {make_T(0)}));
    std::vector<Factor> pat2 = ruledetail::inverse_of(pal);
    pat2.push_back(make_phi(0, false));
    if (matches(pat2))
      return single(splice(w, pos, L, {make_T(0, false, true)}));
    throw PatternMismatch(rule + ": no palindrome expansion at position");
  }

  if (rule == "palindrome-flip") {
    need(n >= 3, "palindrome-flip: needs n >= 3");
    const auto up = palindrome_up(n);
    const auto down = palindrome_down(n);
    const std::size_t L = up.size();
    need(pos + L <= w.size(), "palindrome-flip: out of range");
    auto matches = [&](const std::vector<Factor>& pat) {
      for (std::size_t t = 0; t < pat.size(); ++t)
        if (!(w.factors[pos + t] == pat[t])) return false;
      return true;
    };
    if (matches(up)) return single(splice(w, pos, L, down));
    if (matches(down)) return single(splice(w, pos, L, up));
    const auto upi = inverse_of(up), downi = inverse_of(down);
    if (matches(upi)) return single(splice(w, pos, L, downi));
    if (matches(downi)) return single(splice(w, pos, L, upi));
    throw PatternMismatch("palindrome-flip: no palindrome at position");
  }

  if (rule == "phi0-def") {
    need(n >= 2, "phi0-def: needs n >= 2");
    need(pos + static_cast<std::size_t>(n - 1) <= w.size(),
         "phi0-def: out of range");
    for (int t = 0; t < n - 1; ++t) {
      const Factor& f = w.factors[pos + static_cast<std::size_t>(t)];
      need(f.kind == FactorKind::Phi && f.index == t + 1 && f.power == 1,
           "phi0-def: needs phi_1 ... phi_{n-1}");
    }
    return single(splice(w, pos, static_cast<std::size_t>(n - 1),
                         {make_phi(0, true)}),
                  Laurent{1}, true);
  }
  if (rule == "phi0-def-rev") {
    const Factor& f = at(w, pos, "phi0-def-rev");
    need(f.kind == FactorKind::Phi && f.index == 0 && f.power == -1,
         "phi0-def-rev: needs phi_0^{-1}");
    std::vector<Factor> repl;
    for (int t = 1; t <= n - 1; ++t) repl.push_back(make_phi(t, false));
    return single(splice(w, pos, 1, repl), Laurent{1}, true);
  }

  if (rule == "e0-def" || rule == "f0-def" || rule == "e0-def-rev" ||
      rule == "f0-def-rev") {
    need(n >= 3, rule + ": needs n >= 3");
    const bool isE = rule[0] == 'e';
    const bool rev = rule.size() > 6;
    const FactorKind gk = isE ? FactorKind::E : FactorKind::F;
    std::vector<Factor> expansion{make_T(1, false, true),
                                  make_T(0, false, true),
                                  make_gen(gk, 1, 1), make_T(0), make_T(1)};
    if (!rev) {
      const Factor& f = at(w, pos, rule.c_str());
      need(f.kind == gk && f.index == 0 && f.power == 1,
           rule + ": needs the affine generator at power one");
      return single(splice(w, pos, 1, expansion), Laurent{1}, true);
    }
    need(pos + expansion.size() <= w.size(), rule + ": out of range");
    for (std::size_t t = 0; t < expansion.size(); ++t)
      need(w.factors[pos + t] == expansion[t],
           rule + ": expansion pattern mismatch");
    return single(splice(w, pos, expansion.size(), {make_gen(gk, 0, 1)}),
                  Laurent{1}, true);
  }

  if (rule == "loop-twist" || rule == "loop-twist-rev") {
    need(n >= 3, rule + ": needs n >= 3");
    if (rule == "loop-twist") {
      const Factor& a = at(w, pos, "loop-twist");
      const Factor& b = at(w, pos + 1, "loop-twist");
      const Factor& c = at(w, pos + 2, "loop-twist");
      need(a.kind == FactorKind::Phi && a.index == 0 && a.power == 1,
           "loop-twist: needs phi_0 on the left");
      need(c.kind == FactorKind::Phi && c.index == 0 && c.power == -1,
           "loop-twist: needs phi_0^{-1} on the right");
      need(b.kind == FactorKind::E && b.power == 1 &&
               (b.index == 1 || b.index == n - 1),
           "loop-twist: middle must be E_1 or E_{n-1}");
      return single(splice(w, pos, 3, {make_gen(FactorKind::Eloop1, b.index)}),
                    Laurent{1}, true);
    }
    const Factor& f = at(w, pos, "loop-twist-rev");
    need(f.kind == FactorKind::Eloop1 && (f.index == 1 || f.index == n - 1),
         "loop-twist-rev: needs a loop E at index 1 or n-1");
    return single(splice(w, pos, 1,
                         {make_phi(0, false), make_E(f.index),
                          make_phi(0, true)}),
                  Laurent{1}, true);
  }

  if (rule == "loop-slide" || rule == "loop-slide-conj") {
    need(n >= 3, rule + ": needs n >= 3");
    if (rule == "loop-slide") {
      need(pos + 5 <= w.size(), "loop-slide: out of range");
      const Factor& a = w.factors[pos];
      const Factor& b = w.factors[pos + 1];
      const Factor& c = w.factors[pos + 2];
      const Factor& d = w.factors[pos + 3];
      const Factor& e = w.factors[pos + 4];
      need(c.kind == FactorKind::Eloop1, "loop-slide: needs a loop E core");
      const int i = c.index;
      need(i >= 1 && i <= n - 2, "loop-slide: core index out of range");
      need(a == make_T(i) && b == make_T(i + 1, false, true) &&
               d == make_T(i + 1) && e == make_T(i, false, true),
           "loop-slide: conjugation pattern mismatch");
      return single(splice(w, pos, 5, {make_gen(FactorKind::Eloop1, i + 1)}),
                    Laurent{1}, true);
    }
    const Factor& f = at(w, pos, "loop-slide-conj");
    need(f.kind == FactorKind::Eloop1, "loop-slide-conj: needs a loop E");
    const int i = f.index;
    need(i >= 1 && i <= n - 2, "loop-slide-conj: index out of range");
    return single(
        splice(w, pos, 1,
               {make_T(i + 1), make_T(i, false, true),
                make_gen(FactorKind::Eloop1, i + 1), make_T(i),
                make_T(i + 1, false, true)}),
        Laurent{1}, true);
  }

  if (rule == "loop-conj") {
    need(pos + 3 <= w.size(), "loop-conj: out of range");
    const Factor& a = w.factors[pos];
    const Factor& b = w.factors[pos + 1];
    const Factor& c = w.factors[pos + 2];
    need(a.kind == FactorKind::T && a.power == -1 &&
             b.kind == FactorKind::Eloop1 && c.kind == FactorKind::T &&
             c.power == 1 && a.index == c.index,
         "loop-conj: needs T_i^{-1} E_{j,1} T_i");
    const int i = a.index, j = b.index;
    need(root_pairing(i, j, n) == -1, "loop-conj: indices must be adjacent");
    return single(splice(w, pos, 3,
                         {make_T(j, false, true),
                          make_gen(FactorKind::Eloop1, i), make_T(j)}),
                  Laurent{1}, true);
  }

  throw PatternMismatch("unknown rule: " + rule);
}

// ---------------------------------------------------------------------------
// Derivation scripts: a plain-text step format for replayable rewrites.
//
//   # comment
//   name: <identifier>
//   config n=3 N=2
//   start: E0
//   step: e0-def @ 0
//   step: cancel-t @ 2 in 0
//   step: insert-t(1,-1) @ 4
//   finish: T2^-1 T0^-1 E2 T0 T2
//   finish: [2] * 1_(2,0,0)
//
// Steps apply to entry `in <e>` (default 0) of the running SummandSet; a
// step's output entries replace the consumed entry in place (multiplicities
// compose). `finish` lines list the expected final entries; the comparison
// is order-insensitive. Multiplicity syntax: `[c]` = quantum integer c,
// plain integers, or absent (= 1).
// ---------------------------------------------------------------------------

struct ScriptStep {
  std::string rule;
  std::vector<int> args;
  std::size_t pos = 0;
  std::size_t entry = 0;
  int line = 0;
};

struct ProofScript {
  std::string name;
  int n = 2;
  int N = 0;
  WordExpr start;
  std::vector<ScriptStep> steps;
  std::vector<Summand> finish;
};

inline ProofScript parse_script(const std::string& text) {
  ProofScript s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw SyntaxError("script line " + std::to_string(lineno) + ": " + msg,
                      static_cast<std::size_t>(lineno));
  };
  auto trim = [](std::string t) {
    const char* ws = " \t\r";
    const auto b = t.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = t.find_last_not_of(ws);
    return t.substr(b, e - b + 1);
  };
  bool seen_start = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("name:", 0) == 0) {
      s.name = trim(line.substr(5));
      continue;
    }
    if (line.rfind("config", 0) == 0) {
      std::istringstream cfg(line.substr(6));
      std::string tok;
      while (cfg >> tok) {
        if (tok.rfind("n=", 0) == 0)
          s.n = std::atoi(tok.c_str() + 2);
        else if (tok.rfind("N=", 0) == 0)
          s.N = std::atoi(tok.c_str() + 2);
        else
          fail("unknown config token '" + tok + "'");
      }
      continue;
    }
    if (line.rfind("start:", 0) == 0) {
      s.start = parse_word(trim(line.substr(6)), s.n);
      seen_start = true;
      continue;
    }
    if (line.rfind("step:", 0) == 0) {
      std::string body = trim(line.substr(5));
      ScriptStep st;
      st.line = lineno;
      const auto at_pos = body.find('@');
      if (at_pos == std::string::npos) fail("step needs '@ <position>'");
      std::string head = trim(body.substr(0, at_pos));
      std::string tail = trim(body.substr(at_pos + 1));
      const auto paren = head.find('(');
      if (paren != std::string::npos) {
        if (head.back() != ')') fail("unbalanced rule arguments");
        std::string argstr = head.substr(paren + 1,
                                         head.size() - paren - 2);
        head = trim(head.substr(0, paren));
        std::istringstream as(argstr);
        std::string a;
        while (std::getline(as, a, ','))
          st.args.push_back(std::atoi(trim(a).c_str()));
      }
      st.rule = head;
      std::istringstream ts(tail);
      long p = -1;
      if (!(ts >> p) || p < 0) fail("bad step position");
      st.pos = static_cast<std::size_t>(p);
      std::string kw;
      if (ts >> kw) {
        long e = -1;
        if (kw != "in" || !(ts >> e) || e < 0) fail("bad step entry clause");
        st.entry = static_cast<std::size_t>(e);
      }
      s.steps.push_back(std::move(st));
      continue;
    }
    if (line.rfind("finish:", 0) == 0) {
      std::string body = trim(line.substr(7));
      Laurent mult{1};
      const auto star = body.find('*');
      if (star != std::string::npos) {
        std::string ms = trim(body.substr(0, star));
        body = trim(body.substr(star + 1));
        if (!ms.empty() && ms.front() == '[' && ms.back() == ']') {
          mult = qint(std::atol(ms.substr(1, ms.size() - 2).c_str()));
        } else {
          mult = Laurent(std::atol(ms.c_str()));
        }
        if (mult.is_zero()) fail("zero finish multiplicity");
      }
      s.finish.push_back({mult, parse_word(body, s.n)});
      continue;
    }
    fail("unrecognized line '" + line + "'");
  }
  if (!seen_start) {
    lineno = 0;
    fail("script has no start line");
  }
  return s;
}

struct ReplayReport {
  bool ok = false;
  std::string error;
  int failed_line = 0;       // script line of the failing step (0 = none)
  std::size_t steps_run = 0;
  bool all_exact = true;
  SummandSet final;
};

inline ReplayReport replay(const ProofScript& s) {
  ReplayReport rep;
  RuleCtx ctx{s.n, s.N};
  SummandSet cur;
  cur.entries.push_back({Laurent{1}, s.start});
  for (const auto& st : s.steps) {
    try {
      if (st.entry >= cur.entries.size())
        throw PatternMismatch("step entry index out of range");
      Summand target = cur.entries[st.entry];
      SummandSet repl =
          apply_rule(target.word, st.rule, st.pos, ctx, st.args);
      if (!repl.exact) rep.all_exact = false;
      std::vector<Summand> next;
      for (std::size_t i = 0; i < cur.entries.size(); ++i) {
        if (i != st.entry) {
          next.push_back(cur.entries[i]);
          continue;
        }
        for (const auto& e : repl.entries)
          next.push_back({target.mult * e.mult, e.word});
      }
      cur.entries = std::move(next);
      ++rep.steps_run;
    } catch (const std::exception& ex) {
      rep.error = std::string("step '" + st.rule + "': ") + ex.what();
      rep.failed_line = st.line;
      rep.final = cur;
      return rep;
    }
  }
  rep.final = cur;
  if (!s.finish.empty()) {
    auto key = [](const Summand& e) {
      return e.mult.to_string() + " * " + word_to_string(e.word);
    };
    std::vector<std::string> got, want;
    for (const auto& e : cur.entries) got.push_back(key(e));
    for (const auto& e : s.finish) want.push_back(key(e));
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) {
      rep.error = "final summands differ from declared finish";
      std::string detail = "; got:";
      for (const auto& g : got) detail += " {" + g + "}";
      detail += " want:";
      for (const auto& t : want) detail += " {" + t + "}";
      rep.error += detail;
      return rep;
    }
  }
  rep.ok = true;
  return rep;
}

}  // namespace qaff
