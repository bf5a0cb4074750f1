#pragma once

// Exact matrix models of the generator action on tensor products of
// exterior (skew) or symmetric powers of an m-dimensional space. A basis
// vector is a tuple of columns-per-slot; E_i moves one column from slot i
// to slot i+1, F_i the reverse, with q-power entries controlled by a
// Convention (selected by the bootstrap, frozen in data/convention.json).
// The affine pair E_0/F_0 is realized by conjugating a finite generator
// with the cyclic rotation of slot tuples.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qaff/laurent.hpp"
#include "qaff/linalg.hpp"
#include "qaff/weight.hpp"
#include "qaff/word.hpp"

namespace qaff {

struct ModelConfig {
  Side side = Side::skew;
  int n = 2;  // number of slots
  int m = 1;  // column count per slot
  int N = 1;  // total weight
  // The convention search runs one cell at n = N, where the finite-type
  // relations are still well-posed; everything else insists on n > N.
  bool relax_n_gt_N = false;

  void validate() const {
    if (n < 2) throw ConfigMismatch("need n >= 2");
    if (m < 1) throw ConfigMismatch("need m >= 1");
    if (relax_n_gt_N) {
      if (n < N) throw ConfigMismatch("need n >= N even in relaxed mode");
    } else {
      require_n_gt_N(n, N);
    }
  }
};

// The q-exponent convention for E/F matrix entries. The exponent is a
// signed count of columns strictly to one side of the moved column:
//   exponent_E(B,i,c) = sign * sum_{c' ? c} (mult_{i+1}(c') - mult_i(c'))
//   exponent_F(B,i,c) = sign * sum_{c' ¿ c} (mult_i(c') - mult_{i+1}(c'))
// where ? is > if e_counts_greater else <, ¿ is the opposite comparator,
// and multiplicities are taken in the source basis vector. The wrap weight
// e(B) used by the slot rotation is a signed pair count across the wrap.
struct Convention {
  bool e_counts_greater = true;
  int sign = -1;
  int wrap_gt = 0;  // coefficient of #{(c in slot1-moving, c' in rest): c' > c}
  int wrap_lt = 0;  // coefficient of the c' < c count
  bool trivial = false;  // force all exponents (and e) to zero

  std::string key() const {
    if (trivial) return "trivial";
    std::string s = e_counts_greater ? "gt" : "lt";
    s += sign > 0 ? "+" : "-";
    if (wrap_gt || wrap_lt)
      s += ",w" + std::to_string(wrap_gt) + "," + std::to_string(wrap_lt);
    return s;
  }
};

// One slot = weakly increasing column list (strictly increasing on the skew
// side). A basis vector is the tuple of slots.
using BasisVector = std::vector<std::vector<int>>;

inline std::string basis_vector_to_string(const BasisVector& b) {
  std::string s = "(";
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) s += ",";
    s += "{";
    for (std::size_t j = 0; j < b[i].size(); ++j) {
      if (j) s += ",";
      s += std::to_string(b[i][j]);
    }
    s += "}";
  }
  return s + ")";
}

namespace detail {

inline void gen_slot(int m, int size, bool strict, int min_col,
                     std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
  if (size == 0) {
    out.push_back(cur);
    return;
  }
  for (int c = min_col; c <= m; ++c) {
    cur.push_back(c);
    gen_slot(m, size - 1, strict, strict ? c + 1 : c, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<int>> slot_options(Side side, int m, int size) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  gen_slot(m, size, side == Side::skew, 1, cur, out);
  return out;
}

}  // namespace detail

// All basis vectors for weight k, ordered lexicographically slot-by-slot
// (each slot as its increasing column list). Empty when k is the zero
// object; may also be empty when some slot admits no filling (skew k_i > m).
inline std::vector<BasisVector> enumerate_basis(const ModelConfig& cfg,
                                                const Weight& k) {
  cfg.validate();
  if (static_cast<int>(k.size()) != cfg.n)
    throw ConfigMismatch("weight arity " + std::to_string(k.size()) +
                         " does not match n=" + std::to_string(cfg.n));
  if (!is_nonzero_object(k, cfg.N)) return {};
  std::vector<std::vector<std::vector<int>>> per_slot;
  per_slot.reserve(k.size());
  for (int ki : k) {
    per_slot.push_back(detail::slot_options(cfg.side, cfg.m, ki));
    if (per_slot.back().empty()) return {};
  }
  std::vector<BasisVector> out;
  BasisVector cur(k.size());
  std::function<void(std::size_t)> rec = [&](std::size_t slot) {
    if (slot == per_slot.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& opt : per_slot[slot]) {
      cur[slot] = opt;
      rec(slot + 1);
    }
  };
  rec(0);
  return out;
}

inline int basis_index(const std::vector<BasisVector>& basis,
                       const BasisVector& b) {
  auto it = std::lower_bound(basis.begin(), basis.end(), b);
  if (it == basis.end() || *it != b) return -1;
  return static_cast<int>(it - basis.begin());
}

struct Operator {
  Weight source, target;
  Matrix mat;  // rows indexed by target basis, cols by source basis
  bool zero_object = false;  // flow hit a zero object

  bool is_empty() const { return zero_object || mat.empty(); }
};

inline Operator compose(const Operator& second, const Operator& first) {
  if (second.zero_object || first.zero_object)
    return Operator{first.source, second.target, Matrix(), true};
  if (second.source != first.target)
    throw ConfigMismatch("composition weight mismatch: " +
                         weight_to_string(second.source) + " vs " +
                         weight_to_string(first.target));
  return Operator{first.source, second.target, second.mat * first.mat, false};
}

namespace detail {

inline int mult_of(const std::vector<int>& slot, int c) {
  return static_cast<int>(std::count(slot.begin(), slot.end(), c));
}

// Signed side-count exponent for a single-column move between slots a -> b
// of basis vector B (source state). `greater` selects the comparator for
// this direction; `from` and `to` are slot indices (0-based).
inline long move_exponent(const Convention& conv, const BasisVector& B,
                          int m, int from, int to, int c, bool greater) {
  if (conv.trivial) return 0;
  long acc = 0;
  for (int cp = 1; cp <= m; ++cp) {
    const bool in_range = greater ? (cp > c) : (cp < c);
    if (!in_range) continue;
    acc += mult_of(B[to], cp) - mult_of(B[from], cp);
  }
  return conv.sign * acc;
}

inline std::vector<int> with_removed(const std::vector<int>& slot, int c) {
  std::vector<int> out = slot;
  out.erase(std::find(out.begin(), out.end(), c));
  return out;
}

inline std::vector<int> with_added(const std::vector<int>& slot, int c) {
  std::vector<int> out = slot;
  out.insert(std::upper_bound(out.begin(), out.end(), c), c);
  return out;
}

// Single E_i / F_i move (finite i, 1-based), power 1.
inline Operator single_EF(const ModelConfig& cfg, const Convention& conv,
                          int i, bool is_E, const Weight& k) {
  const Weight a = alpha(cfg.n, i);
  const Weight tgt = is_E ? add(k, a) : sub(k, a);
  auto src_basis = enumerate_basis(cfg, k);
  auto tgt_basis = enumerate_basis(cfg, tgt);
  if (!is_nonzero_object(k, cfg.N) || !is_nonzero_object(tgt, cfg.N))
    return Operator{k, tgt, Matrix(), true};
  Operator op{k, tgt,
              Matrix(static_cast<int>(tgt_basis.size()),
                     static_cast<int>(src_basis.size())),
              false};
  // E moves slot i -> i+1; F moves slot i+1 -> i (0-based below).
  const int from = is_E ? i - 1 : i;
  const int to = is_E ? i : i - 1;
  for (std::size_t col = 0; col < src_basis.size(); ++col) {
    const BasisVector& B = src_basis[col];
    int last = -1;
    for (int c : B[from]) {
      if (c == last) continue;  // one term per distinct column value
      last = c;
      if (cfg.side == Side::skew && mult_of(B[to], c) > 0) continue;
      BasisVector Bp = B;
      Bp[from] = with_removed(B[from], c);
      Bp[to] = with_added(B[to], c);
      const int row = basis_index(tgt_basis, Bp);
      if (row < 0) throw ConfigMismatch("internal: moved vector not in basis");
      // The from/to swap already gives F the negated summand of E.
      const bool greater = is_E == conv.e_counts_greater;
      const long w = move_exponent(conv, B, cfg.m, from, to, c, greater);
      Laurent entry = Laurent::monomial(1, static_cast<int>(w));
      if (cfg.side == Side::symmetric) {
        // Arrival multiplicity factor; the trivial (classical, q = 1)
        // convention flattens it to the plain integer count.
        const int r1 = mult_of(B[to], c) + 1;
        entry = entry * (conv.trivial ? Laurent::monomial(r1, 0) : qint(r1));
      }
      op.mat.at(row, static_cast<int>(col)) += entry;
    }
  }
  return op;
}

}  // namespace detail

// E_i^{(a)} / F_i^{(a)} for finite i in 1..n-1 as an exact matrix: the a-th
// matrix power divided entrywise by [a]!; inexact division signals a bug.
inline Operator build_EF(const ModelConfig& cfg, const Convention& conv, int i,
                         int power, bool is_E, const Weight& k) {
  cfg.validate();
  if (i < 1 || i >= cfg.n)
    throw ConfigMismatch("finite root index out of range: " +
                         std::to_string(i));
  if (power < 0) throw ConfigMismatch("negative divided power");
  const Weight a = alpha(cfg.n, i);
  Weight tgt = k;
  for (int t = 0; t < power; ++t) tgt = is_E ? add(tgt, a) : sub(tgt, a);
  if (!is_nonzero_object(k, cfg.N) || !is_nonzero_object(tgt, cfg.N))
    return Operator{k, tgt, Matrix(), true};
  if (power == 0) {
    auto basis = enumerate_basis(cfg, k);
    return Operator{k, k, Matrix::identity(static_cast<int>(basis.size())),
                    false};
  }
  Operator acc = detail::single_EF(cfg, conv, i, is_E, k);
  Weight cur = acc.target;
  for (int t = 1; t < power; ++t) {
    if (!is_nonzero_object(cur, cfg.N)) {
      // Intermediate zero object: the composite is the zero matrix.
      auto sb = enumerate_basis(cfg, k);
      auto tb = enumerate_basis(cfg, tgt);
      return Operator{k, tgt,
                      Matrix(static_cast<int>(tb.size()),
                             static_cast<int>(sb.size())),
                      false};
    }
    acc = compose(detail::single_EF(cfg, conv, i, is_E, cur), acc);
    cur = acc.target;
  }
  // The trivial convention is the integral classical model: its entries are
  // bare integers, so the divided power divides by a! (= [a]! at q = 1)
  // instead of the quantum factorial.
  Laurent fact;
  if (conv.trivial) {
    Int f = 1;
    for (int t = 2; t <= power; ++t) f *= t;
    fact = Laurent::monomial(f, 0);
  } else {
    fact = qfact(power);
  }
  acc.mat = acc.mat.map([&](const Laurent& x) { return x.divide_exact(fact); });
  return acc;
}

// Cyclic slot rotation K(k) -> K(rotate(k)): (M_1,...,M_n) -> (M_2,...,M_n,M_1)
// with entry q^{e(B)}; e(B) counts (column in the wrapped slot, column in the
// other slots) pairs with the convention's wrap coefficients.
inline Operator rotation_op(const ModelConfig& cfg, const Convention& conv,
                            const Weight& k) {
  cfg.validate();
  const Weight tgt = rotate(k);
  auto src_basis = enumerate_basis(cfg, k);
  auto tgt_basis = enumerate_basis(cfg, tgt);
  if (!is_nonzero_object(k, cfg.N))
    return Operator{k, tgt, Matrix(), true};
  Operator op{k, tgt,
              Matrix(static_cast<int>(tgt_basis.size()),
                     static_cast<int>(src_basis.size())),
              false};
  for (std::size_t col = 0; col < src_basis.size(); ++col) {
    const BasisVector& B = src_basis[col];
    BasisVector Bp(B.begin() + 1, B.end());
    Bp.push_back(B.front());
    const int row = basis_index(tgt_basis, Bp);
    if (row < 0) throw ConfigMismatch("internal: rotated vector not in basis");
    long e = 0;
    if (!conv.trivial && (conv.wrap_gt || conv.wrap_lt)) {
      for (int c : B.front())
        for (std::size_t s = 1; s < B.size(); ++s)
          for (int cp : B[s]) {
            if (cp > c) e += conv.wrap_gt;
            if (cp < c) e += conv.wrap_lt;
          }
    }
    op.mat.at(row, static_cast<int>(col)) =
        Laurent::monomial(1, static_cast<int>(e));
  }
  return op;
}

// Inverse of rotation_op at k: maps K(rotate(k)) -> K(k). Monomial
// permutation matrices invert by transposing and inverting each entry.
inline Operator rotation_op_inverse(const ModelConfig& cfg,
                                    const Convention& conv, const Weight& k) {
  Operator rho = rotation_op(cfg, conv, k);
  if (rho.zero_object) return Operator{rho.target, k, Matrix(), true};
  Operator inv{rho.target, k, Matrix(rho.mat.cols(), rho.mat.rows()), false};
  for (int r = 0; r < rho.mat.rows(); ++r)
    for (int c = 0; c < rho.mat.cols(); ++c) {
      const Laurent& x = rho.mat.at(r, c);
      if (!x.is_zero()) inv.mat.at(c, r) = unit_inverse(x);
    }
  return inv;
}

// E_0^{(a)} / F_0^{(a)}: conjugate E_{n-1}^{(a)} / F_{n-1}^{(a)} by the slot
// rotation, so that the weight flow equals a*alpha_0.
inline Operator build_E0F0(const ModelConfig& cfg, const Convention& conv,
                           int power, bool is_E, const Weight& k) {
  cfg.validate();
  const Weight a0 = alpha(cfg.n, 0);
  Weight tgt = k;
  for (int t = 0; t < power; ++t) tgt = is_E ? add(tgt, a0) : sub(tgt, a0);
  if (!is_nonzero_object(k, cfg.N) || !is_nonzero_object(tgt, cfg.N))
    return Operator{k, tgt, Matrix(), true};
  if (power == 0) {
    auto basis = enumerate_basis(cfg, k);
    return Operator{k, k, Matrix::identity(static_cast<int>(basis.size())),
                    false};
  }
  Operator rho = rotation_op(cfg, conv, k);
  Operator mid = build_EF(cfg, conv, cfg.n - 1, power, is_E, rho.target);
  Operator rho_inv = rotation_op_inverse(cfg, conv, tgt);
  return compose(rho_inv, compose(mid, rho));
}

// Either family by root index in the affine set.
inline Operator build_gen(const ModelConfig& cfg, const Convention& conv,
                          int i, int power, bool is_E, const Weight& k) {
  return i == 0 ? build_E0F0(cfg, conv, power, is_E, k)
                : build_EF(cfg, conv, i, power, is_E, k);
}

// Braid-type factors (T, T', R') are evaluated by a resolver supplied by the
// braid layer; kmodel stays independent of it.
using BraidResolver = std::function<Operator(
    const ModelConfig&, const Convention&, const Factor&, const Weight&)>;

// Evaluate a word as an exact matrix, composing factors right to left.
// Loop generators and phi are symbolic-only and always throw.
inline Operator evaluate(const ModelConfig& cfg, const Convention& conv,
                         const WordExpr& w, const Weight& source,
                         const BraidResolver& braid = nullptr) {
  cfg.validate();
  if (static_cast<int>(source.size()) != cfg.n)
    throw ConfigMismatch("source weight arity mismatch");
  auto flow = weight_flow(w, source, cfg.N);
  if (!flow) {
    Weight tgt = source;
    for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it)
      tgt = factor_target(*it, tgt);
    return Operator{source, tgt, Matrix(), true};
  }
  auto basis = enumerate_basis(cfg, source);
  Operator acc{source, source,
               Matrix::identity(static_cast<int>(basis.size())), false};
  for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
    const Factor& f = *it;
    switch (f.kind) {
      case FactorKind::Idem:
        if (f.idem != acc.target)
          return Operator{source, acc.target, Matrix(), true};
        break;
      case FactorKind::Shift:
        acc.mat = acc.mat.scaled(shift_triple_class(cfg.side, f.shift[0],
                                                    f.shift[1], f.shift[2]));
        break;
      case FactorKind::E:
      case FactorKind::F:
        acc = compose(build_gen(cfg, conv, f.index, f.power,
                                f.kind == FactorKind::E, acc.target),
                      acc);
        break;
      case FactorKind::T:
      case FactorKind::Tprime:
      case FactorKind::Rprime:
        if (!braid)
          throw UnsupportedFactor("no braid resolver for factor " +
                                  factor_to_string(f));
        acc = compose(braid(cfg, conv, f, acc.target), acc);
        break;
      case FactorKind::Eloop1:
      case FactorKind::Floop_1:
      case FactorKind::Phi:
        throw UnsupportedFactor("symbolic-only factor in evaluation: " +
                                factor_to_string(f));
    }
    if (acc.zero_object) return acc;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Relation checks.

struct CheckResult {
  bool pass = true;
  std::string witness;
};

namespace detail {

inline CheckResult compare_ops(const Operator& lhs, const Operator& rhs,
                               const std::vector<BasisVector>& rows,
                               const std::vector<BasisVector>& cols,
                               const std::string& label) {
  if (lhs.zero_object != rhs.zero_object)
    return {false, label + ": zero-object mismatch"};
  if (lhs.zero_object) return {true, {}};
  if (lhs.mat.rows() != rhs.mat.rows() || lhs.mat.cols() != rhs.mat.cols())
    return {false, label + ": shape mismatch"};
  for (int r = 0; r < lhs.mat.rows(); ++r)
    for (int c = 0; c < lhs.mat.cols(); ++c)
      if (lhs.mat.at(r, c) != rhs.mat.at(r, c)) {
        const Laurent d = lhs.mat.at(r, c) - rhs.mat.at(r, c);
        std::string w = label + ": entry (";
        w += (r < static_cast<int>(rows.size()))
                 ? basis_vector_to_string(rows[static_cast<std::size_t>(r)])
                 : std::to_string(r);
        w += ", ";
        w += (c < static_cast<int>(cols.size()))
                 ? basis_vector_to_string(cols[static_cast<std::size_t>(c)])
                 : std::to_string(c);
        w += ") differs by " + d.to_string();
        return {false, w};
      }
  return {true, {}};
}

}  // namespace detail

// relation ids: "sl2" (params: i, k), "EiFj-commute" (i, j, k),
// "serre" / "serre-F" (i, j, k), "divided-power" (i, a, k, is_E).
struct UnknownRelation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RelationParams {
  int i = 1;
  int j = -1;
  int a = 1;
  bool is_E = true;
  Weight k;
};

inline CheckResult check_relation(const ModelConfig& cfg,
                                  const Convention& conv,
                                  const std::string& id,
                                  const RelationParams& p) {
  cfg.validate();
  const auto basis_k = enumerate_basis(cfg, p.k);
  const std::string label = id + " i=" + std::to_string(p.i) +
                            (p.j >= 0 ? " j=" + std::to_string(p.j) : "") +
                            " k=" + weight_to_string(p.k) + " " +
                            to_string(cfg.side);
  auto gen = [&](int idx, int pw, bool e, const Weight& at) {
    return build_gen(cfg, conv, idx, pw, e, at);
  };
  if (id == "sl2") {
    const long lam = pairing(p.k, alpha(cfg.n, p.i));
    const Weight up = add(p.k, alpha(cfg.n, p.i));
    const Weight dn = sub(p.k, alpha(cfg.n, p.i));
    Operator EF = compose(gen(p.i, 1, true, dn), gen(p.i, 1, false, p.k));
    Operator FE = compose(gen(p.i, 1, false, up), gen(p.i, 1, true, p.k));
    const int d = static_cast<int>(basis_k.size());
    auto mat_or_zero = [&](const Operator& o) {
      return o.zero_object ? Matrix(d, d) : o.mat;
    };
    Matrix l = mat_or_zero(EF);
    Matrix r = mat_or_zero(FE);
    // E F = F E + [lam] id  (lam >= 0); mirrored for lam <= 0.
    Matrix extra = Matrix::identity(d).scaled(qint(lam >= 0 ? lam : -lam));
    if (lam >= 0)
      r = r + extra;
    else
      l = l + extra;
    Operator L{p.k, p.k, l, false}, R{p.k, p.k, r, false};
    return detail::compare_ops(L, R, basis_k, basis_k, label);
  }
  if (id == "EiFj-commute") {
    if (p.j < 0 || p.j == p.i) throw UnknownRelation("need j != i");
    const Weight up = add(p.k, alpha(cfg.n, p.i));
    const Weight dn = sub(p.k, alpha(cfg.n, p.j));
    Operator EF = compose(gen(p.i, 1, true, dn), gen(p.j, 1, false, p.k));
    Operator FE = compose(gen(p.j, 1, false, up), gen(p.i, 1, true, p.k));
    const auto rows = enumerate_basis(cfg, EF.target);
    return detail::compare_ops(EF, FE, rows, basis_k, label);
  }
  if (id == "serre" || id == "serre-F") {
    if (p.j < 0) throw UnknownRelation("serre needs j");
    const bool e = (id == "serre");
    const Weight ai = alpha(cfg.n, p.i), aj = alpha(cfg.n, p.j);
    auto step = [&](const Weight& at, int idx, int pw) {
      return gen(idx, pw, e, at);
    };
    auto move = [&](const Weight& at, int idx, int pw) {
      Weight t = at;
      const Weight& al = idx == p.i ? ai : aj;
      for (int q = 0; q < pw; ++q) t = e ? add(t, al) : sub(t, al);
      return t;
    };
    // E_i^{(2)} E_j + E_j E_i^{(2)} = E_i E_j E_i  (and the F mirror).
    Weight k1 = move(p.k, p.j, 1);
    Operator t1 = compose(step(k1, p.i, 2), step(p.k, p.j, 1));
    Weight k2 = move(p.k, p.i, 2);
    Operator t2 = compose(step(k2, p.j, 1), step(p.k, p.i, 2));
    Weight k3 = move(p.k, p.i, 1);
    Weight k4 = move(k3, p.j, 1);
    Operator t3 =
        compose(step(k4, p.i, 1), compose(step(k3, p.j, 1), step(p.k, p.i, 1)));
    const Weight tgt = move(k2, p.j, 1);
    const auto rows = enumerate_basis(cfg, tgt);
    const int nr = static_cast<int>(rows.size());
    const int nc = static_cast<int>(basis_k.size());
    auto mat_or_zero = [&](const Operator& o) {
      return o.zero_object ? Matrix(nr, nc) : o.mat;
    };
    Operator L{p.k, tgt, mat_or_zero(t1) + mat_or_zero(t2), false};
    Operator R{p.k, tgt, mat_or_zero(t3), false};
    return detail::compare_ops(L, R, rows, basis_k, label);
  }
  if (id == "divided-power") {
    // E^a = [a]! E^{(a)} exactly.
    Operator dp = gen(p.i, p.a, p.is_E, p.k);
    const Weight al = alpha(cfg.n, p.i);
    Operator acc = gen(p.i, 0, p.is_E, p.k);
    Weight cur = p.k;
    for (int t = 0; t < p.a && !acc.zero_object; ++t) {
      acc = compose(gen(p.i, 1, p.is_E, cur), acc);
      cur = p.is_E ? add(cur, al) : sub(cur, al);
    }
    if (dp.zero_object || acc.zero_object)
      return {dp.zero_object == acc.zero_object,
              dp.zero_object == acc.zero_object ? ""
                                                : label + ": zero mismatch"};
    Operator scaled{dp.source, dp.target, dp.mat.scaled(qfact(p.a)), false};
    const auto rows = enumerate_basis(cfg, dp.target);
    return detail::compare_ops(acc, scaled, rows, basis_k, label);
  }
  throw UnknownRelation("unknown relation id: " + id);
}

}  // namespace qaff
