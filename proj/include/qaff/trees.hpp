#pragma once
// Planar forest morphisms.
//
// A forest word is a composite of E/F divided powers that carries a weight k
// to the middle weight mu = (0^{n-N}, 1^N) without ever using the wrap index
// 0, i.e. a planar splitting of k into single units.  The N unit slots of mu
// form the window [n-N+1, n] (1-indexed).  Each nonzero entry k_i is a pile
// of k_i units sitting at slot i; piles, processed left to right, claim the
// leftmost unclaimed run of k_i consecutive window slots.  A pile spreads
// onto its run with an F-pyramid for the units moving left and an E-pyramid
// for the units moving right (the E-part is applied first).  Divided powers
// let unit stacks pass through occupied slots, so the composite flow never
// leaves the set of nonzero objects; every constructed word is re-validated
// with weight_flow.
//
// conservativity_check evaluates the forest word in the exact matrix model
// and reports its rank over the fraction field: full column rank means the
// induced map out of weight k is injective, so identities can be tested
// after splitting down to mu.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qaff/kmodel.hpp"
#include "qaff/linalg.hpp"
#include "qaff/weight.hpp"
#include "qaff/word.hpp"

namespace qaff {

// Requested flow cannot be realized by a planar word (window underflow or a
// zero-object source weight).
struct InfeasibleFlow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A planar splitting word together with its endpoints.  `word` contains only
// E/F divided powers (no idempotents); the rightmost factor applies first.
struct ForestWord {
  Weight source;
  Weight target;
  WordExpr word;
};

namespace treedetail {

// Spread a stack of `w` units sitting at slot `i` onto the consecutive slots
// [s, s+w-1].  Factors are appended in word-text order (leftmost first); the
// E-part sits to the right of the F-part so it is applied first.
inline void append_pile(std::vector<Factor>& out, int i, int s, int w) {
  const int e = s + w - 1;
  for (int j = s; j <= i - 1; ++j) {
    const int travel = j - s + 1;
    out.push_back(make_F(j, travel < w ? travel : w));
  }
  for (int j = e - 1; j >= i; --j) {
    const int travel = e - j;
    out.push_back(make_E(j, travel < w ? travel : w));
  }
}

inline void validate_forest(const ForestWord& fw, int n, int N) {
  for (const auto& f : fw.word.factors) {
    if (f.kind != FactorKind::E && f.kind != FactorKind::F)
      throw std::logic_error("forest word may only contain E/F factors");
    if (f.index == 0)
      throw std::logic_error("forest word is not planar: index 0 at " +
                             word_to_string(fw.word));
    if (f.index < 1 || f.index >= n)
      throw std::logic_error("forest word index out of range");
  }
  auto flow = weight_flow(fw.word, fw.source, N);
  if (!flow)
    throw std::logic_error("forest word hits a zero object: " +
                           word_to_string(fw.word));
  if (flow->back() != fw.target)
    throw std::logic_error("forest word misses its target: " +
                           word_to_string(fw.word) + " ends at " +
                           weight_to_string(flow->back()));
}

}  // namespace treedetail

// The canonical planar splitting of a single pile: k -> mu where k is a
// nonzero object of total weight N.  Throws InfeasibleFlow when no planar
// word can exist (N > n, or k is a zero object / wrong arity).
inline ForestWord forest_word(int n, int N, const Weight& k) {
  if (n < 1 || N < 0) throw ConfigMismatch("forest_word: need n >= 1, N >= 0");
  if (N > n)
    throw InfeasibleFlow("forest_word: N > n leaves no slot allocation");
  if (static_cast<int>(k.size()) != n)
    throw InfeasibleFlow("forest_word: weight arity mismatch");
  if (!is_nonzero_object(k, N))
    throw InfeasibleFlow("forest_word: source is a zero object: " +
                         weight_to_string(k));

  ForestWord fw;
  fw.source = k;
  fw.target = mu_weight(n, N);
  int next_slot = n - N + 1;  // leftmost unclaimed window slot
  for (int i = 1; i <= n; ++i) {
    const int w = k[static_cast<std::size_t>(i - 1)];
    if (w == 0) continue;
    treedetail::append_pile(fw.word.factors, i, next_slot, w);
    next_slot += w;
  }
  treedetail::validate_forest(fw, n, N);
  return fw;
}

inline ForestWord forest_word(const ModelConfig& cfg, const Weight& k) {
  return forest_word(cfg.n, cfg.N, k);
}

// The canonical splitting tree of the top weight eta = (0,...,0,N); a pure
// F-pyramid F_{n-N+1}^{(1)} ... F_{n-1}^{(N-1)}.  Requires n > N.
inline ForestWord tree_word(int n, int N) {
  if (N < 1) throw ConfigMismatch("tree_word: need N >= 1");
  if (n <= N) throw ConfigMismatch("tree_word: need n > N");
  ForestWord fw = forest_word(n, N, eta_weight(n, N));
  for (const auto& f : fw.word.factors)
    if (f.kind != FactorKind::F)
      throw std::logic_error("tree_word: expected a pure F-pyramid");
  return fw;
}

// Two planar splittings eta -> mu that differ only in the order the single
// units are peeled off the pile.  Both must act by the same matrix.  The
// orders genuinely differ only for N == 3 within the supported range; for
// N <= 2 every splitting order gives the same word.
inline std::pair<ForestWord, ForestWord> split_bracketings(int n, int N) {
  ForestWord first = tree_word(n, N);
  if (N <= 2) return {first, first};
  if (N != 3)
    throw ConfigMismatch("split_bracketings: alternative order defined for N <= 3");
  ForestWord second;
  second.source = eta_weight(n, N);
  second.target = mu_weight(n, N);
  second.word.factors = {make_F(n - 1), make_F(n - 2), make_F(n - 1)};
  treedetail::validate_forest(second, n, N);
  return {first, second};
}

struct ConservativityReport {
  int rank = 0;
  int source_dim = 0;
  int target_dim = 0;
  bool full_column_rank = false;
  bool degenerate = false;  // zero-object weight: empty source space
};

// Exact rank of the forest word out of weight k in the matrix model.  A
// zero-object k has an empty source space; the report is flagged degenerate
// and full_column_rank holds vacuously.
inline ConservativityReport conservativity_check(const ModelConfig& cfg,
                                                 const Convention& conv,
                                                 const Weight& k) {
  ConservativityReport rep;
  if (static_cast<int>(k.size()) != cfg.n)
    throw ConfigMismatch("conservativity_check: weight arity mismatch");
  if (!is_nonzero_object(k, cfg.N)) {
    rep.degenerate = true;
    rep.full_column_rank = true;
    return rep;
  }
  ForestWord fw = forest_word(cfg, k);
  Operator op = evaluate(cfg, conv, fw.word, k);
  if (op.zero_object)
    throw std::logic_error("conservativity_check: forest word evaluated to a "
                           "zero object despite valid flow");
  rep.source_dim = op.mat.cols();
  rep.target_dim = op.mat.rows();
  rep.rank = rank(op.mat);
  rep.full_column_rank = rep.rank == rep.source_dim;
  return rep;
}

}  // namespace qaff
