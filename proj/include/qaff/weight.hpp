#pragma once

// The integer weight lattice Z^n with its simple roots (including the affine
// one), reflections, the cyclic rotation, and the folding map from affine to
// finite root coordinates.

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaff/laurent.hpp"

namespace qaff {

using Weight = std::vector<int>;

struct ConfigMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simple roots as weights (coordinate-sum zero), so one dot product serves
// both <k, alpha_i> and <alpha_i, alpha_j>. Index 0 is the affine root.
inline Weight alpha(int n, int i) {
  if (n < 2 || i < 0 || i >= n) throw ConfigMismatch("alpha: bad index");
  Weight a(static_cast<std::size_t>(n), 0);
  if (i == 0) {
    a[0] = 1;
    a[static_cast<std::size_t>(n) - 1] = -1;
  } else {
    a[static_cast<std::size_t>(i) - 1] = -1;
    a[static_cast<std::size_t>(i)] = 1;
  }
  return a;
}

inline long pairing(const Weight& a, const Weight& b) {
  if (a.size() != b.size()) throw ConfigMismatch("pairing: size mismatch");
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long>(a[i]) * b[i];
  return s;
}

inline Weight add(const Weight& k, const Weight& a) {
  Weight r = k;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += a[i];
  return r;
}

inline Weight sub(const Weight& k, const Weight& a) {
  Weight r = k;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= a[i];
  return r;
}

// s_i \cdot k: i in 1..n-1 swaps slots i, i+1; i = 0 swaps slots 1 and n.
inline Weight reflect(const Weight& k, int i) {
  const int n = static_cast<int>(k.size());
  if (i < 0 || i >= n) throw ConfigMismatch("reflect: bad index");
  Weight r = k;
  if (i == 0)
    std::swap(r[0], r[static_cast<std::size_t>(n) - 1]);
  else
    std::swap(r[static_cast<std::size_t>(i) - 1], r[static_cast<std::size_t>(i)]);
  return r;
}

// r \cdot (k_1,...,k_n) = (k_2,...,k_n,k_1)
inline Weight rotate(const Weight& k) {
  if (k.empty()) return k;
  Weight r(k.begin() + 1, k.end());
  r.push_back(k.front());
  return r;
}

inline bool is_nonzero_object(const Weight& k, int N) {
  long s = 0;
  for (int v : k) {
    if (v < 0) return false;
    s += v;
  }
  return s == N;
}

inline Weight eta_weight(int n, int N) {
  Weight k(static_cast<std::size_t>(n), 0);
  k.back() = N;
  return k;
}

inline Weight mu_weight(int n, int N) {
  if (n < N) throw ConfigMismatch("mu: requires n >= N");
  Weight k(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < N; ++j) k[static_cast<std::size_t>(n - 1 - j)] = 1;
  return k;
}

// Folding map on root coordinates: affine coefficient vectors (a_0,...,a_{n-1})
// map to finite ones by p(alpha_i) = alpha_i for i >= 1 and
// p(alpha_0) = -sum_{j=1}^{n-1} alpha_j.
inline std::vector<int> p_map(const std::vector<int>& affine_coeffs) {
  if (affine_coeffs.empty()) throw ConfigMismatch("p_map: empty");
  std::vector<int> finite(affine_coeffs.begin() + 1, affine_coeffs.end());
  for (int& c : finite) c -= affine_coeffs[0];
  return finite;
}

// Realize a finite-coefficient vector (a_1,...,a_{n-1}) as a weight.
inline Weight root_combination(int n, const std::vector<int>& finite_coeffs) {
  Weight w(static_cast<std::size_t>(n), 0);
  for (std::size_t j = 0; j < finite_coeffs.size(); ++j) {
    const Weight a = alpha(n, static_cast<int>(j) + 1);
    for (std::size_t t = 0; t < w.size(); ++t)
      w[t] += finite_coeffs[j] * a[t];
  }
  return w;
}

inline std::string weight_to_string(const Weight& k) {
  std::string s = "(";
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(k[i]);
  }
  s += ")";
  return s;
}

inline Weight parse_weight(const std::string& s) {
  detail::LaurentScanner sc(s);
  if (!sc.accept('(')) throw SyntaxError("expected (", sc.i);
  Weight k;
  if (!sc.accept(')')) {
    for (;;) {
      k.push_back(sc.small_int());
      if (sc.accept(')')) break;
      if (!sc.accept(',')) throw SyntaxError("expected , or )", sc.i);
    }
  }
  if (!sc.at_end()) throw SyntaxError("trailing characters after weight", sc.i);
  return k;
}

// All weights k >= 0 with sum N and n slots (the nonzero objects).
inline std::vector<Weight> enumerate_weights(int n, int N) {
  std::vector<Weight> out;
  Weight cur(static_cast<std::size_t>(n), 0);
  auto rec = [&](auto&& self, int slot, int rem) -> void {
    if (slot == n - 1) {
      cur[static_cast<std::size_t>(slot)] = rem;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      cur[static_cast<std::size_t>(slot)] = v;
      self(self, slot + 1, rem - v);
    }
  };
  rec(rec, 0, N);
  return out;
}

// Standing assumption for every model/suite configuration.
inline void require_n_gt_N(int n, int N) {
  if (n <= N)
    throw ConfigMismatch("configuration requires n > N (got n=" +
                         std::to_string(n) + ", N=" + std::to_string(N) + ")");
}

}  // namespace qaff
