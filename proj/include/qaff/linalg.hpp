#pragma once

// Dense matrices over the Laurent ring with exact linear algebra:
// fraction-free (Bareiss) elimination for rank and determinant, full
// fraction-free Gauss-Jordan for inverses of unimodular matrices, and
// span-membership over the fraction field via rank comparison.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaff/laurent.hpp"

namespace qaff {

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InverseNotLaurent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Laurent{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  Laurent& at(int r, int c) {
    return a_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const Laurent& at(int r, int c) const {
    return a_[static_cast<std::size_t>(r) * cols_ + c];
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }
  bool operator!=(const Matrix& o) const { return !(*this == o); }

  bool is_zero() const {
    for (const auto& x : a_)
      if (!x.is_zero()) return false;
    return true;
  }

  bool is_diagonal() const {
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c)
        if (r != c && !at(r, c).is_zero()) return false;
    return true;
  }

  Matrix operator+(const Matrix& o) const {
    check_same_shape(o);
    Matrix r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
    return r;
  }
  Matrix operator-(const Matrix& o) const {
    check_same_shape(o);
    Matrix r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
    return r;
  }
  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_)
      throw DimensionError("matrix product shape mismatch: " + shape_str() +
                           " * " + o.shape_str());
    Matrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const Laurent& x = at(i, k);
        if (x.is_zero()) continue;
        for (int j = 0; j < o.cols_; ++j) {
          const Laurent& y = o.at(k, j);
          if (!y.is_zero()) r.at(i, j) += x * y;
        }
      }
    return r;
  }

  Matrix scaled(const Laurent& s) const {
    Matrix r = *this;
    for (auto& x : r.a_) x = x * s;
    return r;
  }

  // Entry-wise map (bar involution, q=1 specialization, ...).
  template <typename Fn>
  Matrix map(Fn&& f) const {
    Matrix r = *this;
    for (auto& x : r.a_) x = f(x);
    return r;
  }

  struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  int rows_, cols_;
  std::vector<Laurent> a_;

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw DimensionError("matrix shape mismatch: " + shape_str() + " vs " +
                           o.shape_str());
  }
};

namespace detail {

// One fraction-free elimination pass; returns the pivot columns. If
// `full_jordan`, eliminates above pivots too (Montante), turning the pivot
// columns into multiples of unit vectors. `sign` accumulates row-swap parity.
inline std::vector<int> bareiss(Matrix& m, bool full_jordan, int& sign) {
  std::vector<int> pivots;
  Laurent prev{1};
  int r = 0;
  sign = 1;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int pr = -1;
    for (int i = r; i < m.rows(); ++i)
      if (!m.at(i, c).is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    if (pr != r) {
      for (int j = 0; j < m.cols(); ++j) std::swap(m.at(pr, j), m.at(r, j));
      sign = -sign;
    }
    const Laurent p = m.at(r, c);
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r) continue;
      if (!full_jordan && i < r) continue;
      // Even when the multiplier is zero the whole row is rescaled by p/prev;
      // that is what keeps every division below exact.
      const Laurent f = m.at(i, c);
      for (int j = 0; j < m.cols(); ++j) {
        if (j == c) continue;
        m.at(i, j) = (p * m.at(i, j) - f * m.at(r, j)).divide_exact(prev);
      }
      m.at(i, c) = Laurent{};
    }
    prev = p;
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace detail

inline int rank(Matrix m) {
  int sign;
  return static_cast<int>(detail::bareiss(m, false, sign).size());
}

inline Laurent det(Matrix m) {
  if (m.rows() != m.cols())
    throw Matrix::DimensionError("determinant of non-square matrix");
  if (m.rows() == 0) return Laurent{1};
  int sign;
  auto pivots = detail::bareiss(m, false, sign);
  if (static_cast<int>(pivots.size()) < m.rows()) return Laurent{};
  Laurent d = m.at(m.rows() - 1, m.cols() - 1);
  return sign < 0 ? -d : d;
}

// True iff p = ±q^a.
inline bool is_unit_monomial(const Laurent& p) {
  if (p.term_count() != 1) return false;
  const Int c = p.terms().begin()->second;
  return c == 1 || c == -1;
}

inline Laurent unit_inverse(const Laurent& u) {
  if (!is_unit_monomial(u))
    throw InverseNotLaurent("not a unit monomial: " + u.to_string());
  const auto& [e, c] = *u.terms().begin();
  return Laurent::monomial(c, -e);
}

// Exact inverse of a matrix whose determinant is a unit ±q^a. Throws
// SingularMatrix / InverseNotLaurent otherwise.
inline Matrix inverse_unimodular(const Matrix& m) {
  if (m.rows() != m.cols())
    throw Matrix::DimensionError("inverse of non-square matrix");
  const int n = m.rows();
  if (n == 0) return m;
  Matrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, n + i) = Laurent{1};
  }
  int sign;
  auto pivots = detail::bareiss(aug, true, sign);
  if (static_cast<int>(pivots.size()) < n)
    throw SingularMatrix("matrix is singular");
  Matrix inv(n, n);
  for (int i = 0; i < n; ++i) {
    const int c = pivots[static_cast<std::size_t>(i)];
    if (c >= n) throw SingularMatrix("matrix is singular");
    const Laurent& d = aug.at(i, c);
    if (d.is_zero()) throw SingularMatrix("matrix is singular");
    for (int j = 0; j < n; ++j) {
      if (aug.at(i, n + j).is_zero()) continue;
      Laurent v;
      try {
        v = aug.at(i, n + j).divide_exact(d);
      } catch (const InexactDivision&) {
        throw InverseNotLaurent(
            "inverse has non-Laurent entries (determinant not a unit)");
      }
      inv.at(c, j) = v;
    }
  }
  return inv;
}

// Does x lie in the span (over the fraction field) of the given matrices?
// All matrices must share x's shape. Empty x lies in any span.
inline bool in_span(const std::vector<Matrix>& gens, const Matrix& x) {
  if (x.empty()) return true;
  const int dim = x.rows() * x.cols();
  Matrix flat(static_cast<int>(gens.size()) + 1, dim);
  auto put = [&](int row, const Matrix& m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        flat.at(row, r * m.cols() + c) = m.at(r, c);
  };
  Matrix flat_gens(static_cast<int>(gens.size()), dim);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    if (gens[g].rows() != x.rows() || gens[g].cols() != x.cols())
      throw Matrix::DimensionError("span generators shape mismatch");
    put(static_cast<int>(g), gens[g]);
    for (int c = 0; c < dim; ++c)
      flat_gens.at(static_cast<int>(g), c) = flat.at(static_cast<int>(g), c);
  }
  put(static_cast<int>(gens.size()), x);
  return rank(flat_gens) == rank(flat);
}

// If a = u·b for a single unit monomial u = ±q^e, return u.
inline std::optional<Laurent> global_unit_ratio(const Matrix& a,
                                                const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::nullopt;
  if (b.is_zero()) return a.is_zero() ? std::optional<Laurent>(Laurent{1})
                                      : std::nullopt;
  Laurent u;
  for (int r = 0; r < a.rows() && u.is_zero(); ++r)
    for (int c = 0; c < a.cols() && u.is_zero(); ++c) {
      if (b.at(r, c).is_zero()) {
        if (!a.at(r, c).is_zero()) return std::nullopt;
        continue;
      }
      try {
        u = a.at(r, c).divide_exact(b.at(r, c));
      } catch (const InexactDivision&) {
        return std::nullopt;
      }
    }
  if (u.is_zero() || !is_unit_monomial(u)) return std::nullopt;
  if (a != b.scaled(u)) return std::nullopt;
  return u;
}

}  // namespace qaff
