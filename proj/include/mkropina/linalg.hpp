#pragma once

// Small dense containers that work over any scalar ring (double, Jet,
// NestedJet), plus LU-based inversion with partial pivoting on the primal
// value.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mkropina/errors.hpp"
#include "mkropina/jet.hpp"

namespace mkropina {

inline constexpr double kDegenerateDeterminant = 1e-12;

template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, const S& fill = S(0.0))
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}
  static Matrix square(int n) { return Matrix(n, n); }
  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = S(1.0);
    return m;
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  S& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const S& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j) {
        S acc(0.0);
        for (int k = 0; k < a.cols_; ++k) acc += a(i, k) * b(k, j);
        r(i, j) = acc;
      }
    return r;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<S> data_;
};

// T^k_ij stored as (k, i, j).
template <class S>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n), S(0.0)) {}
  int dim() const noexcept { return n_; }
  S& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }
  const S& operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }

 private:
  std::size_t index(int k, int i, int j) const { return static_cast<std::size_t>((k * n_ + i) * n_ + j); }
  int n_ = 0;
  std::vector<S> data_;
};

// R_l^i_jk stored as (l, i, j, k).
template <class S>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), S(0.0)) {}
  int dim() const noexcept { return n_; }
  S& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
  const S& operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return static_cast<std::size_t>(((a * n_ + b) * n_ + c) * n_ + d);
  }
  int n_ = 0;
  std::vector<S> data_;
};

namespace detail {

// In-place LU with partial pivoting (row swaps recorded in perm). Returns
// the determinant.
template <class S>
S lu_decompose(Matrix<S>& a, std::vector<int>& perm) {
  const int n = a.rows();
  perm.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  S det(1.0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(primal(a(col, col)));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(primal(a(r, col)));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return S(0.0);
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(perm[static_cast<std::size_t>(col)], perm[static_cast<std::size_t>(pivot)]);
      det = -det;
    }
    det = det * a(col, col);
    for (int r = col + 1; r < n; ++r) {
      a(r, col) = a(r, col) / a(col, col);
      for (int j = col + 1; j < n; ++j) a(r, j) -= a(r, col) * a(col, j);
    }
  }
  return det;
}

}  // namespace detail

template <class S>
S determinant(Matrix<S> a) {
  std::vector<int> perm;
  return detail::lu_decompose(a, perm);
}

// Inverse via LU with partial pivoting. Throws DegenerateError when
// |det| <= threshold (measured on the primal value).
template <class S>
Matrix<S> inverse(Matrix<S> a, double threshold = kDegenerateDeterminant) {
  const int n = a.rows();
  std::vector<int> perm;
  const S det = detail::lu_decompose(a, perm);
  if (!(std::abs(primal(det)) > threshold)) {
    throw DegenerateError("matrix is degenerate (|det| = " + std::to_string(std::abs(primal(det))) + ")",
                          primal(det));
  }
  Matrix<S> inv(n, n);
  for (int col = 0; col < n; ++col) {
    std::vector<S> x(static_cast<std::size_t>(n), S(0.0));
    for (int i = 0; i < n; ++i) {
      S acc(perm[static_cast<std::size_t>(i)] == col ? 1.0 : 0.0);
      for (int k = 0; k < i; ++k) acc -= a(i, k) * x[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(i)] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
      S acc = x[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < n; ++k) acc -= a(i, k) * x[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(i)] = acc / a(i, i);
    }
    for (int i = 0; i < n; ++i) inv(i, col) = x[static_cast<std::size_t>(i)];
  }
  return inv;
}

template <class S>
Matrix<double> primal_matrix(const Matrix<S>& m) {
  Matrix<double> r(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = primal(m(i, j));
  return r;
}

inline double max_abs(const Matrix<double>& m) {
  double r = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

inline double max_abs_difference(const Matrix<double>& a, const Matrix<double>& b) {
  double r = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r = std::max(r, std::abs(a(i, j) - b(i, j)));
  return r;
}

inline double max_abs(const Tensor3<double>& t) {
  double r = 0.0;
  const int n = t.dim();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r = std::max(r, std::abs(t(k, i, j)));
  return r;
}

inline double max_abs_difference(const Tensor3<double>& a, const Tensor3<double>& b) {
  double r = 0.0;
  const int n = a.dim();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r = std::max(r, std::abs(a(k, i, j) - b(k, i, j)));
  return r;
}

}  // namespace mkropina
