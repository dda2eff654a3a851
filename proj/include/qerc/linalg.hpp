#pragma once
// Small dense complex matrices used for few-mode unitaries and for the
// two-qubit density operators of the protocol module.

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace qerc {

using complexd = std::complex<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  Matrix(std::size_t rows, std::size_t cols,
         std::initializer_list<complexd> entries)
      : rows_(rows), cols_(cols), a_(entries) {
    if (a_.size() != rows * cols) {
      throw std::invalid_argument("Matrix: entry count does not match shape");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  complexd& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const complexd& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  Matrix adjoint() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  Matrix operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("Matrix: shape mismatch");
    Matrix m(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const complexd v = (*this)(i, k);
        if (v == complexd{}) continue;
        for (std::size_t j = 0; j < rhs.cols_; ++j) m(i, j) += v * rhs(k, j);
      }
    return m;
  }

  Matrix operator+(const Matrix& rhs) const {
    Matrix m = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] += rhs.a_[i];
    return m;
  }

  Matrix operator-(const Matrix& rhs) const {
    Matrix m = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] -= rhs.a_[i];
    return m;
  }

  Matrix scaled(complexd s) const {
    Matrix m = *this;
    for (auto& v : m.a_) v *= s;
    return m;
  }

  complexd trace() const {
    complexd t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double max_abs_diff(const Matrix& rhs) const {
    double m = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i)
      m = std::max(m, std::abs(a_[i] - rhs.a_[i]));
    return m;
  }

  // Max deviation of U†U from the identity.
  double unitarity_defect() const {
    Matrix p = adjoint() * (*this);
    return p.max_abs_diff(identity(rows_));
  }

  bool is_unitary(double tol = 1e-10) const {
    return rows_ == cols_ && unitarity_defect() <= tol;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<complexd> a_;
};

// |v><v| for a dense complex vector.
inline Matrix outer(const std::vector<complexd>& v) {
  Matrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

inline std::vector<complexd> mat_vec(const Matrix& m,
                                     const std::vector<complexd>& v) {
  std::vector<complexd> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    complexd s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline complexd inner(const std::vector<complexd>& a,
                      const std::vector<complexd>& b) {
  complexd s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace qerc
