#pragma once

#include <algorithm>
#include <vector>

namespace qsrev {

// Dense row-major matrix. Deliberately minimal: the nets need GEMM in three
// transpose variants plus elementwise loops they write themselves.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const {
    return v.data() + static_cast<size_t>(r) * cols;
  }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

// C += A * B with A MxK, B KxN, C MxN, all row-major. The k-outer ordering
// keeps the inner loop a contiguous axpy over B and C rows, which the
// compiler vectorizes.
inline void gemm_nn(const double* a, const double* b, double* c, int m, int k,
                    int n) {
  for (int kk = 0; kk < k; ++kk) {
    const double* brow = b + static_cast<size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      double aik = a[static_cast<size_t>(i) * k + kk];
      if (aik == 0.0) continue;
      double* crow = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

// C += A^T * B with A MxK, B MxN, C KxN. Used for weight gradients
// (inputs^T * output-gradients).
inline void gemm_tn(const double* a, const double* b, double* c, int m, int k,
                    int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    const double* brow = b + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      double aik = arow[kk];
      if (aik == 0.0) continue;
      double* crow = c + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

// C += A * B^T with A MxK, B NxK, C MxN. Used for input gradients
// (output-gradients * weights^T); the inner loop is a contiguous dot.
inline void gemm_nt(const double* a, const double* b, double* c, int m, int k,
                    int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<size_t>(j) * k;
      double dot = 0.0;
      for (int kk = 0; kk < k; ++kk) dot += arow[kk] * brow[kk];
      crow[j] += dot;
    }
  }
}

inline void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  gemm_nn(a.v.data(), b.v.data(), c.v.data(), a.rows, a.cols, b.cols);
}
inline void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  gemm_tn(a.v.data(), b.v.data(), c.v.data(), a.rows, a.cols, b.cols);
}
inline void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  gemm_nt(a.v.data(), b.v.data(), c.v.data(), a.rows, a.cols, b.rows);
}

}  // namespace qsrev
