#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pronog/error.hpp"
#include "pronog/rng.hpp"

namespace pronog {

// Dense row-major matrix of 64-bit reals. Summations run in sequential
// row-major order everywhere so results are reproducible bit for bit.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void fill(double v) {
    for (double& x : data) x = v;
  }

  bool operator==(const Matrix& o) const = default;
};

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw numeric_error(std::string(what) + ": non-finite entries");
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw numeric_error("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out.at(i, j) += aik * b.at(k, j);
      }
    }
  }
  return out;
}

// a^T * b
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw numeric_error("matmul_tn: shape mismatch");
  Matrix out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = a.at(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out.at(i, j) += aki * b.at(k, j);
      }
    }
  }
  return out;
}

// a * b^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw numeric_error("matmul_nt: shape mismatch");
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
      out.at(i, j) = s;
    }
  }
  return out;
}

inline void add_inplace(Matrix& a, const Matrix& b, double scale = 1.0) {
  if (!a.same_shape(b)) throw numeric_error("add_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += scale * b.data[i];
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw numeric_error("hadamard: shape mismatch");
  Matrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

// Sparse CSR operator, the substrate for message passing.
struct SparseOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // rows + 1
  std::vector<std::size_t> col_indices;
  std::vector<double> values;
};

inline Matrix spmm(const SparseOperator& op, const Matrix& x) {
  if (op.cols != x.rows) throw numeric_error("spmm: shape mismatch");
  Matrix out(op.rows, x.cols);
  for (std::size_t i = 0; i < op.rows; ++i) {
    for (std::size_t e = op.row_offsets[i]; e < op.row_offsets[i + 1]; ++e) {
      const std::size_t j = op.col_indices[e];
      const double v = op.values[e];
      for (std::size_t c = 0; c < x.cols; ++c) {
        out.at(i, c) += v * x.at(j, c);
      }
    }
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Cosine similarity; a zero vector has similarity 0 to everything.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw numeric_error("cosine_similarity: length mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

// Accumulates d(cos(a,b))/da and d(cos(a,b))/db scaled by g. The zero-vector
// branch of cosine_similarity is constant, so its gradient is zero.
inline void cosine_similarity_backward(std::span<const double> a, std::span<const double> b,
                                       double g, std::span<double> da, std::span<double> db) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return;
  const double inv = 1.0 / (na * nb);
  const double c = dot(a, b) * inv;
  for (std::size_t i = 0; i < a.size(); ++i) {
    da[i] += g * (b[i] * inv - c * a[i] / (na * na));
    db[i] += g * (a[i] * inv - c * b[i] / (nb * nb));
  }
}

inline std::vector<double> mean_rows(const Matrix& m) {
  if (m.rows == 0) throw numeric_error("mean_rows: empty matrix");
  std::vector<double> out(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += m.at(r, c);
  }
  for (double& v : out) v /= static_cast<double>(m.rows);
  return out;
}

inline Matrix random_uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi,
                                    std::uint64_t seed) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace pronog
