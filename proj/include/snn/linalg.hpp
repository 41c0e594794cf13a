#pragma once

// Dense and compressed-sparse-row matrices for the masked layers.
//
// A CsrMatrix built from a topology never changes its pattern: absent
// entries are structural zeros, which is how the connection mask is enforced.
// All row loops run in ascending column order so floating-point results are
// reproducible and match a dense reference that walks the same order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snn/error.hpp"
#include "snn/topology.hpp"

namespace snn {

using Vector = std::vector<double>;

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix id(n, n);
    for (std::size_t i = 0; i < n; ++i) id(i, i) = 1.0;
    return id;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  bool same_pattern(const CsrMatrix& other) const noexcept {
    return rows == other.rows && cols == other.cols && row_offsets == other.row_offsets &&
           col_indices == other.col_indices;
  }

  DenseMatrix to_dense() const {
    DenseMatrix dense(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t e = row_offsets[r]; e < row_offsets[r + 1]; ++e) dense(r, col_indices[e]) = values[e];
    return dense;
  }

  // Same pattern, every value set to `fill`.
  CsrMatrix zeros_like(double fill = 0.0) const {
    CsrMatrix out;
    out.rows = rows;
    out.cols = cols;
    out.row_offsets = row_offsets;
    out.col_indices = col_indices;
    out.values.assign(values.size(), fill);
    return out;
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

// Throws InvalidArgument if offsets or indices break the CSR invariants.
inline void validate(const CsrMatrix& m) {
  if (m.row_offsets.size() != m.rows + 1 || m.row_offsets.front() != 0 ||
      m.row_offsets.back() != m.values.size() || m.col_indices.size() != m.values.size())
    throw Error(ErrorCode::InvalidArgument, "inconsistent CSR offsets");
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (m.row_offsets[r] > m.row_offsets[r + 1])
      throw Error(ErrorCode::InvalidArgument, "CSR row offsets decrease");
    for (std::size_t e = m.row_offsets[r]; e < m.row_offsets[r + 1]; ++e) {
      if (m.col_indices[e] >= m.cols) throw Error(ErrorCode::InvalidArgument, "CSR column out of range");
      if (e > m.row_offsets[r] && m.col_indices[e] <= m.col_indices[e - 1])
        throw Error(ErrorCode::InvalidArgument, "CSR columns not ascending");
    }
  }
}

// Pattern copied from the topology; values pulled from `init()` in row-major
// edge order.
template <typename Init>
CsrMatrix csr_from_topology(const BipartiteTopology& t, Init&& init) {
  CsrMatrix m;
  m.rows = t.n;
  m.cols = t.m;
  m.row_offsets.assign(t.n + 1, 0);
  const std::size_t nnz = t.edge_count();
  m.col_indices.reserve(nnz);
  m.values.reserve(nnz);
  for (std::size_t i = 0; i < t.n; ++i) {
    for (std::uint32_t j : t.rows[i]) {
      m.col_indices.push_back(j);
      m.values.push_back(static_cast<double>(init()));
    }
    m.row_offsets[i + 1] = m.col_indices.size();
  }
  return m;
}

inline CsrMatrix csr_from_topology(const BipartiteTopology& t, double constant = 0.0) {
  return csr_from_topology(t, [constant] { return constant; });
}

namespace detail {
inline void require(bool ok, const char* what, std::size_t got, std::size_t want) {
  if (!ok)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": got " + std::to_string(got) + ", expected " + std::to_string(want));
}
}  // namespace detail

// y[r] = sum_c M[r,c] * x[c]
inline void spmv(const CsrMatrix& m, std::span<const double> x, std::span<double> y) {
  detail::require(x.size() == m.cols, "spmv input", x.size(), m.cols);
  detail::require(y.size() == m.rows, "spmv output", y.size(), m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (std::size_t e = m.row_offsets[r]; e < m.row_offsets[r + 1]; ++e) acc += m.values[e] * x[m.col_indices[e]];
    y[r] = acc;
  }
}

inline Vector spmv(const CsrMatrix& m, std::span<const double> x) {
  Vector y(m.rows);
  spmv(m, x, y);
  return y;
}

// y[c] = sum_r M[r,c] * x[r]; y is overwritten. For each c the terms are
// added in ascending r.
inline void spmv_transpose(const CsrMatrix& m, std::span<const double> x, std::span<double> y) {
  detail::require(x.size() == m.rows, "spmv_transpose input", x.size(), m.rows);
  detail::require(y.size() == m.cols, "spmv_transpose output", y.size(), m.cols);
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;  // zero inputs (blank pixels) contribute nothing
    for (std::size_t e = m.row_offsets[r]; e < m.row_offsets[r + 1]; ++e) y[m.col_indices[e]] += m.values[e] * xr;
  }
}

inline Vector spmv_transpose(const CsrMatrix& m, std::span<const double> x) {
  Vector y(m.cols);
  spmv_transpose(m, x, y);
  return y;
}

// M[r,c] += scale * u[r] * v[c] at stored positions only.
inline void sp_outer_accumulate(CsrMatrix& m, std::span<const double> u, std::span<const double> v, double scale) {
  detail::require(u.size() == m.rows, "sp_outer_accumulate u", u.size(), m.rows);
  detail::require(v.size() == m.cols, "sp_outer_accumulate v", v.size(), m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double ur = scale * u[r];
    if (ur == 0.0) continue;
    for (std::size_t e = m.row_offsets[r]; e < m.row_offsets[r + 1]; ++e) m.values[e] += ur * v[m.col_indices[e]];
  }
}

// Plain dense products, used as references and by the spectral code.
inline Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  detail::require(x.size() == a.cols(), "matvec input", x.size(), a.cols());
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    const auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

inline Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x) {
  detail::require(x.size() == a.rows(), "matvec_transpose input", x.size(), a.rows());
  Vector y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * x[r];
  }
  return y;
}

}  // namespace snn
