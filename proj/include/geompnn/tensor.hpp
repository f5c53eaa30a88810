#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace geompnn {

/// Dense row-major 64-bit matrix. A row vector is shape (1, c).
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }
  static Tensor from_rows(std::size_t r, std::size_t c, std::span<const double> values);
};

bool all_finite(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Groups the rows of a matrix by an integer key (counting sort, stable).
/// Used for CSR-style segment reductions and scatter-add transposes.
struct RowGroups {
  std::size_t n_groups = 0;
  std::vector<std::size_t> offsets;  // size n_groups + 1
  std::vector<std::size_t> rows;     // row ids, grouped by key, ascending within a group

  static RowGroups build(std::span<const std::size_t> key_of_row, std::size_t n_groups);
  std::size_t group_size(std::size_t g) const { return offsets[g + 1] - offsets[g]; }
};

/// Dense kernels. Each has an OpenMP-parallel form (the default) and a
/// plain serial reference (`*_serial`) that tests and the benchmark compare
/// against. Both accumulate in the same index order, so results are
/// bit-identical.
namespace kernels {

/// c = a * b
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_serial(const Tensor& a, const Tensor& b);

/// c = a^T * b
Tensor matmul_at_b(const Tensor& a, const Tensor& b);
Tensor matmul_at_b_serial(const Tensor& a, const Tensor& b);

/// c = a * b^T
Tensor matmul_a_bt(const Tensor& a, const Tensor& b);
Tensor matmul_a_bt_serial(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor add_serial(const Tensor& a, const Tensor& b);

/// x + broadcast row bias (bias shape 1 x c).
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor add_bias_serial(const Tensor& x, const Tensor& bias);

/// Exact (erf-based) GELU and its input gradient times upstream gradient.
Tensor gelu(const Tensor& x);
Tensor gelu_serial(const Tensor& x);
Tensor gelu_backward(const Tensor& x, const Tensor& gout);

/// out[r] = x[rows[r]]
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
Tensor gather_rows_serial(const Tensor& x, std::span<const std::size_t> rows);

/// Scatter-add transpose of gather_rows, parallelized over source groups.
Tensor gather_rows_backward(const Tensor& gout, const RowGroups& by_src, std::size_t n_src_rows);

/// Per-group mean of rows: out[g] = sum(x[rows in g]) / divisor(g), where
/// divisor(g) = fixed_divisor when positive, else the group size
/// (empty group -> zero row).
Tensor segment_mean(const Tensor& x, const RowGroups& by_key, double fixed_divisor);
Tensor segment_mean_serial(const Tensor& x, const RowGroups& by_key, double fixed_divisor);

/// d x[r] = gout[key(r)] / divisor(key(r))
Tensor segment_mean_backward(const Tensor& gout, std::span<const std::size_t> key_of_row,
                             const RowGroups& by_key, double fixed_divisor);

/// Column-wise concatenation of matrices with equal row counts.
/// Pure data movement; no serial twin needed.
Tensor concat_cols(std::span<const Tensor* const> parts);

/// Copies columns [col0, col0 + width) of gout into a fresh tensor.
Tensor slice_cols(const Tensor& x, std::size_t col0, std::size_t width);

}  // namespace kernels

}  // namespace geompnn
