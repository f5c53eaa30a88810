#include "geompnn/tensor.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace geompnn {

Tensor Tensor::from_rows(std::size_t r, std::size_t c, std::span<const double> values) {
  if (values.size() != r * c) throw std::invalid_argument("from_rows: size mismatch");
  Tensor t(r, c);
  std::copy(values.begin(), values.end(), t.data.begin());
  return t;
}

bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  assert(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  }
  return m;
}

RowGroups RowGroups::build(std::span<const std::size_t> key_of_row, std::size_t n_groups) {
  RowGroups g;
  g.n_groups = n_groups;
  g.offsets.assign(n_groups + 1, 0);
  for (std::size_t k : key_of_row) {
    assert(k < n_groups);
    ++g.offsets[k + 1];
  }
  for (std::size_t i = 0; i < n_groups; ++i) g.offsets[i + 1] += g.offsets[i];
  g.rows.resize(key_of_row.size());
  std::vector<std::size_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (std::size_t r = 0; r < key_of_row.size(); ++r) {
    g.rows[cursor[key_of_row[r]]++] = r;
  }
  return g;
}

namespace kernels {

namespace {

// Shared (i,k,j) inner body: each output row is accumulated by one thread in
// a fixed k order, so the parallel and serial variants round identically.
inline void matmul_row(const double* a_row, const double* b, double* c_row, std::size_t kdim,
                       std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) c_row[j] = 0.0;
  for (std::size_t k = 0; k < kdim; ++k) {
    const double av = a_row[k];
    const double* b_row = b + k * n;
    for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  assert(a.cols == b.rows);
  Tensor c(a.rows, b.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(a.rows); ++i) {
    matmul_row(a.data.data() + static_cast<std::size_t>(i) * a.cols, b.data.data(),
               c.data.data() + static_cast<std::size_t>(i) * c.cols, a.cols, b.cols);
  }
  return c;
}

Tensor matmul_serial(const Tensor& a, const Tensor& b) {
  assert(a.cols == b.rows);
  Tensor c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    matmul_row(a.data.data() + i * a.cols, b.data.data(), c.data.data() + i * c.cols, a.cols,
               b.cols);
  }
  return c;
}

// c[i][j] = sum_k a[k][i] * b[k][j]; parallel over output rows i so each
// element is owned by one thread and k runs in the same order as the serial
// form.
Tensor matmul_at_b(const Tensor& a, const Tensor& b) {
  assert(a.rows == b.rows);
  Tensor c(a.cols, b.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(a.cols); ++i) {
    double* c_row = c.data.data() + static_cast<std::size_t>(i) * c.cols;
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double av = a.data[k * a.cols + static_cast<std::size_t>(i)];
      const double* b_row = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) c_row[j] += av * b_row[j];
    }
  }
  return c;
}

Tensor matmul_at_b_serial(const Tensor& a, const Tensor& b) {
  assert(a.rows == b.rows);
  Tensor c(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    double* c_row = c.data.data() + i * c.cols;
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double av = a.data[k * a.cols + i];
      const double* b_row = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) c_row[j] += av * b_row[j];
    }
  }
  return c;
}

namespace {

inline void a_bt_row(const double* a_row, const Tensor& b, double* c_row, std::size_t kdim) {
  for (std::size_t j = 0; j < b.rows; ++j) {
    const double* b_row = b.data.data() + j * b.cols;
    double acc = 0.0;
    for (std::size_t k = 0; k < kdim; ++k) acc += a_row[k] * b_row[k];
    c_row[j] = acc;
  }
}

}  // namespace

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {
  assert(a.cols == b.cols);
  Tensor c(a.rows, b.rows);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(a.rows); ++i) {
    a_bt_row(a.data.data() + static_cast<std::size_t>(i) * a.cols, b,
             c.data.data() + static_cast<std::size_t>(i) * c.cols, a.cols);
  }
  return c;
}

Tensor matmul_a_bt_serial(const Tensor& a, const Tensor& b) {
  assert(a.cols == b.cols);
  Tensor c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    a_bt_row(a.data.data() + i * a.cols, b, c.data.data() + i * c.cols, a.cols);
  }
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  assert(a.same_shape(b));
  Tensor c(a.rows, a.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(a.data.size()); ++i) {
    c.data[static_cast<std::size_t>(i)] =
        a.data[static_cast<std::size_t>(i)] + b.data[static_cast<std::size_t>(i)];
  }
  return c;
}

Tensor add_serial(const Tensor& a, const Tensor& b) {
  assert(a.same_shape(b));
  Tensor c(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] + b.data[i];
  return c;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  assert(bias.rows == 1 && bias.cols == x.cols);
  Tensor c(x.rows, x.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(x.rows); ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * x.cols;
    for (std::size_t j = 0; j < x.cols; ++j) c.data[base + j] = x.data[base + j] + bias.data[j];
  }
  return c;
}

Tensor add_bias_serial(const Tensor& x, const Tensor& bias) {
  assert(bias.rows == 1 && bias.cols == x.cols);
  Tensor c(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      c.data[i * x.cols + j] = x.data[i * x.cols + j] + bias.data[j];
    }
  }
  return c;
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double gelu_scalar(double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); }

inline double gelu_grad_scalar(double v) {
  const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
  return cdf + v * pdf;
}

}  // namespace

Tensor gelu(const Tensor& x) {
  Tensor c(x.rows, x.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(x.data.size()); ++i) {
    c.data[static_cast<std::size_t>(i)] = gelu_scalar(x.data[static_cast<std::size_t>(i)]);
  }
  return c;
}

Tensor gelu_serial(const Tensor& x) {
  Tensor c(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) c.data[i] = gelu_scalar(x.data[i]);
  return c;
}

Tensor gelu_backward(const Tensor& x, const Tensor& gout) {
  assert(x.same_shape(gout));
  Tensor c(x.rows, x.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(x.data.size()); ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    c.data[u] = gout.data[u] * gelu_grad_scalar(x.data[u]);
  }
  return c;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  Tensor c(rows.size(), x.cols);
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < static_cast<long long>(rows.size()); ++r) {
    const std::size_t src = rows[static_cast<std::size_t>(r)];
    assert(src < x.rows);
    std::copy_n(x.data.data() + src * x.cols, x.cols,
                c.data.data() + static_cast<std::size_t>(r) * x.cols);
  }
  return c;
}

Tensor gather_rows_serial(const Tensor& x, std::span<const std::size_t> rows) {
  Tensor c(rows.size(), x.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t src = rows[r];
    assert(src < x.rows);
    std::copy_n(x.data.data() + src * x.cols, x.cols, c.data.data() + r * x.cols);
  }
  return c;
}

Tensor gather_rows_backward(const Tensor& gout, const RowGroups& by_src, std::size_t n_src_rows) {
  assert(by_src.n_groups == n_src_rows);
  Tensor c(n_src_rows, gout.cols);
#pragma omp parallel for schedule(static)
  for (long long g = 0; g < static_cast<long long>(n_src_rows); ++g) {
    double* c_row = c.data.data() + static_cast<std::size_t>(g) * c.cols;
    const std::size_t lo = by_src.offsets[static_cast<std::size_t>(g)];
    const std::size_t hi = by_src.offsets[static_cast<std::size_t>(g) + 1];
    for (std::size_t e = lo; e < hi; ++e) {
      const double* src = gout.data.data() + by_src.rows[e] * gout.cols;
      for (std::size_t j = 0; j < gout.cols; ++j) c_row[j] += src[j];
    }
  }
  return c;
}

namespace {

inline void segment_mean_group(const Tensor& x, const RowGroups& by_key, double fixed_divisor,
                               std::size_t g, double* out_row) {
  const std::size_t lo = by_key.offsets[g];
  const std::size_t hi = by_key.offsets[g + 1];
  if (lo == hi) return;  // empty group stays zero
  for (std::size_t e = lo; e < hi; ++e) {
    const double* src = x.data.data() + by_key.rows[e] * x.cols;
    for (std::size_t j = 0; j < x.cols; ++j) out_row[j] += src[j];
  }
  const double inv = 1.0 / (fixed_divisor > 0.0 ? fixed_divisor : double(hi - lo));
  for (std::size_t j = 0; j < x.cols; ++j) out_row[j] *= inv;
}

}  // namespace

Tensor segment_mean(const Tensor& x, const RowGroups& by_key, double fixed_divisor) {
  Tensor c(by_key.n_groups, x.cols);
#pragma omp parallel for schedule(static)
  for (long long g = 0; g < static_cast<long long>(by_key.n_groups); ++g) {
    segment_mean_group(x, by_key, fixed_divisor, static_cast<std::size_t>(g),
                       c.data.data() + static_cast<std::size_t>(g) * c.cols);
  }
  return c;
}

Tensor segment_mean_serial(const Tensor& x, const RowGroups& by_key, double fixed_divisor) {
  Tensor c(by_key.n_groups, x.cols);
  for (std::size_t g = 0; g < by_key.n_groups; ++g) {
    segment_mean_group(x, by_key, fixed_divisor, g, c.data.data() + g * c.cols);
  }
  return c;
}

Tensor segment_mean_backward(const Tensor& gout, std::span<const std::size_t> key_of_row,
                             const RowGroups& by_key, double fixed_divisor) {
  Tensor c(key_of_row.size(), gout.cols);
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < static_cast<long long>(key_of_row.size()); ++r) {
    const std::size_t g = key_of_row[static_cast<std::size_t>(r)];
    const double inv = 1.0 / (fixed_divisor > 0.0 ? fixed_divisor : double(by_key.group_size(g)));
    const double* src = gout.data.data() + g * gout.cols;
    double* dst = c.data.data() + static_cast<std::size_t>(r) * c.cols;
    for (std::size_t j = 0; j < gout.cols; ++j) dst[j] = src[j] * inv;
  }
  return c;
}

Tensor concat_cols(std::span<const Tensor* const> parts) {
  assert(!parts.empty());
  const std::size_t rows = parts[0]->rows;
  std::size_t cols = 0;
  for (const Tensor* p : parts) {
    assert(p->rows == rows);
    cols += p->cols;
  }
  Tensor c(rows, cols);
  std::size_t col0 = 0;
  for (const Tensor* p : parts) {
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(p->data.data() + i * p->cols, p->cols, c.data.data() + i * cols + col0);
    }
    col0 += p->cols;
  }
  return c;
}

Tensor slice_cols(const Tensor& x, std::size_t col0, std::size_t width) {
  assert(col0 + width <= x.cols);
  Tensor c(x.rows, width);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy_n(x.data.data() + i * x.cols + col0, width, c.data.data() + i * width);
  }
  return c;
}

}  // namespace kernels

}  // namespace geompnn
