#include "geompnn/tape.hpp"

#include <cassert>
#include <stdexcept>

namespace geompnn {

namespace {

// acc += g, elementwise. Gradient accumulation happens in reverse node order,
// which is a fixed sequence, so results are deterministic.
void axpy(Tensor& acc, const Tensor& g) {
  assert(acc.same_shape(g));
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
}

// Column sums of g into a 1 x cols row (bias gradient). Rows are accumulated
// in ascending order per column.
Tensor col_sum(const Tensor& g) {
  Tensor out(1, g.cols);
  for (std::size_t i = 0; i < g.rows; ++i) {
    const double* row = g.data.data() + i * g.cols;
    for (std::size_t j = 0; j < g.cols; ++j) out.data[j] += row[j];
  }
  return out;
}

}  // namespace

Tape::Id Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

Tape::Id Tape::input(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = false;
  return push(std::move(n));
}

Tape::Id Tape::param(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Tape::Id Tape::matmul(Id a, Id b) {
  const Tensor& av = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  if (av.cols != bv.rows) throw std::invalid_argument("tape matmul: inner dims differ");
  Node n;
  n.op = Op::Matmul;
  n.args = {a, b};
  n.value = kernels::matmul(av, bv);
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  if (!nodes_[a].value.same_shape(nodes_[b].value)) {
    throw std::invalid_argument("tape add: shape mismatch");
  }
  Node n;
  n.op = Op::Add;
  n.args = {a, b};
  n.value = kernels::add(nodes_[a].value, nodes_[b].value);
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Tape::Id Tape::add_bias(Id x, Id bias) {
  const Tensor& xv = nodes_[x].value;
  const Tensor& bv = nodes_[bias].value;
  if (bv.rows != 1 || bv.cols != xv.cols) throw std::invalid_argument("tape add_bias: bad bias");
  Node n;
  n.op = Op::AddBias;
  n.args = {x, bias};
  n.value = kernels::add_bias(xv, bv);
  n.requires_grad = nodes_[x].requires_grad || nodes_[bias].requires_grad;
  return push(std::move(n));
}

Tape::Id Tape::gelu(Id x) {
  Node n;
  n.op = Op::Gelu;
  n.args = {x};
  n.value = kernels::gelu(nodes_[x].value);
  n.requires_grad = nodes_[x].requires_grad;
  return push(std::move(n));
}

Tape::Id Tape::concat_cols(std::span<const Id> parts) {
  if (parts.empty()) throw std::invalid_argument("tape concat_cols: empty");
  std::vector<const Tensor*> views;
  views.reserve(parts.size());
  Node n;
  n.op = Op::ConcatCols;
  for (Id p : parts) {
    n.args.push_back(p);
    views.push_back(&nodes_[p].value);
    n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  }
  n.value = kernels::concat_cols(views);
  return push(std::move(n));
}

Tape::Id Tape::gather_rows(Id x, std::vector<std::size_t> rows) {
  const Tensor& xv = nodes_[x].value;
  Node n;
  n.op = Op::GatherRows;
  n.args = {x};
  n.value = kernels::gather_rows(xv, rows);
  n.requires_grad = nodes_[x].requires_grad;
  if (n.requires_grad) n.groups = RowGroups::build(rows, xv.rows);
  n.index = std::move(rows);
  return push(std::move(n));
}

Tape::Id Tape::segment_mean(Id x, std::vector<std::size_t> key_of_row, std::size_t n_groups,
                            double fixed_divisor) {
  const Tensor& xv = nodes_[x].value;
  if (key_of_row.size() != xv.rows) {
    throw std::invalid_argument("tape segment_mean: key count != rows");
  }
  Node n;
  n.op = Op::SegmentMean;
  n.args = {x};
  n.groups = RowGroups::build(key_of_row, n_groups);
  n.divisor = fixed_divisor;
  n.value = kernels::segment_mean(xv, n.groups, fixed_divisor);
  n.requires_grad = nodes_[x].requires_grad;
  n.index = std::move(key_of_row);
  return push(std::move(n));
}

Tape::Id Tape::mse_loss(Id pred, Id target) {
  const Tensor& pv = nodes_[pred].value;
  const Tensor& tv = nodes_[target].value;
  if (!pv.same_shape(tv)) throw std::invalid_argument("tape mse_loss: shape mismatch");
  if (pv.data.empty()) throw std::invalid_argument("tape mse_loss: empty tensors");
  Node n;
  n.op = Op::MseLoss;
  n.args = {pred, target};
  n.value = Tensor(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.data.size(); ++i) {
    const double d = pv.data[i] - tv.data[i];
    acc += d * d;
  }
  n.value.data[0] = acc / double(pv.data.size());
  n.requires_grad = nodes_[pred].requires_grad || nodes_[target].requires_grad;
  return push(std::move(n));
}

Tensor& Tape::grad_buffer(Id id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty()) n.grad = Tensor(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::accumulate(Id id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  axpy(grad_buffer(id), g);
}

const Tensor& Tape::grad(Id id) {
  // Never touched by backward: report a zero tensor of the right shape.
  return grad_buffer(id);
}

void Tape::backward(Id loss) {
  Node& top = nodes_[loss];
  if (top.value.rows != 1 || top.value.cols != 1) {
    throw std::invalid_argument("tape backward: loss must be scalar");
  }
  grad_buffer(loss).data[0] = 1.0;

  for (std::size_t idx = loss + 1; idx-- > 0;) {
    Node& n = nodes_[idx];
    if (!n.requires_grad || n.grad.data.empty()) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Matmul: {
        const Tensor& a = nodes_[n.args[0]].value;
        const Tensor& b = nodes_[n.args[1]].value;
        if (nodes_[n.args[0]].requires_grad) accumulate(n.args[0], kernels::matmul_a_bt(g, b));
        if (nodes_[n.args[1]].requires_grad) accumulate(n.args[1], kernels::matmul_at_b(a, g));
        break;
      }
      case Op::Add:
        accumulate(n.args[0], g);
        accumulate(n.args[1], g);
        break;
      case Op::AddBias:
        accumulate(n.args[0], g);
        if (nodes_[n.args[1]].requires_grad) accumulate(n.args[1], col_sum(g));
        break;
      case Op::Gelu:
        accumulate(n.args[0], kernels::gelu_backward(nodes_[n.args[0]].value, g));
        break;
      case Op::ConcatCols: {
        std::size_t col0 = 0;
        for (Id part : n.args) {
          const std::size_t w = nodes_[part].value.cols;
          if (nodes_[part].requires_grad) {
            accumulate(part, kernels::slice_cols(g, col0, w));
          }
          col0 += w;
        }
        break;
      }
      case Op::GatherRows:
        accumulate(n.args[0],
                   kernels::gather_rows_backward(g, n.groups, nodes_[n.args[0]].value.rows));
        break;
      case Op::SegmentMean:
        accumulate(n.args[0], kernels::segment_mean_backward(g, n.index, n.groups, n.divisor));
        break;
      case Op::MseLoss: {
        const Tensor& p = nodes_[n.args[0]].value;
        const Tensor& t = nodes_[n.args[1]].value;
        const double scale = 2.0 * g.data[0] / double(p.data.size());
        Tensor dp(p.rows, p.cols);
        for (std::size_t i = 0; i < p.data.size(); ++i) {
          dp.data[i] = scale * (p.data[i] - t.data[i]);
        }
        if (nodes_[n.args[0]].requires_grad) accumulate(n.args[0], dp);
        if (nodes_[n.args[1]].requires_grad) {
          for (double& v : dp.data) v = -v;
          accumulate(n.args[1], dp);
        }
        break;
      }
    }
  }
}

}  // namespace geompnn
