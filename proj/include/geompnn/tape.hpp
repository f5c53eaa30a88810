#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geompnn/tensor.hpp"

namespace geompnn {

/// Reverse-mode autodiff over a linear record of primitive ops.
///
/// Usage: push leaves with input() (constants) or param() (differentiable),
/// compose with the op methods, call backward(loss) once, then read grad(id)
/// for any param. Gradients of a replay match central finite differences to
/// ~1e-5 relative on random inputs (see gradcheck).
class Tape {
 public:
  using Id = std::size_t;

  Id input(Tensor value);
  Id param(Tensor value);

  Id matmul(Id a, Id b);
  Id add(Id a, Id b);
  Id add_bias(Id x, Id bias);
  Id gelu(Id x);
  Id concat_cols(std::span<const Id> parts);
  Id gather_rows(Id x, std::vector<std::size_t> rows);
  /// Mean over row groups keyed by key_of_row. fixed_divisor > 0 divides by
  /// that constant (fixed in-degree graphs); otherwise by the group size,
  /// with empty groups producing zero rows.
  Id segment_mean(Id x, std::vector<std::size_t> key_of_row, std::size_t n_groups,
                  double fixed_divisor);
  /// Mean of squared elementwise differences; output is 1x1.
  Id mse_loss(Id pred, Id target);

  const Tensor& value(Id id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)=1 and sweeps the record in reverse. loss must be 1x1.
  void backward(Id loss);
  /// Zero tensor if backward never reached the node.
  const Tensor& grad(Id id);

 private:
  enum class Op {
    Leaf,
    Matmul,
    Add,
    AddBias,
    Gelu,
    ConcatCols,
    GatherRows,
    SegmentMean,
    MseLoss,
  };

  struct Node {
    Op op = Op::Leaf;
    std::vector<Id> args;
    Tensor value;
    Tensor grad;  // allocated lazily during backward
    bool requires_grad = false;
    // op-specific payload
    std::vector<std::size_t> index;  // gather rows / segment keys
    RowGroups groups;                // prebuilt at forward time
    double divisor = 0.0;
  };

  Id push(Node n);
  Tensor& grad_buffer(Id id);
  void accumulate(Id id, const Tensor& g);

  std::vector<Node> nodes_;
};

}  // namespace geompnn
