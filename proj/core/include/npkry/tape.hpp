#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "npkry/sparse_matrix.hpp"

namespace npkry::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& s);

enum class Op : unsigned char {
  kLeaf,
  kConst,
  kAdd,
  kSub,
  kScale,     // by a compile-time constant scalar
  kHadamard,  // elementwise product
  kDot,
  kNorm2,
  kAxpy,  // y + alpha * x, alpha scalar
  kDivide,
  kSqrt,
  kAbs,
  kMatvecConst,
  kChannelLift,  // grouped 1x1x1 conv: out[o] = w[o] * x[o mod c_in]
  kConv3d,
  kConv3dTransposed,
  kMaxPool3d,
  kConcatChannels,
  kLeakyRelu,
  kReshape,
  // fused rotation node family: inputs (h1, h2), closed-form adjoints
  kGivensC,
  kGivensS,
  kGivensR,
};

class Tape;

/// Handle to a tape node. Cheap to copy; values and gradients live on the
/// tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Shape& shape() const;
  const std::vector<double>& value() const;
  /// Scalar value; node must have a single element.
  double value0() const;
  /// Gradient buffer; valid after Tape::backward.
  const std::vector<double>& grad() const;
};

struct GivensVars {
  Var c, s, r;
  bool breakdown = false;
};

/// Append-only record of forward operations. Values are computed eagerly
/// in double precision; backward runs one reverse sweep. A tape is
/// confined to a single thread.
class Tape {
 public:
  struct Node {
    Op op = Op::kConst;
    std::array<int, 3> in{-1, -1, -1};
    Shape shape;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;
    double scalar = 0.0;  // kScale factor / kLeakyRelu slope
    const SparseMatrix* matrix = nullptr;
    std::vector<std::size_t> aux;  // op-specific: pool argmax, conv dims
  };

  Var leaf(std::vector<double> value, Shape shape);
  Var leaf_scalar(double v) { return leaf({v}, {1}); }
  Var constant(std::vector<double> value, Shape shape);
  Var constant_scalar(double v) { return constant({v}, {1}); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double k);
  Var hadamard(Var a, Var b);
  Var dot(Var a, Var b);
  Var norm2(Var a);
  Var axpy(Var alpha, Var x, Var y);
  Var divide(Var x, Var s);
  Var sqrt_op(Var s);
  Var abs_op(Var s);
  /// A is captured by pointer and must outlive the tape.
  Var matvec(const SparseMatrix& A, Var x);
  /// x: (c_in, n1, n2, n3); w: (m). Output channel o is channel
  /// (o mod c_in) of x scaled by w[o].
  Var channel_lift(Var x, Var w);
  /// x: (c_in, n1, n2, n3); w: (c_out, c_in, k, k, k); optional bias
  /// (c_out). Stride 1, zero-padded "same" output.
  Var conv3d(Var x, Var w, Var bias, std::size_t kernel);
  /// x: (c_in, m1, m2, m3); w: (c_in, c_out, k, k, k); stride 2; output
  /// spatial size out_n per axis must satisfy out_n = 2*(m-1) + k.
  Var conv3d_transposed(Var x, Var w, Var bias, std::size_t kernel,
                        std::size_t out_n);
  /// Factor-2 floor-mode max pooling; ties resolve to the lowest linear
  /// index.
  Var maxpool3d(Var x);
  Var concat_channels(Var a, Var b);
  Var leaky_relu(Var x, double slope = 0.01);
  Var reshape(Var x, Shape shape);
  GivensVars givens(Var h1, Var h2);

  /// Reverse sweep from a scalar root. Calling twice without reset_grads
  /// is an error.
  void backward(Var root);
  void reset_grads();

  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  /// Process-unique identity; distinguishes tapes that reuse an address.
  std::uint64_t serial() const { return serial_; }

 private:
  friend struct Var;
  Var push(Node n);
  Node& at(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  void check_same_tape(Var v) const;

  static std::uint64_t next_serial();

  std::vector<Node> nodes_;
  std::uint64_t serial_ = next_serial();
  bool backward_done_ = false;
};

}  // namespace npkry::ad
