#include "npkry/tape.hpp"

#include <atomic>
#include <cmath>

#include "npkry/conv_kernels.hpp"
#include "npkry/error.hpp"
#include "npkry/givens.hpp"

namespace npkry::ad {

std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

std::uint64_t Tape::next_serial() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

const Shape& Var::shape() const { return tape->node(id).shape; }
const std::vector<double>& Var::value() const { return tape->node(id).val; }
double Var::value0() const {
  const auto& v = tape->node(id).val;
  check(v.size() == 1, "value0: node is not scalar");
  return v[0];
}
const std::vector<double>& Var::grad() const { return tape->node(id).grad; }

Var Tape::push(Node n) {
  check(n.val.size() == numel(n.shape), "tape: value/shape mismatch");
  for (double v : n.val)
    check(std::isfinite(v), "tape: non-finite value produced");
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::check_same_tape(Var v) const {
  check(v.tape == this && v.id >= 0 &&
            v.id < static_cast<int>(nodes_.size()),
        "tape: variable from another tape");
}

Var Tape::leaf(std::vector<double> value, Shape shape) {
  Node n;
  n.op = Op::kLeaf;
  n.shape = std::move(shape);
  n.val = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::constant(std::vector<double> value, Shape shape) {
  Node n;
  n.op = Op::kConst;
  n.shape = std::move(shape);
  n.val = std::move(value);
  n.requires_grad = false;
  return push(std::move(n));
}

namespace {

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  check(a == b, std::string(op) + ": shape mismatch");
}

}  // namespace

Var Tape::add(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  require_same_shape(a.shape(), b.shape(), "add");
  Node n;
  n.op = Op::kAdd;
  n.in = {a.id, b.id, -1};
  n.shape = a.shape();
  n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
  n.val.resize(numel(n.shape));
  const auto& av = node(a.id).val;
  const auto& bv = node(b.id).val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = av[i] + bv[i];
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  require_same_shape(a.shape(), b.shape(), "sub");
  Node n;
  n.op = Op::kSub;
  n.in = {a.id, b.id, -1};
  n.shape = a.shape();
  n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
  n.val.resize(numel(n.shape));
  const auto& av = node(a.id).val;
  const auto& bv = node(b.id).val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = av[i] - bv[i];
  return push(std::move(n));
}

Var Tape::scale(Var a, double k) {
  check_same_tape(a);
  Node n;
  n.op = Op::kScale;
  n.in = {a.id, -1, -1};
  n.shape = a.shape();
  n.scalar = k;
  n.requires_grad = node(a.id).requires_grad;
  n.val.resize(numel(n.shape));
  const auto& av = node(a.id).val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = k * av[i];
  return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  require_same_shape(a.shape(), b.shape(), "hadamard");
  Node n;
  n.op = Op::kHadamard;
  n.in = {a.id, b.id, -1};
  n.shape = a.shape();
  n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
  n.val.resize(numel(n.shape));
  const auto& av = node(a.id).val;
  const auto& bv = node(b.id).val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = av[i] * bv[i];
  return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  require_same_shape(a.shape(), b.shape(), "dot");
  Node n;
  n.op = Op::kDot;
  n.in = {a.id, b.id, -1};
  n.shape = {1};
  n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
  const auto& av = node(a.id).val;
  const auto& bv = node(b.id).val;
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  n.val = {s};
  return push(std::move(n));
}

Var Tape::norm2(Var a) {
  check_same_tape(a);
  Node n;
  n.op = Op::kNorm2;
  n.in = {a.id, -1, -1};
  n.shape = {1};
  n.requires_grad = node(a.id).requires_grad;
  const auto& av = node(a.id).val;
  double s = 0.0;
  for (double v : av) s += v * v;
  n.val = {std::sqrt(s)};
  return push(std::move(n));
}

Var Tape::axpy(Var alpha, Var x, Var y) {
  check_same_tape(alpha);
  check_same_tape(x);
  check_same_tape(y);
  check(node(alpha.id).val.size() == 1, "axpy: alpha must be scalar");
  require_same_shape(x.shape(), y.shape(), "axpy");
  Node n;
  n.op = Op::kAxpy;
  n.in = {alpha.id, x.id, y.id};
  n.shape = x.shape();
  n.requires_grad = node(alpha.id).requires_grad ||
                    node(x.id).requires_grad || node(y.id).requires_grad;
  const double a = node(alpha.id).val[0];
  const auto& xv = node(x.id).val;
  const auto& yv = node(y.id).val;
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) n.val[i] = yv[i] + a * xv[i];
  return push(std::move(n));
}

Var Tape::divide(Var x, Var s) {
  check_same_tape(x);
  check_same_tape(s);
  check(node(s.id).val.size() == 1, "divide: denominator must be scalar");
  const double d = node(s.id).val[0];
  check(d != 0.0, "divide: division by zero");
  Node n;
  n.op = Op::kDivide;
  n.in = {x.id, s.id, -1};
  n.shape = x.shape();
  n.requires_grad = node(x.id).requires_grad || node(s.id).requires_grad;
  const auto& xv = node(x.id).val;
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) n.val[i] = xv[i] / d;
  return push(std::move(n));
}

Var Tape::sqrt_op(Var s) {
  check_same_tape(s);
  Node n;
  n.op = Op::kSqrt;
  n.in = {s.id, -1, -1};
  n.shape = s.shape();
  n.requires_grad = node(s.id).requires_grad;
  const auto& sv = node(s.id).val;
  n.val.resize(sv.size());
  for (std::size_t i = 0; i < sv.size(); ++i) {
    check(sv[i] >= 0.0, "sqrt: negative argument");
    n.val[i] = std::sqrt(sv[i]);
  }
  return push(std::move(n));
}

Var Tape::abs_op(Var s) {
  check_same_tape(s);
  Node n;
  n.op = Op::kAbs;
  n.in = {s.id, -1, -1};
  n.shape = s.shape();
  n.requires_grad = node(s.id).requires_grad;
  const auto& sv = node(s.id).val;
  n.val.resize(sv.size());
  for (std::size_t i = 0; i < sv.size(); ++i) n.val[i] = std::abs(sv[i]);
  return push(std::move(n));
}

Var Tape::matvec(const SparseMatrix& A, Var x) {
  check_same_tape(x);
  check(numel(x.shape()) == A.cols(), "matvec: dimension mismatch");
  Node n;
  n.op = Op::kMatvecConst;
  n.in = {x.id, -1, -1};
  n.shape = {A.rows()};
  n.matrix = &A;
  n.requires_grad = node(x.id).requires_grad;
  n.val.resize(A.rows());
  spmv_into(A, node(x.id).val, n.val);
  return push(std::move(n));
}

Var Tape::channel_lift(Var x, Var w) {
  check_same_tape(x);
  check_same_tape(w);
  const Shape& xs = x.shape();
  check(xs.size() == 4, "channel_lift: input must be 4-d");
  const std::size_t c_in = xs[0];
  const std::size_t m = numel(w.shape());
  Node n;
  n.op = Op::kChannelLift;
  n.in = {x.id, w.id, -1};
  n.shape = {m, xs[1], xs[2], xs[3]};
  n.requires_grad = node(x.id).requires_grad || node(w.id).requires_grad;
  const std::size_t sp = xs[1] * xs[2] * xs[3];
  const auto& xv = node(x.id).val;
  const auto& wv = node(w.id).val;
  n.val.resize(m * sp);
  for (std::size_t o = 0; o < m; ++o) {
    const double* src = xv.data() + (o % c_in) * sp;
    double* dst = n.val.data() + o * sp;
    for (std::size_t i = 0; i < sp; ++i) dst[i] = wv[o] * src[i];
  }
  return push(std::move(n));
}

Var Tape::conv3d(Var x, Var w, Var bias, std::size_t kernel) {
  check_same_tape(x);
  check_same_tape(w);
  const Shape& xs = x.shape();
  check(xs.size() == 4, "conv3d: input must be 4-d (c, n1, n2, n3)");
  const std::size_t c_in = xs[0];
  const std::size_t kvol = kernel * kernel * kernel;
  const std::size_t c_out = numel(w.shape()) / (c_in * kvol);
  check(c_out * c_in * kvol == numel(w.shape()),
        "conv3d: weight size mismatch");
  const bool has_bias = bias.valid();
  if (has_bias) {
    check_same_tape(bias);
    check(numel(bias.shape()) == c_out, "conv3d: bias size mismatch");
  }
  Node n;
  n.op = Op::kConv3d;
  n.in = {x.id, w.id, has_bias ? bias.id : -1};
  n.shape = {c_out, xs[1], xs[2], xs[3]};
  n.aux = {kernel, c_out};
  n.requires_grad = node(x.id).requires_grad || node(w.id).requires_grad ||
                    (has_bias && node(bias.id).requires_grad);
  n.val.resize(numel(n.shape));
  const vol::VolDims xd{c_in, xs[1], xs[2], xs[3]};
  vol::conv3d_forward(node(x.id).val, xd, node(w.id).val, c_out, kernel,
                      has_bias ? std::span<const double>(node(bias.id).val)
                               : std::span<const double>{},
                      n.val);
  return push(std::move(n));
}

Var Tape::conv3d_transposed(Var x, Var w, Var bias, std::size_t kernel,
                            std::size_t out_n) {
  check_same_tape(x);
  check_same_tape(w);
  const Shape& xs = x.shape();
  check(xs.size() == 4, "conv3d_transposed: input must be 4-d");
  check(xs[1] == xs[2] && xs[2] == xs[3],
        "conv3d_transposed: cubic volumes only");
  // stride-2 target with optional single output-padding plane
  check(out_n == 2 * (xs[1] - 1) + kernel ||
            out_n == 2 * (xs[1] - 1) + kernel + 1,
        "conv3d_transposed: output size incompatible with stride 2");
  const std::size_t c_in = xs[0];
  const std::size_t kvol = kernel * kernel * kernel;
  const std::size_t c_out = numel(w.shape()) / (c_in * kvol);
  check(c_in * c_out * kvol == numel(w.shape()),
        "conv3d_transposed: weight size mismatch");
  const bool has_bias = bias.valid();
  if (has_bias) {
    check_same_tape(bias);
    check(numel(bias.shape()) == c_out,
          "conv3d_transposed: bias size mismatch");
  }
  Node n;
  n.op = Op::kConv3dTransposed;
  n.in = {x.id, w.id, has_bias ? bias.id : -1};
  n.shape = {c_out, out_n, out_n, out_n};
  n.aux = {kernel, c_out, out_n};
  n.requires_grad = node(x.id).requires_grad || node(w.id).requires_grad ||
                    (has_bias && node(bias.id).requires_grad);
  n.val.resize(numel(n.shape));
  const vol::VolDims xd{c_in, xs[1], xs[2], xs[3]};
  vol::convt3d_forward(node(x.id).val, xd, node(w.id).val, c_out, kernel,
                       out_n,
                       has_bias ? std::span<const double>(node(bias.id).val)
                                : std::span<const double>{},
                       n.val);
  return push(std::move(n));
}

Var Tape::maxpool3d(Var x) {
  check_same_tape(x);
  const Shape& xs = x.shape();
  check(xs.size() == 4, "maxpool3d: input must be 4-d");
  check(xs[1] >= 2 && xs[2] >= 2 && xs[3] >= 2,
        "maxpool3d: spatial size below pooling factor");
  Node n;
  n.op = Op::kMaxPool3d;
  n.in = {x.id, -1, -1};
  n.shape = {xs[0], xs[1] / 2, xs[2] / 2, xs[3] / 2};
  n.requires_grad = node(x.id).requires_grad;
  n.val.resize(numel(n.shape));
  n.aux.resize(n.val.size());
  const vol::VolDims xd{xs[0], xs[1], xs[2], xs[3]};
  vol::maxpool2_forward(node(x.id).val, xd, n.val, n.aux);
  return push(std::move(n));
}

Var Tape::concat_channels(Var a, Var b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  check(as.size() == 4 && bs.size() == 4 && as[1] == bs[1] &&
            as[2] == bs[2] && as[3] == bs[3],
        "concat_channels: spatial shape mismatch");
  Node n;
  n.op = Op::kConcatChannels;
  n.in = {a.id, b.id, -1};
  n.shape = {as[0] + bs[0], as[1], as[2], as[3]};
  n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
  n.val = node(a.id).val;
  const auto& bv = node(b.id).val;
  n.val.insert(n.val.end(), bv.begin(), bv.end());
  return push(std::move(n));
}

Var Tape::leaky_relu(Var x, double slope) {
  check_same_tape(x);
  Node n;
  n.op = Op::kLeakyRelu;
  n.in = {x.id, -1, -1};
  n.shape = x.shape();
  n.scalar = slope;
  n.requires_grad = node(x.id).requires_grad;
  const auto& xv = node(x.id).val;
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i)
    n.val[i] = xv[i] > 0.0 ? xv[i] : slope * xv[i];
  return push(std::move(n));
}

Var Tape::reshape(Var x, Shape shape) {
  check_same_tape(x);
  check(numel(shape) == numel(x.shape()), "reshape: element count mismatch");
  Node n;
  n.op = Op::kReshape;
  n.in = {x.id, -1, -1};
  n.shape = std::move(shape);
  n.requires_grad = node(x.id).requires_grad;
  n.val = node(x.id).val;
  return push(std::move(n));
}

GivensVars Tape::givens(Var h1, Var h2) {
  check_same_tape(h1);
  check_same_tape(h2);
  check(node(h1.id).val.size() == 1 && node(h2.id).val.size() == 1,
        "givens: inputs must be scalar");
  const GivensResult gr =
      givens_compute(node(h1.id).val[0], node(h2.id).val[0]);
  GivensVars out;
  out.breakdown = gr.breakdown;
  if (gr.breakdown) {
    // callers switch to constant padding; emit inert constants
    out.c = constant_scalar(1.0);
    out.s = constant_scalar(0.0);
    out.r = constant_scalar(0.0);
    return out;
  }
  const bool rg =
      node(h1.id).requires_grad || node(h2.id).requires_grad;
  auto make = [&](Op op, double value) {
    Node n;
    n.op = op;
    n.in = {h1.id, h2.id, -1};
    n.shape = {1};
    n.requires_grad = rg;
    n.val = {value};
    return push(std::move(n));
  };
  out.c = make(Op::kGivensC, gr.pair.c);
  out.s = make(Op::kGivensS, gr.pair.s);
  out.r = make(Op::kGivensR, gr.r);
  return out;
}

void Tape::reset_grads() {
  for (auto& n : nodes_) {
    n.grad.clear();
  }
  backward_done_ = false;
}

void Tape::backward(Var root) {
  check_same_tape(root);
  check(!backward_done_, "backward called twice without reset_grads");
  check(node(root.id).val.size() == 1, "backward: root must be scalar");
  backward_done_ = true;
  for (auto& n : nodes_)
    if (n.requires_grad) n.grad.assign(n.val.size(), 0.0);
  Node& rn = at(root.id);
  if (!rn.requires_grad) return;  // nothing depends on a leaf
  rn.grad[0] = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = at(id);
    if (!n.requires_grad || n.grad.empty()) continue;
    const auto& g = n.grad;
    auto gin = [&](int slot) -> std::vector<double>* {
      const int src = n.in[static_cast<std::size_t>(slot)];
      if (src < 0) return nullptr;
      Node& sn = at(src);
      if (!sn.requires_grad) return nullptr;
      return &sn.grad;
    };
    auto vin = [&](int slot) -> const std::vector<double>& {
      return at(n.in[static_cast<std::size_t>(slot)]).val;
    };
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kAdd: {
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (auto* gb = gin(1))
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i];
        break;
      }
      case Op::kSub: {
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (auto* gb = gin(1))
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
        break;
      }
      case Op::kScale: {
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i)
            (*ga)[i] += n.scalar * g[i];
        break;
      }
      case Op::kHadamard: {
        const auto& av = vin(0);
        const auto& bv = vin(1);
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i)
            (*ga)[i] += bv[i] * g[i];
        if (auto* gb = gin(1))
          for (std::size_t i = 0; i < g.size(); ++i)
            (*gb)[i] += av[i] * g[i];
        break;
      }
      case Op::kDot: {
        const auto& av = vin(0);
        const auto& bv = vin(1);
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < av.size(); ++i)
            (*ga)[i] += g[0] * bv[i];
        if (auto* gb = gin(1))
          for (std::size_t i = 0; i < av.size(); ++i)
            (*gb)[i] += g[0] * av[i];
        break;
      }
      case Op::kNorm2: {
        check(n.val[0] > 0.0, "norm2: backward at zero vector");
        const auto& av = vin(0);
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < av.size(); ++i)
            (*ga)[i] += g[0] * av[i] / n.val[0];
        break;
      }
      case Op::kAxpy: {
        const double a = vin(0)[0];
        const auto& xv = vin(1);
        if (auto* galpha = gin(0)) {
          double s = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * xv[i];
          (*galpha)[0] += s;
        }
        if (auto* gx = gin(1))
          for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += a * g[i];
        if (auto* gy = gin(2))
          for (std::size_t i = 0; i < g.size(); ++i) (*gy)[i] += g[i];
        break;
      }
      case Op::kDivide: {
        const double d = vin(1)[0];
        const auto& xv = vin(0);
        if (auto* gx = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] / d;
        if (auto* gs = gin(1)) {
          double s = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * xv[i];
          (*gs)[0] -= s / (d * d);
        }
        break;
      }
      case Op::kSqrt: {
        if (auto* gx = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i) {
            check(n.val[i] > 0.0, "sqrt: backward at zero");
            (*gx)[i] += g[i] * 0.5 / n.val[i];
          }
        break;
      }
      case Op::kAbs: {
        const auto& xv = vin(0);
        if (auto* gx = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double sign =
                xv[i] > 0.0 ? 1.0 : (xv[i] < 0.0 ? -1.0 : 0.0);
            (*gx)[i] += sign * g[i];
          }
        break;
      }
      case Op::kMatvecConst: {
        if (auto* gx = gin(0)) {
          std::vector<double> tmp(gx->size(), 0.0);
          spmv_transpose_into(*n.matrix, g, tmp);
          for (std::size_t i = 0; i < tmp.size(); ++i) (*gx)[i] += tmp[i];
        }
        break;
      }
      case Op::kChannelLift: {
        const Shape& xs = at(n.in[0]).shape;
        const std::size_t c_in = xs[0];
        const std::size_t sp = xs[1] * xs[2] * xs[3];
        const std::size_t m = n.shape[0];
        const auto& xv = vin(0);
        const auto& wv = vin(1);
        auto* gx = gin(0);
        auto* gw = gin(1);
        for (std::size_t o = 0; o < m; ++o) {
          const double* go = g.data() + o * sp;
          const double* src = xv.data() + (o % c_in) * sp;
          if (gw != nullptr) {
            double s = 0.0;
            for (std::size_t i = 0; i < sp; ++i) s += go[i] * src[i];
            (*gw)[o] += s;
          }
          if (gx != nullptr) {
            double* gxc = gx->data() + (o % c_in) * sp;
            for (std::size_t i = 0; i < sp; ++i) gxc[i] += wv[o] * go[i];
          }
        }
        break;
      }
      case Op::kConv3d: {
        const Shape& xs = at(n.in[0]).shape;
        const vol::VolDims xd{xs[0], xs[1], xs[2], xs[3]};
        const std::size_t kernel = n.aux[0];
        const std::size_t c_out = n.aux[1];
        auto* gx = gin(0);
        auto* gw = gin(1);
        auto* gb = n.in[2] >= 0 ? gin(2) : nullptr;
        vol::conv3d_backward(
            g, xd, vin(0), vin(1), c_out, kernel,
            gx ? std::span<double>(*gx) : std::span<double>{},
            gw ? std::span<double>(*gw) : std::span<double>{},
            gb ? std::span<double>(*gb) : std::span<double>{});
        break;
      }
      case Op::kConv3dTransposed: {
        const Shape& xs = at(n.in[0]).shape;
        const vol::VolDims xd{xs[0], xs[1], xs[2], xs[3]};
        const std::size_t kernel = n.aux[0];
        const std::size_t c_out = n.aux[1];
        const std::size_t out_n = n.aux[2];
        auto* gx = gin(0);
        auto* gw = gin(1);
        auto* gb = n.in[2] >= 0 ? gin(2) : nullptr;
        vol::convt3d_backward(
            g, xd, vin(0), vin(1), c_out, kernel, out_n,
            gx ? std::span<double>(*gx) : std::span<double>{},
            gw ? std::span<double>(*gw) : std::span<double>{},
            gb ? std::span<double>(*gb) : std::span<double>{});
        break;
      }
      case Op::kMaxPool3d: {
        if (auto* gx = gin(0)) vol::maxpool2_backward(g, n.aux, *gx);
        break;
      }
      case Op::kConcatChannels: {
        const std::size_t na = vin(0).size();
        if (auto* ga = gin(0))
          for (std::size_t i = 0; i < na; ++i) (*ga)[i] += g[i];
        if (auto* gb = gin(1))
          for (std::size_t i = 0; i < g.size() - na; ++i)
            (*gb)[i] += g[na + i];
        break;
      }
      case Op::kLeakyRelu: {
        const auto& xv = vin(0);
        if (auto* gx = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i)
            (*gx)[i] += (xv[i] > 0.0 ? 1.0 : n.scalar) * g[i];
        break;
      }
      case Op::kReshape: {
        if (auto* gx = gin(0))
          for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
        break;
      }
      case Op::kGivensC:
      case Op::kGivensS:
      case Op::kGivensR: {
        const double h1 = vin(0)[0];
        const double h2 = vin(1)[0];
        const double r = (h1 != 0.0 && std::signbit(h1))
                             ? -std::hypot(h1, h2)
                             : std::hypot(h1, h2);
        const double r3 = r * r * r;
        double d1 = 0.0, d2 = 0.0;
        if (n.op == Op::kGivensC) {
          d1 = h2 * h2 / r3;
          d2 = -h1 * h2 / r3;
        } else if (n.op == Op::kGivensS) {
          d1 = -h1 * h2 / r3;
          d2 = h1 * h1 / r3;
        } else {
          d1 = h1 / r;
          d2 = h2 / r;
        }
        if (auto* g1 = gin(0)) (*g1)[0] += d1 * g[0];
        if (auto* g2 = gin(1)) (*g2)[0] += d2 * g[0];
        break;
      }
    }
  }
}

}  // namespace npkry::ad
