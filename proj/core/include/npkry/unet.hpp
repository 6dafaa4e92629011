#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "npkry/dense_vector.hpp"
#include "npkry/model_params.hpp"
#include "npkry/preconditioner.hpp"

namespace npkry {

/// Channel-major volume (c, n1, n2, n3). Row-major within each channel.
struct VolumeTensor {
  std::size_t channels = 0, n1 = 0, n2 = 0, n3 = 0;
  std::vector<double> data;

  std::size_t spatial() const { return n1 * n2 * n3; }
};

/// Row-major reshape of a grid vector into a single-channel volume;
/// flatten is the exact inverse.
VolumeTensor pad_or_embed(const DenseVector& v, std::size_t grid_n);
DenseVector flatten(const VolumeTensor& t);

/// Multi-level convolutional encoder-decoder (U-Net) over the tensor
/// grid, acting on a 2-channel input [residual | parameter field].
///
/// Blocks per level, channels = {c0, .., c_{L-1}}:
///   stem:       per-channel 1x1x1 lift 2 -> c0/2 (no bias), then a 3^3
///               conv c0/2 -> c0 (no bias)
///   encoder i:  factor-2 floor max pool, 3^3 conv c_{i-1} -> c_i (no bias)
///   bottleneck: 3^3 conv c_{L-1} -> c_{L-1} (no bias)
///   decoder i:  2^3 stride-2 transposed conv c_i -> c_{i-1} (with bias,
///               explicit output-size target; odd targets add one
///               output-padding plane), skip concat, then a 3^3 conv
///               2c_{i-1} -> c_{i-1} (no bias)
///   head:       1x1x1 projection c0 -> 1 (with bias)
/// leaky_relu(slope) follows every conv except the head.
struct UNetDescriptor {
  std::size_t grid_n = 9;
  std::vector<std::size_t> channels = {8, 16, 32};
  std::size_t kernel = 3;
  double leaky_slope = 0.01;

  std::size_t depth() const { return channels.size(); }
  std::size_t lift_channels() const { return channels.front() / 2; }
  std::size_t up_kernel() const { return 2; }
  /// Grid size per level: floor halving, all sizes must stay >= 2.
  std::vector<std::size_t> level_sizes() const;

  std::string to_text() const;
  static UNetDescriptor from_text(const std::string& text);

  static UNetDescriptor desk(std::size_t grid_n = 9);
  /// Table-scale network: grid 21, widths 32/64/128.
  static UNetDescriptor paper_scale();

  bool operator==(const UNetDescriptor&) const = default;
};

struct LayerCount {
  std::string row;
  std::size_t params = 0;
};

/// Per-block parameter accounting in encoder-to-decoder order:
/// stem, enc1.., bottleneck, dec(L-1).., dec1, head.
std::vector<LayerCount> layer_param_counts(const UNetDescriptor& desc);
std::size_t total_params(const UNetDescriptor& desc);

/// Zero-initialized parameter vector with the network layout.
ModelParams make_params(const UNetDescriptor& desc);
/// Kaiming-style fan-in scaled uniform init, zero biases, deterministic
/// per seed.
ModelParams init_params(const UNetDescriptor& desc, std::uint64_t seed);

/// The learned preconditioner N_theta(v, mu): stacks [v | d] as a
/// 2-channel volume, runs the U-Net, flattens back.
class NeuralPreconditioner final : public Preconditioner {
 public:
  NeuralPreconditioner(UNetDescriptor desc, ModelParams params);

  DenseVector apply(const DenseVector& v,
                    const ProblemInstance& inst) const override;
  ad::Var apply_ad(ad::Tape& tape, ad::Var v,
                   const ProblemInstance& inst) const override;
  std::string name() const override { return "neural"; }

  const UNetDescriptor& descriptor() const { return desc_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }

  /// Flat d(root)/d(theta) after Tape::backward, layout-ordered.
  /// Parameters are recorded as one leaf per layer slice, once per tape;
  /// repeated apply_ad calls on the same tape share the leaves.
  std::vector<double> gather_gradient(const ad::Tape& tape) const;

  void save(const std::filesystem::path& path) const;
  static NeuralPreconditioner load(const std::filesystem::path& path);

 private:
  const std::vector<ad::Var>& bind(ad::Tape& tape) const;

  UNetDescriptor desc_;
  ModelParams params_;
  mutable std::uint64_t bound_serial_ = 0;
  mutable std::vector<ad::Var> leaves_;
};

}  // namespace npkry
