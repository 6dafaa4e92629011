#pragma once

#include <cstddef>
#include <span>

namespace npkry::vol {

/// Channel-major volume layout: index = ((c * n1 + z) * n2 + y) * n3 + x.
struct VolDims {
  std::size_t c = 0, n1 = 0, n2 = 0, n3 = 0;
  std::size_t spatial() const { return n1 * n2 * n3; }
  std::size_t total() const { return c * spatial(); }
};

/// Zero-padded stride-1 "same" convolution. Even kernels pad (k-1)/2 low,
/// the remainder high. w layout: (c_out, c_in, k, k, k). bias may be empty.
void conv3d_forward(std::span<const double> x, const VolDims& xd,
                    std::span<const double> w, std::size_t c_out,
                    std::size_t k, std::span<const double> bias,
                    std::span<double> out);
void conv3d_backward(std::span<const double> gout, const VolDims& xd,
                     std::span<const double> x, std::span<const double> w,
                     std::size_t c_out, std::size_t k, std::span<double> gx,
                     std::span<double> gw, std::span<double> gbias);

/// Stride-2 transposed convolution, no implicit padding:
/// out_n = 2*(m-1)+k or one more (output padding; the extra border
/// plane receives bias only). w layout: (c_in, c_out, k, k, k).
void convt3d_forward(std::span<const double> x, const VolDims& xd,
                     std::span<const double> w, std::size_t c_out,
                     std::size_t k, std::size_t out_n,
                     std::span<const double> bias, std::span<double> out);
void convt3d_backward(std::span<const double> gout, const VolDims& xd,
                      std::span<const double> x, std::span<const double> w,
                      std::size_t c_out, std::size_t k, std::size_t out_n,
                      std::span<double> gx, std::span<double> gw,
                      std::span<double> gbias);

/// Factor-2 floor-mode max pooling; argmax holds input linear indices,
/// ties resolved to the lowest.
void maxpool2_forward(std::span<const double> x, const VolDims& xd,
                      std::span<double> out, std::span<std::size_t> argmax);
void maxpool2_backward(std::span<const double> gout,
                       std::span<const std::size_t> argmax,
                       std::span<double> gx);

}  // namespace npkry::vol
