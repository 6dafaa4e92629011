#include "npkry/conv_kernels.hpp"

#include <algorithm>
#include <limits>

namespace npkry::vol {

namespace {

inline std::size_t vidx(const VolDims& d, std::size_t c, std::size_t z,
                        std::size_t y, std::size_t x) {
  return ((c * d.n1 + z) * d.n2 + y) * d.n3 + x;
}

}  // namespace

void conv3d_forward(std::span<const double> x, const VolDims& xd,
                    std::span<const double> w, std::size_t c_out,
                    std::size_t k, std::span<const double> bias,
                    std::span<double> out) {
  const std::size_t pad = (k - 1) / 2;
  const VolDims od{c_out, xd.n1, xd.n2, xd.n3};
  const std::size_t kvol = k * k * k;
  for (std::size_t o = 0; o < c_out; ++o) {
    const double b = bias.empty() ? 0.0 : bias[o];
    for (std::size_t z = 0; z < od.n1; ++z)
      for (std::size_t y = 0; y < od.n2; ++y)
        for (std::size_t xx = 0; xx < od.n3; ++xx) {
          double acc = b;
          for (std::size_t c = 0; c < xd.c; ++c) {
            const double* woc = w.data() + (o * xd.c + c) * kvol;
            for (std::size_t qz = 0; qz < k; ++qz) {
              const std::ptrdiff_t iz =
                  static_cast<std::ptrdiff_t>(z + qz) -
                  static_cast<std::ptrdiff_t>(pad);
              if (iz < 0 || iz >= static_cast<std::ptrdiff_t>(xd.n1)) continue;
              for (std::size_t qy = 0; qy < k; ++qy) {
                const std::ptrdiff_t iy =
                    static_cast<std::ptrdiff_t>(y + qy) -
                    static_cast<std::ptrdiff_t>(pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(xd.n2))
                  continue;
                for (std::size_t qx = 0; qx < k; ++qx) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(xx + qx) -
                      static_cast<std::ptrdiff_t>(pad);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(xd.n3))
                    continue;
                  acc += woc[(qz * k + qy) * k + qx] *
                         x[vidx(xd, c, static_cast<std::size_t>(iz),
                                static_cast<std::size_t>(iy),
                                static_cast<std::size_t>(ix))];
                }
              }
            }
          }
          out[vidx(od, o, z, y, xx)] = acc;
        }
  }
}

void conv3d_backward(std::span<const double> gout, const VolDims& xd,
                     std::span<const double> x, std::span<const double> w,
                     std::size_t c_out, std::size_t k, std::span<double> gx,
                     std::span<double> gw, std::span<double> gbias) {
  const std::size_t pad = (k - 1) / 2;
  const VolDims od{c_out, xd.n1, xd.n2, xd.n3};
  const std::size_t kvol = k * k * k;
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t z = 0; z < od.n1; ++z)
      for (std::size_t y = 0; y < od.n2; ++y)
        for (std::size_t xx = 0; xx < od.n3; ++xx) {
          const double g = gout[vidx(od, o, z, y, xx)];
          if (g == 0.0) continue;
          if (!gbias.empty()) gbias[o] += g;
          for (std::size_t c = 0; c < xd.c; ++c) {
            const double* woc = w.data() + (o * xd.c + c) * kvol;
            double* gwoc = gw.empty() ? nullptr : gw.data() + (o * xd.c + c) * kvol;
            for (std::size_t qz = 0; qz < k; ++qz) {
              const std::ptrdiff_t iz =
                  static_cast<std::ptrdiff_t>(z + qz) -
                  static_cast<std::ptrdiff_t>(pad);
              if (iz < 0 || iz >= static_cast<std::ptrdiff_t>(xd.n1)) continue;
              for (std::size_t qy = 0; qy < k; ++qy) {
                const std::ptrdiff_t iy =
                    static_cast<std::ptrdiff_t>(y + qy) -
                    static_cast<std::ptrdiff_t>(pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(xd.n2))
                  continue;
                for (std::size_t qx = 0; qx < k; ++qx) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(xx + qx) -
                      static_cast<std::ptrdiff_t>(pad);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(xd.n3))
                    continue;
                  const std::size_t xi =
                      vidx(xd, c, static_cast<std::size_t>(iz),
                           static_cast<std::size_t>(iy),
                           static_cast<std::size_t>(ix));
                  const std::size_t wi = (qz * k + qy) * k + qx;
                  if (!gx.empty()) gx[xi] += woc[wi] * g;
                  if (gwoc != nullptr) gwoc[wi] += x[xi] * g;
                }
              }
            }
          }
        }
}

void convt3d_forward(std::span<const double> x, const VolDims& xd,
                     std::span<const double> w, std::size_t c_out,
                     std::size_t k, std::size_t out_n,
                     std::span<const double> bias, std::span<double> out) {
  const VolDims od{c_out, out_n, out_n, out_n};
  const std::size_t kvol = k * k * k;
  for (std::size_t o = 0; o < c_out; ++o) {
    const double b = bias.empty() ? 0.0 : bias[o];
    for (std::size_t i = 0; i < od.spatial(); ++i)
      out[o * od.spatial() + i] = b;
  }
  // scatter each input voxel through the kernel: out[2*m + q] += w[q] x[m]
  for (std::size_t c = 0; c < xd.c; ++c)
    for (std::size_t z = 0; z < xd.n1; ++z)
      for (std::size_t y = 0; y < xd.n2; ++y)
        for (std::size_t xx = 0; xx < xd.n3; ++xx) {
          const double xv = x[vidx(xd, c, z, y, xx)];
          if (xv == 0.0) continue;
          for (std::size_t o = 0; o < c_out; ++o) {
            const double* wco = w.data() + (c * c_out + o) * kvol;
            for (std::size_t qz = 0; qz < k; ++qz) {
              const std::size_t oz = 2 * z + qz;
              if (oz >= out_n) continue;
              for (std::size_t qy = 0; qy < k; ++qy) {
                const std::size_t oy = 2 * y + qy;
                if (oy >= out_n) continue;
                for (std::size_t qx = 0; qx < k; ++qx) {
                  const std::size_t ox = 2 * xx + qx;
                  if (ox >= out_n) continue;
                  out[vidx(od, o, oz, oy, ox)] +=
                      wco[(qz * k + qy) * k + qx] * xv;
                }
              }
            }
          }
        }
}

void convt3d_backward(std::span<const double> gout, const VolDims& xd,
                      std::span<const double> x, std::span<const double> w,
                      std::size_t c_out, std::size_t k, std::size_t out_n,
                      std::span<double> gx, std::span<double> gw,
                      std::span<double> gbias) {
  const VolDims od{c_out, out_n, out_n, out_n};
  const std::size_t kvol = k * k * k;
  if (!gbias.empty())
    for (std::size_t o = 0; o < c_out; ++o)
      for (std::size_t i = 0; i < od.spatial(); ++i)
        gbias[o] += gout[o * od.spatial() + i];
  for (std::size_t c = 0; c < xd.c; ++c)
    for (std::size_t z = 0; z < xd.n1; ++z)
      for (std::size_t y = 0; y < xd.n2; ++y)
        for (std::size_t xx = 0; xx < xd.n3; ++xx) {
          const std::size_t xi = vidx(xd, c, z, y, xx);
          const double xv = x[xi];
          double acc = 0.0;
          for (std::size_t o = 0; o < c_out; ++o) {
            const double* wco = w.data() + (c * c_out + o) * kvol;
            double* gwco = gw.empty() ? nullptr : gw.data() + (c * c_out + o) * kvol;
            for (std::size_t qz = 0; qz < k; ++qz) {
              const std::size_t oz = 2 * z + qz;
              if (oz >= out_n) continue;
              for (std::size_t qy = 0; qy < k; ++qy) {
                const std::size_t oy = 2 * y + qy;
                if (oy >= out_n) continue;
                for (std::size_t qx = 0; qx < k; ++qx) {
                  const std::size_t ox = 2 * xx + qx;
                  if (ox >= out_n) continue;
                  const double g = gout[vidx(od, o, oz, oy, ox)];
                  const std::size_t wi = (qz * k + qy) * k + qx;
                  acc += wco[wi] * g;
                  if (gwco != nullptr) gwco[wi] += xv * g;
                }
              }
            }
          }
          if (!gx.empty()) gx[xi] += acc;
        }
}

void maxpool2_forward(std::span<const double> x, const VolDims& xd,
                      std::span<double> out, std::span<std::size_t> argmax) {
  const VolDims od{xd.c, xd.n1 / 2, xd.n2 / 2, xd.n3 / 2};
  for (std::size_t c = 0; c < xd.c; ++c)
    for (std::size_t z = 0; z < od.n1; ++z)
      for (std::size_t y = 0; y < od.n2; ++y)
        for (std::size_t xx = 0; xx < od.n3; ++xx) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_i = 0;
          for (std::size_t dz = 0; dz < 2; ++dz)
            for (std::size_t dy = 0; dy < 2; ++dy)
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t i =
                    vidx(xd, c, 2 * z + dz, 2 * y + dy, 2 * xx + dx);
                if (x[i] > best) {  // strict: ties keep the lowest index
                  best = x[i];
                  best_i = i;
                }
              }
          const std::size_t oi = vidx(od, c, z, y, xx);
          out[oi] = best;
          argmax[oi] = best_i;
        }
}

void maxpool2_backward(std::span<const double> gout,
                       std::span<const std::size_t> argmax,
                       std::span<double> gx) {
  for (std::size_t i = 0; i < gout.size(); ++i) gx[argmax[i]] += gout[i];
}

}  // namespace npkry::vol
