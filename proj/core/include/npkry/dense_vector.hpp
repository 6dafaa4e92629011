#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "npkry/error.hpp"

namespace npkry {

/// Dense vector of 64-bit floats. Size is fixed at construction.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : v_(n, fill) {
    check(n > 0, "DenseVector: size must be positive");
  }
  explicit DenseVector(std::vector<double> data) : v_(std::move(data)) {
    check(!v_.empty(), "DenseVector: size must be positive");
  }
  DenseVector(std::initializer_list<double> init) : v_(init) {
    check(!v_.empty(), "DenseVector: size must be positive");
  }

  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> span() const { return {v_.data(), v_.size()}; }
  std::span<double> span() { return {v_.data(), v_.size()}; }
  const std::vector<double>& raw() const { return v_; }

  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool operator==(const DenseVector& o) const { return v_ == o.v_; }

 private:
  std::vector<double> v_;
};

inline double dot(const DenseVector& a, const DenseVector& b) {
  check(a.size() == b.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const DenseVector& a) { return std::sqrt(dot(a, a)); }

/// y <- y + alpha * x
inline void axpy(double alpha, const DenseVector& x, DenseVector& y) {
  check(x.size() == y.size(), "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scal(double alpha, DenseVector& x) {
  for (auto& v : x) v *= alpha;
}

inline DenseVector scaled(const DenseVector& x, double alpha) {
  DenseVector y = x;
  scal(alpha, y);
  return y;
}

inline DenseVector subtract(const DenseVector& a, const DenseVector& b) {
  check(a.size() == b.size(), "subtract: dimension mismatch");
  DenseVector r = a;
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  return r;
}

inline bool all_finite(const DenseVector& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace npkry
