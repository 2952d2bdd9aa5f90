#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "ebv/types.hpp"

namespace ebv {

/// Scalar field on the periodic n x n grid, sample (i, j) at x = (i/n, j/n).
/// Storage is row-major with i (the x1 index) contiguous.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(int n, double fill = 0.0) : n_(n), values_(check(n) * static_cast<std::size_t>(n), fill) {}

  int n() const { return n_; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return 1.0 / n_; }

  double operator()(int i, int j) const { return values_[index(i, j)]; }
  double& operator()(int i, int j) { return values_[index(i, j)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
  }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  void shift(double c) {
    for (double& v : values_) v += c;
  }

 private:
  static std::size_t check(int n) {
    if (n < 8 || n % 2 != 0) throw DomainError("grid resolution must be even and at least 8");
    return static_cast<std::size_t>(n);
  }
  std::size_t index(int i, int j) const {
    const int ii = ((i % n_) + n_) % n_;
    const int jj = ((j % n_) + n_) % n_;
    return static_cast<std::size_t>(jj) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(ii);
  }

  int n_ = 0;
  std::vector<double> values_;
};

}  // namespace ebv
