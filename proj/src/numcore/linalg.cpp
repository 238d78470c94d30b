#include "silab/numcore/linalg.hpp"

#include <cmath>

namespace silab {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
  for (auto& v : x) v *= alpha;
}

Vec col_mean(const Mat& x) {
  Vec mean(x.cols, 0.0);
  for (int r = 0; r < x.rows; ++r) {
    auto row = x.row(r);
    for (int c = 0; c < x.cols; ++c) mean[c] += row[c];
  }
  for (auto& v : mean) v /= x.rows;
  return mean;
}

bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace silab
