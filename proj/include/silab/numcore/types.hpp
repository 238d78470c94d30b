#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace silab {

using Vec = std::vector<double>;

/// Dense row-major matrix of 64-bit floats.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw std::invalid_argument("Mat: negative dimensions");
    data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0);
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  bool empty() const { return data.empty(); }
};

/// Thrown when a batch's normalization denominator vanishes (possible only
/// with eps = 0 and all projections equal).
struct DegenerateBatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace silab
