#pragma once

#include <span>

#include "silab/numcore/types.hpp"

namespace silab {

/// Inner product, accumulated strictly left to right so runs are
/// bit-reproducible. Throws on length mismatch.
double dot(std::span<const double> a, std::span<const double> b);

/// Euclidean norm; norm2(zero) = 0.
double norm2(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// x *= alpha
void scale(std::span<double> x, double alpha);

/// Per-column mean of a matrix (length cols).
Vec col_mean(const Mat& x);

bool all_finite(std::span<const double> a);

}  // namespace silab
