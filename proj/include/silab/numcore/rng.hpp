#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "silab/numcore/types.hpp"

namespace silab {

/// Deterministic pseudo-random stream: xoshiro256++ seeded through splitmix64.
/// The contract is reproducibility, not a particular distribution quality bar:
/// identical seed gives a bit-identical stream, and split(label) derives an
/// independent substream keyed by (seed, label) regardless of how many draws
/// the parent has consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (one spare cached).
  double normal();
  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Independent substream keyed by (seed, label).
  Rng split(std::string_view label) const;
  /// Independent substream keyed by (seed, index).
  Rng split(std::uint64_t index) const;

  std::uint64_t seed_key() const { return seed_key_; }
  std::uint64_t draw_count() const { return draws_; }

 private:
  std::uint64_t seed_key_ = 0;
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t draws_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Glorot-uniform matrix: entries i.i.d. uniform on
/// [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))], drawn row-major.
Mat glorot_init(Rng& rng, int rows, int cols);

/// Standard-normal vector of length n.
Vec normal_vec(Rng& rng, int n);

/// Uniformly random unit vector of length n (normalized Gaussian).
Vec unit_vec(Rng& rng, int n);

}  // namespace silab
