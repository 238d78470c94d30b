#include "silab/numcore/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "silab/numcore/linalg.hpp"

namespace silab {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_key_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  ++draws_;
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform_index: n must be >= 1");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

Rng Rng::split(std::string_view label) const {
  std::uint64_t key = seed_key_ ^ (0x9e3779b97f4a7c15ULL * fnv1a64(label));
  return Rng(splitmix64(key));
}

Rng Rng::split(std::uint64_t index) const {
  std::uint64_t key = seed_key_ ^ (0xd1b54a32d192ed03ULL * (index + 1));
  return Rng(splitmix64(key));
}

Mat glorot_init(Rng& rng, int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("glorot_init: rows, cols must be >= 1");
  const double limit = std::sqrt(6.0 / (rows + cols));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m.at(r, c) = rng.uniform(-limit, limit);
  return m;
}

Vec normal_vec(Rng& rng, int n) {
  Vec v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

Vec unit_vec(Rng& rng, int n) {
  Vec v = normal_vec(rng, n);
  double nrm = norm2(v);
  while (nrm == 0.0) {  // astronomically unlikely; redraw
    v = normal_vec(rng, n);
    nrm = norm2(v);
  }
  for (auto& x : v) x /= nrm;
  return v;
}

}  // namespace silab
