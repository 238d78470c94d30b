#include <cmath>
#include <stdexcept>
#include <string>

#include "silab/analysis/analysis.hpp"

namespace silab {

RateFit fit_rate(std::span<const std::int64_t> t, std::span<const double> value,
                 std::int64_t t_lo, std::int64_t t_hi, bool running_min) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (t_lo < 1 || t_lo >= t_hi) throw std::invalid_argument("fit_rate: bad window");

  Vec series(value.begin(), value.end());
  if (running_min)
    for (std::size_t i = 1; i < series.size(); ++i)
      series[i] = std::min(series[i], series[i - 1]);

  Vec lx, ly;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (series[i] <= 0.0)
      throw std::invalid_argument("fit_rate: nonpositive value at t=" + std::to_string(t[i]));
    lx.push_back(std::log(static_cast<double>(t[i])));
    ly.push_back(std::log(series[i]));
  }
  const int n = static_cast<int>(lx.size());
  if (n < 8) throw std::invalid_argument("fit_rate: need at least 8 points in window");

  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: window has no t spread");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.points = n;
  return fit;
}

SequenceBound sequence_bound_check(std::span<const double> a, double bound_b) {
  if (a.size() < 2) throw std::invalid_argument("sequence_bound_check: need a_0..a_T, T >= 1");
  if (bound_b <= 0.0) throw std::invalid_argument("sequence_bound_check: B must be positive");
  if (a[0] <= 0.0) throw std::invalid_argument("sequence_bound_check: a_0 must be positive");
  for (double v : a)
    if (v < 0.0 || v > bound_b)
      throw std::invalid_argument("sequence_bound_check: entries must lie in [0, B]");

  SequenceBound out;
  double prefix = a[0];
  for (std::size_t t = 1; t < a.size(); ++t) {
    out.lhs += a[t] / prefix;
    prefix += a[t];
  }
  double head = 0.0;  // sum a_0 .. a_{T-1}
  for (std::size_t t = 0; t + 1 < a.size(); ++t) head += a[t];
  out.rhs = std::log2(head / a[0]) + 1.0 + 2.0 * bound_b / a[0];
  out.pass = out.lhs <= out.rhs;
  return out;
}

}  // namespace silab
