#include <cmath>
#include <numbers>
#include <stdexcept>

#include "silab/analysis/analysis.hpp"

namespace silab {

double lgg_formula(int classes, double lambda) {
  if (classes < 2) throw std::invalid_argument("lgg_formula: need at least two classes");
  if (lambda < 0.0) throw std::invalid_argument("lgg_formula: lambda must be nonnegative");
  return classes / 2.0 + lambda;
}

BoundConstants compute_bound_constants(const SmoothnessEstimate& est, double c_g,
                                       double eta_w, std::span<const double> w0_norms) {
  const int m = est.lvv.rows;
  if (est.lvv.cols != m || static_cast<int>(est.lvg.size()) != m ||
      static_cast<int>(w0_norms.size()) != m)
    throw std::invalid_argument("compute_bound_constants: shape mismatch");
  if (c_g <= 0.0 || c_g >= 1.0)
    throw std::invalid_argument("compute_bound_constants: c_g must lie in (0, 1)");
  if (est.lgg <= 0.0) throw std::invalid_argument("compute_bound_constants: Lgg must be positive");

  BoundConstants out;
  out.c.resize(m);
  out.k.resize(m);
  for (int i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) row_sum += est.lvv.at(i, j);
    out.c[i] = 0.5 * row_sum + est.lvg[i] * est.lvg[i] * m / (c_g * est.lgg);

    const double w0_sq = w0_norms[i] * w0_norms[i];
    if (w0_sq <= 0.0)
      throw std::invalid_argument("compute_bound_constants: w0 norms must be positive");
    const double pi_lvv = std::numbers::pi * est.lvv.at(i, i);
    out.k[i] = (out.c[i] * eta_w / w0_sq + 0.5) * (2.0 * out.c[i] + pi_lvv * pi_lvv * eta_w / w0_sq);
  }
  return out;
}

CheckReport check_weight_scale_bound(const std::vector<TrajectoryRecord>& records,
                                     const BoundConstants& constants, double eta_w,
                                     double eta_g, double c_g, double l_min) {
  if (records.size() < 2)
    throw std::invalid_argument("check_weight_scale_bound: need at least two records");
  const std::size_t m = constants.c.size();
  if (records.front().w_norm.size() != m)
    throw std::invalid_argument("check_weight_scale_bound: group count mismatch");
  for (std::size_t t = 0; t < records.size(); ++t)
    if (records[t].t != static_cast<std::int64_t>(t))
      throw std::invalid_argument(
          "check_weight_scale_bound: needs a trajectory recorded at every step");

  double lhs = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w0 = records.front().w_norm[i];
    const double wt = records.back().w_norm[i];
    lhs += (wt * wt - w0 * w0) / (2.0 * eta_w);
  }
  double grad_g_sum = 0.0;
  for (std::size_t t = 0; t + 1 < records.size(); ++t) grad_g_sum += records[t].grad_g_sq;
  lhs += 0.5 * c_g * eta_g * grad_g_sum;

  double rhs = records.front().loss - l_min;
  for (double k : constants.k) rhs += k;

  CheckReport r = CheckReport::make("weight_scale_bound", rhs > 0.0 ? lhs / rhs : 1e300, 1.0,
                                    static_cast<long>(records.size()));
  r.detail = "lhs=" + std::to_string(lhs) + " rhs=" + std::to_string(rhs);
  return r;
}

}  // namespace silab
