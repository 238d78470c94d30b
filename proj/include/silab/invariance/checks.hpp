#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "silab/netmodel/model.hpp"

namespace silab {

struct CheckReport {
  std::string name;
  double violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  long samples = 0;
  std::string detail;

  static CheckReport make(std::string name, double violation, double tolerance,
                          long samples = 1, std::string detail = {});
};

using LossFn = std::function<double(const ParamState&)>;
using GradFn = std::function<Gradients(const ParamState&)>;

/// Central differences (f(x+h e_j) - f(x-h e_j)) / 2h on every coordinate of
/// every weight group and of g. Throws on a non-finite evaluation.
Gradients finite_diff_grad(const LossFn& loss, const ParamState& at, double h);

/// Max over groups i and scales c of |F(w_i -> c w_i) - F|, plus the
/// all-groups-at-once case; tolerance 1e-10 * (1 + |F|).
CheckReport check_scale_invariance(const LossFn& loss, const ParamState& params,
                                   std::span<const double> scales);

/// Gradient scaling law: at (c w_i) the i-th gradient block equals (1/c) times
/// the block at w_i; every other block, and the g block, is unchanged.
/// Reports the max relative deviation.
CheckReport check_grad_scaling(const GradFn& grad, const ParamState& params, double c);

/// |<w_i, grad_i>| / (|w_i| |grad_i|), maxed over groups.
CheckReport check_perpendicularity(const GradFn& grad, const ParamState& params);

/// Per-step snapshots of the scale-invariant weights along a plain gradient
/// run: w[t] holds the groups before step t, grad[t]/eta[t] the step taken.
/// w has one more entry than grad.
struct WStepTrace {
  std::vector<std::vector<Vec>> w;
  std::vector<std::vector<Vec>> grad;
  std::vector<double> eta;
};

/// |w_{t+1}|^2 = |w_t|^2 + eta_t^2 |grad_t|^2, residual relative to |w_t|^2.
CheckReport check_norm_recursion(const WStepTrace& trace, double tolerance = 1e-10);

/// Gradient bound |grad_{w_i} L| * |w_i| <= pi * Lvv_ii, consumed as the
/// per-step intrinsic gradient norms |grad_{v_i} L|^2; reports the max ratio
/// against pi * Lvv_ii (pass when <= 1).
CheckReport check_grad_norm_bound(const std::vector<Vec>& grad_v_sq_per_step,
                                  std::span<const double> lvv_diag);

}  // namespace silab
