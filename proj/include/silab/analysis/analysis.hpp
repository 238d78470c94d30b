#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "silab/invariance/checks.hpp"
#include "silab/netmodel/model.hpp"
#include "silab/optim/trainer.hpp"

namespace silab {

/// Empirically probed curvature bounds on the intrinsic domain. The lvv/lvg/
/// lgg/g_noise fields hold the raw maxima seen by the probe; inflated() scales
/// them by the safety margin the bound monitors consume. Estimates are maxima
/// of sampled responses, so they lower-bound the true operator norms; the
/// margin is what makes treating them as upper bounds defensible.
struct SmoothnessEstimate {
  Mat lvv;             // m x m, symmetric
  Vec lvg;             // m
  double lgg = 0.0;
  double g_noise = 0.0;  // SGD gradient-noise bound on g
  int samples = 0;
  double inflation = 1.5;

  SmoothnessEstimate inflated() const;
};

/// A generic twice-differentiable objective for the probe: gradient callback
/// plus the block layout.
struct ProbeProblem {
  std::vector<int> v_dims;
  int g_dim = 0;
  std::function<Gradients(const ParamState&)> grad;
};

/// Block operator-norm probe via symmetric finite-difference Hessian-vector
/// products at random points with every v_i on the unit sphere; maxima over
/// n_samples samples. Does not fill g_noise.
SmoothnessEstimate probe_smoothness(const ProbeProblem& problem, int n_samples, Rng& rng,
                                    double h = 1e-4);

/// Same probe wired to the network loss over the full dataset, plus a g-noise
/// estimate taken as the max over sampled minibatches of
/// |grad_g F_z - grad_g L| at the probe points.
SmoothnessEstimate probe_smoothness(const NetworkSpec& spec, const Dataset& data,
                                    int n_samples, Rng& rng, int noise_batch = 16,
                                    double h = 1e-4);

/// Lgg <= C/2 + lambda for the softmax cross-entropy loss with decay lambda.
double lgg_formula(int classes, double lambda);

struct BoundConstants {
  Vec c;  // C_i = (1/2) sum_j Lvv_ij + Lvg_i^2 m / (c_g Lgg)
  Vec k;  // K_i = (C_i eta_w/|w0_i|^2 + 1/2)(2 C_i + (pi Lvv_ii)^2 eta_w/|w0_i|^2)
};
BoundConstants compute_bound_constants(const SmoothnessEstimate& est, double c_g,
                                       double eta_w, std::span<const double> w0_norms);

/// Full-batch GD weight-scale inequality:
///   sum_i (|w_T|^2 - |w_0|^2)/(2 eta_w) + (c_g eta_g/2) sum_t |grad_g L_t|^2
///     <= L(theta_0) - L_min + sum_i K_i.
/// l_min is the best observed loss (a proxy >= the true infimum, which makes
/// the right-hand side smaller, i.e. the check conservative). The report's
/// violation is lhs/rhs.
CheckReport check_weight_scale_bound(const std::vector<TrajectoryRecord>& records,
                                     const BoundConstants& constants, double eta_w,
                                     double eta_g, double c_g, double l_min);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::int64_t t_lo = 0;
  std::int64_t t_hi = 0;
  int points = 0;
};

/// Least squares on (log t, log value) over t in [t_lo, t_hi]. With
/// running_min the series is first replaced by its prefix minimum. Requires
/// at least 8 in-window points, all positive, and t_lo >= 1.
RateFit fit_rate(std::span<const std::int64_t> t, std::span<const double> value,
                 std::int64_t t_lo, std::int64_t t_hi, bool running_min = false);

struct SequenceBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// For a_0..a_T in [0, B] with a_0 > 0:
///   sum_{t=1..T} a_t / sum_{tau<t} a_tau
///     <= log2(sum_{t<T} a_t / a_0) + 1 + 2B/a_0.
SequenceBound sequence_bound_check(std::span<const double> a, double bound_b);

}  // namespace silab
