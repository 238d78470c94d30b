#include "silab/invariance/checks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "silab/numcore/linalg.hpp"

namespace silab {

CheckReport CheckReport::make(std::string name, double violation, double tolerance,
                              long samples, std::string detail) {
  CheckReport r;
  r.name = std::move(name);
  r.violation = violation;
  r.tolerance = tolerance;
  r.pass = violation <= tolerance;
  r.samples = samples;
  r.detail = std::move(detail);
  return r;
}

Gradients finite_diff_grad(const LossFn& loss, const ParamState& at, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");

  // Flatten coordinates so the loop parallelizes over independent entries.
  struct Coord {
    int group;  // -1 for g
    int index;
  };
  std::vector<Coord> coords;
  for (std::size_t i = 0; i < at.w.size(); ++i)
    for (std::size_t j = 0; j < at.w[i].size(); ++j)
      coords.push_back({static_cast<int>(i), static_cast<int>(j)});
  for (std::size_t j = 0; j < at.g.size(); ++j) coords.push_back({-1, static_cast<int>(j)});

  Gradients out;
  out.w.resize(at.w.size());
  for (std::size_t i = 0; i < at.w.size(); ++i) out.w[i].assign(at.w[i].size(), 0.0);
  out.g.assign(at.g.size(), 0.0);

  const int n = static_cast<int>(coords.size());
  std::vector<unsigned char> bad(n, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < n; ++c) {
    ParamState probe = at;
    double& slot = coords[c].group < 0 ? probe.g[coords[c].index]
                                       : probe.w[coords[c].group][coords[c].index];
    const double base = slot;
    slot = base + h;
    const double up = loss(probe);
    slot = base - h;
    const double down = loss(probe);
    const double d = (up - down) / (2.0 * h);
    if (!std::isfinite(d)) {
      bad[c] = 1;
      continue;
    }
    if (coords[c].group < 0)
      out.g[coords[c].index] = d;
    else
      out.w[coords[c].group][coords[c].index] = d;
  }
  for (int c = 0; c < n; ++c)
    if (bad[c]) throw std::runtime_error("finite_diff_grad: non-finite loss evaluation");
  return out;
}

CheckReport check_scale_invariance(const LossFn& loss, const ParamState& params,
                                   std::span<const double> scales) {
  for (double c : scales)
    if (c <= 0.0) throw std::invalid_argument("check_scale_invariance: scales must be > 0");
  const double base = loss(params);
  double worst = 0.0;
  long samples = 0;
  for (double c : scales) {
    for (int i = -1; i < static_cast<int>(params.w.size()); ++i) {
      const double scaled = loss(scale_group(params, i, c));
      worst = std::max(worst, std::fabs(scaled - base));
      ++samples;
    }
  }
  return CheckReport::make("scale_invariance", worst, 1e-10 * (1.0 + std::fabs(base)),
                           samples);
}

CheckReport check_grad_scaling(const GradFn& grad, const ParamState& params, double c) {
  if (c <= 0.0) throw std::invalid_argument("check_grad_scaling: c must be > 0");
  const Gradients base = grad(params);
  double denom = 0.0;
  for (const auto& gw : base.w) denom = std::max(denom, norm2(gw));
  denom = std::max(denom, norm2(base.g));
  if (denom == 0.0) denom = 1.0;

  double worst = 0.0;
  long samples = 0;
  for (std::size_t i = 0; i < params.w.size(); ++i) {
    const Gradients scaled = grad(scale_group(params, static_cast<int>(i), c));
    for (std::size_t j = 0; j < params.w.size(); ++j) {
      const double expect = (i == j) ? 1.0 / c : 1.0;
      for (std::size_t t = 0; t < base.w[j].size(); ++t)
        worst = std::max(worst,
                         std::fabs(scaled.w[j][t] - expect * base.w[j][t]) / denom);
    }
    for (std::size_t t = 0; t < base.g.size(); ++t)
      worst = std::max(worst, std::fabs(scaled.g[t] - base.g[t]) / denom);
    ++samples;
  }
  return CheckReport::make("grad_scaling", worst, 1e-10, samples);
}

CheckReport check_perpendicularity(const GradFn& grad, const ParamState& params) {
  const Gradients g = grad(params);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.w.size(); ++i) {
    const double wn = norm2(params.w[i]);
    const double gn = norm2(g.w[i]);
    if (wn == 0.0 || gn == 0.0) continue;
    worst = std::max(worst, std::fabs(dot(params.w[i], g.w[i])) / (wn * gn));
  }
  return CheckReport::make("perpendicularity", worst, 1e-10,
                           static_cast<long>(params.w.size()));
}

CheckReport check_norm_recursion(const WStepTrace& trace, double tolerance) {
  if (trace.w.size() != trace.grad.size() + 1 || trace.grad.size() != trace.eta.size())
    throw std::invalid_argument("check_norm_recursion: inconsistent trace lengths");
  double worst = 0.0;
  for (std::size_t t = 0; t < trace.grad.size(); ++t) {
    for (std::size_t i = 0; i < trace.w[t].size(); ++i) {
      const double before = dot(trace.w[t][i], trace.w[t][i]);
      const double after = dot(trace.w[t + 1][i], trace.w[t + 1][i]);
      const double step = trace.eta[t] * trace.eta[t] * dot(trace.grad[t][i], trace.grad[t][i]);
      worst = std::max(worst, std::fabs(after - before - step) / before);
    }
  }
  return CheckReport::make("norm_recursion", worst, tolerance,
                           static_cast<long>(trace.grad.size()));
}

CheckReport check_grad_norm_bound(const std::vector<Vec>& grad_v_sq_per_step,
                                  std::span<const double> lvv_diag) {
  double worst = 0.0;
  long samples = 0;
  for (const auto& step : grad_v_sq_per_step) {
    if (step.size() != lvv_diag.size())
      throw std::invalid_argument("check_grad_norm_bound: group count mismatch");
    for (std::size_t i = 0; i < step.size(); ++i) {
      const double bound = std::numbers::pi * lvv_diag[i];
      if (bound <= 0.0)
        throw std::invalid_argument("check_grad_norm_bound: nonpositive Lvv estimate");
      worst = std::max(worst, std::sqrt(step[i]) / bound);
      ++samples;
    }
  }
  return CheckReport::make("grad_norm_bound", worst, 1.0, samples);
}

}  // namespace silab
