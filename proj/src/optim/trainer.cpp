#include "silab/optim/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "silab/numcore/linalg.hpp"

namespace silab {

double LrSchedule::at(std::int64_t t) const {
  if (kind == Kind::kConstant) return eta0;
  return eta0 * std::pow(static_cast<double>(t + 1), -alpha);
}

void LrSchedule::validate() const {
  if (eta0 <= 0.0) throw std::invalid_argument("LrSchedule: eta0 must be positive");
  if (kind == Kind::kPower && (alpha < 0.0 || alpha > 0.5))
    throw std::invalid_argument("LrSchedule: alpha must lie in [0, 1/2]");
}

double eta_g_default(int classes, double lambda, double c_g) {
  if (classes < 2) throw std::invalid_argument("eta_g_default: need at least two classes");
  if (lambda <= 0.0) throw std::invalid_argument("eta_g_default: lambda must be positive");
  if (c_g <= 0.0 || c_g >= 1.0)
    throw std::invalid_argument("eta_g_default: c_g must lie in (0, 1)");
  return 4.0 * (1.0 - c_g) / (classes + 2.0 * lambda);
}

double effective_lr(double eta_w_t, double w_norm_sq) {
  if (w_norm_sq <= 0.0) throw std::domain_error("effective_lr: nonpositive weight norm");
  return eta_w_t / w_norm_sq;
}

void TrainerConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("TrainerConfig: steps must be >= 1");
  if (record_every < 1) throw std::invalid_argument("TrainerConfig: record_every must be >= 1");
  if (c_g <= 0.0 || c_g >= 1.0)
    throw std::invalid_argument("TrainerConfig: c_g must lie in (0, 1)");
  if ((kind == OptimizerKind::kSgd || kind == OptimizerKind::kPsgd) && batch_size < 2)
    throw std::invalid_argument("TrainerConfig: batch size must be >= 2");
  eta_w.validate();
  eta_g.validate();
}

const char* to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kGd: return "gd";
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kPsgd: return "psgd";
    case OptimizerKind::kIntrinsic: return "intrinsic";
  }
  return "?";
}

ParamState gd_step(const ParamState& params, const Gradients& grads, double eta_w,
                   double eta_g) {
  ParamState out = params;
  for (std::size_t i = 0; i < out.w.size(); ++i) axpy(-eta_w, grads.w[i], out.w[i]);
  axpy(-eta_g, grads.g, out.g);
  return out;
}

ParamState psgd_step(const ParamState& params, const Gradients& grads, double eta_w,
                     double eta_g, std::span<const double> target_norms) {
  if (target_norms.size() != params.w.size())
    throw std::invalid_argument("psgd_step: target norm count mismatch");
  ParamState out = gd_step(params, grads, eta_w, eta_g);
  for (std::size_t i = 0; i < out.w.size(); ++i) {
    if (target_norms[i] <= 0.0)
      throw std::invalid_argument("psgd_step: target norms must be positive");
    const double n = norm2(out.w[i]);
    if (n == 0.0) throw std::domain_error("psgd_step: zero post-step weight");
    scale(out.w[i], target_norms[i] / n);
  }
  return out;
}

IntrinsicState intrinsic_step(const IntrinsicState& state, const std::vector<Vec>& grad_v,
                              double eta_w) {
  if (grad_v.size() != state.v.size())
    throw std::invalid_argument("intrinsic_step: gradient group count mismatch");
  IntrinsicState out = state;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double g = state.big_g[i];
    if (g <= 0.0) throw std::domain_error("intrinsic_step: G must be positive");
    Vec v = state.v[i];
    axpy(-eta_w / g, grad_v[i], v);
    const double n = norm2(v);
    if (n == 0.0) throw std::domain_error("intrinsic_step: pre-projection vector vanished");
    scale(v, 1.0 / n);
    out.v[i] = std::move(v);
    out.big_g[i] = g + eta_w * eta_w / g * dot(grad_v[i], grad_v[i]);
  }
  return out;
}

namespace {

std::vector<double> group_norms(const std::vector<Vec>& w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = norm2(w[i]);
  return out;
}

TrajectoryRecord make_record(std::int64_t t, double loss, const Gradients& monitor,
                             std::span<const double> w_norm_sq, double eta_w_t,
                             const Gradients& stepping, double g_norm, bool grad_at_unit) {
  TrajectoryRecord rec;
  rec.t = t;
  rec.loss = loss;
  rec.g_norm = g_norm;
  const std::size_t m = monitor.w.size();
  rec.grad_v_sq.resize(m);
  rec.w_norm.resize(m);
  rec.eff_lr.resize(m);
  rec.step_grad_w_sq.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double gw_sq = dot(monitor.w[i], monitor.w[i]);
    // |grad_{v_i}|^2 = |w_i|^2 |grad_{w_i}|^2; intrinsic runs already hold the
    // gradient at the unit point, so no conversion there.
    rec.grad_v_sq[i] = grad_at_unit ? gw_sq : w_norm_sq[i] * gw_sq;
    rec.grad_v_sq_total += rec.grad_v_sq[i];
    rec.w_norm[i] = std::sqrt(w_norm_sq[i]);
    rec.eff_lr[i] = effective_lr(eta_w_t, w_norm_sq[i]);
    rec.step_grad_w_sq[i] = dot(stepping.w[i], stepping.w[i]);
  }
  rec.grad_g_sq = dot(monitor.g, monitor.g);
  return rec;
}

}  // namespace

RunResult run_training(const NetworkSpec& spec, const TrainerConfig& config,
                       const Dataset& data,
                       const std::optional<ParamState>& init) {
  spec.validate();
  config.validate();
  if (data.size() < 2) throw std::invalid_argument("run_training: dataset too small");

  Rng root(config.seed);
  Rng init_rng = root.split("init");
  Rng batch_rng = root.split("batches");

  ParamState params = init ? *init : init_params(spec, init_rng);
  const bool stochastic =
      config.kind == OptimizerKind::kSgd || config.kind == OptimizerKind::kPsgd;
  const Batch full = full_batch(data);

  RunResult out;
  const std::vector<double> psgd_targets = group_norms(params.w);

  IntrinsicState istate;
  if (config.kind == OptimizerKind::kIntrinsic) {
    const ParamState unit = normalize_params(params);
    istate.v = unit.w;
    istate.big_g.resize(params.w.size());
    for (std::size_t i = 0; i < params.w.size(); ++i)
      istate.big_g[i] = dot(params.w[i], params.w[i]);
    params = unit;  // carries v and g; scales live in big_g
  }

  for (std::int64_t t = 0; t < config.steps; ++t) {
    const double eta_w_t = config.eta_w.at(t);
    const double eta_g_t = config.eta_g.at(t);

    const Batch* step_batch = &full;
    Batch sampled;
    if (stochastic) {
      sampled = sample_batch(data, config.batch_size, batch_rng);
      step_batch = &sampled;
    }

    LossGrads step = loss_and_backward(spec, params, *step_batch);
    if (!std::isfinite(step.loss) || step.loss > kDivergenceLossCap) {
      out.diverged = true;
      out.diverged_at = t;
      break;
    }

    if (t % config.record_every == 0) {
      std::vector<double> w_norm_sq(params.w.size());
      if (config.kind == OptimizerKind::kIntrinsic)
        for (std::size_t i = 0; i < w_norm_sq.size(); ++i) w_norm_sq[i] = istate.big_g[i];
      else
        for (std::size_t i = 0; i < w_norm_sq.size(); ++i)
          w_norm_sq[i] = dot(params.w[i], params.w[i]);

      const bool at_unit = config.kind == OptimizerKind::kIntrinsic;
      if (stochastic) {
        LossGrads monitor = loss_and_backward(spec, params, full);
        out.records.push_back(make_record(t, monitor.loss, monitor.grads, w_norm_sq,
                                          eta_w_t, step.grads, norm2(params.g), at_unit));
      } else {
        out.records.push_back(make_record(t, step.loss, step.grads, w_norm_sq, eta_w_t,
                                          step.grads, norm2(params.g), at_unit));
      }
    }

    if (config.capture_w_trace) {
      out.trace.w.push_back(params.w);
      out.trace.grad.push_back(step.grads.w);
      out.trace.eta.push_back(eta_w_t);
    }

    switch (config.kind) {
      case OptimizerKind::kGd:
        params = gd_step(params, step.grads, eta_w_t, eta_g_t);
        break;
      case OptimizerKind::kSgd:
        params = gd_step(params, step.grads, eta_w_t, eta_g_t);
        break;
      case OptimizerKind::kPsgd:
        params = psgd_step(params, step.grads, eta_w_t, eta_g_t, psgd_targets);
        break;
      case OptimizerKind::kIntrinsic: {
        // At unit norm the raw-weight gradient equals the intrinsic one.
        istate = intrinsic_step(istate, step.grads.w, eta_w_t);
        params.w = istate.v;
        axpy(-eta_g_t, step.grads.g, params.g);
        break;
      }
    }
  }

  if (config.capture_w_trace) out.trace.w.push_back(params.w);
  out.final_params = std::move(params);
  return out;
}

}  // namespace silab
