#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "silab/invariance/checks.hpp"
#include "silab/netmodel/model.hpp"

namespace silab {

/// eta(t) = eta0 * (t+1)^(-alpha); constant schedules are alpha = 0.
struct LrSchedule {
  enum class Kind { kConstant, kPower };
  Kind kind = Kind::kConstant;
  double eta0 = 0.1;
  double alpha = 0.0;

  double at(std::int64_t t) const;
  void validate() const;
};

/// eta_g = 4(1 - c_g) / (C + 2*lambda), the tuned g rate for the softmax
/// cross-entropy network (equals 2(1 - c_g)/Lgg with Lgg = C/2 + lambda).
double eta_g_default(int classes, double lambda, double c_g);

/// eta_w(t) / |w|^2, the step size the normalized weight actually experiences.
double effective_lr(double eta_w_t, double w_norm_sq);

enum class OptimizerKind { kGd, kSgd, kPsgd, kIntrinsic };

struct TrainerConfig {
  OptimizerKind kind = OptimizerKind::kGd;
  LrSchedule eta_w;
  LrSchedule eta_g;
  std::int64_t steps = 1;
  std::uint64_t seed = 0;
  int batch_size = 16;  // SGD / PSGD only
  double c_g = 0.1;
  int record_every = 1;
  bool capture_w_trace = false;  // fill RunResult::trace for the lemma checkers

  void validate() const;
};

/// Per-step metrics, taken at theta_t before the step. Gradient norms are of
/// the monitored objective (the whole dataset treated as one batch); the
/// step_grad_w_sq entries are the squared norms of the stepping gradient
/// (minibatch for SGD/PSGD), which drive the norm-growth recursion.
struct TrajectoryRecord {
  std::int64_t t = 0;
  double loss = 0.0;
  std::vector<double> grad_v_sq;  // per group, |grad_{v_i} L|^2 = |w_i|^2 |grad_{w_i} L|^2
  double grad_v_sq_total = 0.0;
  double grad_g_sq = 0.0;
  std::vector<double> w_norm;    // per group
  std::vector<double> eff_lr;    // per group
  std::vector<double> step_grad_w_sq;
  double g_norm = 0.0;
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  bool diverged = false;
  std::int64_t diverged_at = -1;
  ParamState final_params;
  WStepTrace trace;
};

ParamState gd_step(const ParamState& params, const Gradients& grads, double eta_w,
                   double eta_g);

/// gd_step followed by rescaling each weight group back to its target norm.
ParamState psgd_step(const ParamState& params, const Gradients& grads, double eta_w,
                     double eta_g, std::span<const double> target_norms);

/// WNGrad-with-projection state: unit directions v and accumulated G (= |w|^2
/// in the equivalent raw-weight run).
struct IntrinsicState {
  std::vector<Vec> v;
  std::vector<double> big_g;
};

/// v <- Pi(v - (eta/G) grad_v), G <- G + (eta^2/G) |grad_v|^2.
IntrinsicState intrinsic_step(const IntrinsicState& state, const std::vector<Vec>& grad_v,
                              double eta_w);

RunResult run_training(const NetworkSpec& spec, const TrainerConfig& config,
                       const Dataset& data,
                       const std::optional<ParamState>& init = std::nullopt);

constexpr double kDivergenceLossCap = 1e12;

const char* to_string(OptimizerKind k);

}  // namespace silab
