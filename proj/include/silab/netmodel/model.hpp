#pragma once

#include <span>
#include <vector>

#include "silab/kernels/kernels.hpp"
#include "silab/netmodel/types.hpp"

namespace silab {

/// Smoothed-BN output of a single neuron over a batch:
/// z_b = gamma * w^T(x_b - u) / sqrt(Var_b(w^T x_b) + eps*|w|^2) + beta,
/// with batch moments using divisor B. Throws DegenerateBatchError when the
/// denominator vanishes (possible only for eps = 0 with all projections equal).
struct BnNeuronOut {
  Vec z;
  double mean = 0.0;
  double var = 0.0;
  double denom = 0.0;
};
BnNeuronOut smoothed_bn_forward(const Vec& w, const Mat& x, double gamma, double beta,
                                double eps, BnMode mode = BnMode::kSmoothed);

struct ForwardCache {
  std::vector<kernels::BnLayerForward> layers;  // index 0 = first hidden layer
  std::vector<Mat> x;                           // x[0] inputs .. x[L] logits
  double data_loss = 0.0;
  double loss = 0.0;  // data_loss + (lambda/2)|g|^2
};

ForwardCache forward(const NetworkSpec& spec, const ParamState& params, const Batch& batch);

/// Mean softmax cross-entropy plus (lambda/2)|g|^2.
double forward_loss(const NetworkSpec& spec, const ParamState& params, const Batch& batch);

/// Exact reverse-mode gradients of forward_loss w.r.t. every weight row and g,
/// including the dependence of the batch moments on w and x.
Gradients backward(const NetworkSpec& spec, const ParamState& params, const Batch& batch);

struct LossGrads {
  double loss = 0.0;
  Gradients grads;
};
LossGrads loss_and_backward(const NetworkSpec& spec, const ParamState& params,
                            const Batch& batch);

Gradients zero_gradients(const NetworkSpec& spec);

/// Flat views used by finite differencing and the smoothness probe.
std::span<const Vec> layer_rows(const ParamState& params, const NetworkSpec& spec, int layer);

}  // namespace silab
