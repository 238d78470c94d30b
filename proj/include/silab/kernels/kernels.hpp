#pragma once

#include <span>
#include <vector>

#include "silab/netmodel/types.hpp"
#include "silab/numcore/types.hpp"

namespace silab::kernels {

/// One normalized layer's forward products for a batch. All matrices are
/// B x K (batch by neuron): p raw projections w_k^T x_b, q centered
/// projections, z the layer output gamma*q/denom + beta. In kRemoved mode
/// q == p, mean == 0 and denom == 1.
struct BnLayerForward {
  Mat z;
  Mat p;
  Mat q;
  Vec mean;   // per neuron
  Vec var;    // per neuron, divisor B
  Vec denom;  // per neuron
  Vec u;      // per input column (batch mean of x), used by backward
};

struct BnLayerBackward {
  std::vector<Vec> wgrad;  // K rows, gradient w.r.t. each weight row
  Mat coef;                // B x K; input gradient is coef * wrows
  Vec dgamma;
  Vec dbeta;
};

struct SoftmaxCe {
  double loss = 0.0;  // mean cross-entropy over the batch (no decay term)
  Mat glogits;        // B x C
};

BnLayerForward bn_layer_forward(std::span<const Vec> wrows, const Mat& x,
                                std::span<const double> gamma,
                                std::span<const double> beta, double eps, BnMode mode);

BnLayerBackward bn_layer_backward(const Mat& gz, const BnLayerForward& fwd,
                                  std::span<const Vec> wrows, const Mat& x,
                                  std::span<const double> gamma, double eps, BnMode mode);

/// out(b, k) = <wrows[k], x.row(b)>
Mat project_rows(std::span<const Vec> wrows, const Mat& x);

/// out.row(b) = sum_k coef(b, k) * wrows[k]
Mat input_backward(const Mat& coef, std::span<const Vec> wrows);

Mat activation_forward(const Mat& z, Activation act);

/// Elementwise sigma'(z) * gx.
Mat activation_backward(const Mat& z, const Mat& gx, Activation act);

SoftmaxCe softmax_ce(const Mat& logits, std::span<const int> labels);

double activation_eval(double z, Activation act);
double activation_deriv(double z, Activation act);

/// Naive definitional implementations, kept as the reference the parallel
/// kernels are tested and benchmarked against. The BN pair materializes the
/// d x d batch covariance S and evaluates |w|_{S+eps I} directly, so it
/// agrees with the streaming version to rounding, not bit-for-bit.
namespace serial {

BnLayerForward bn_layer_forward(std::span<const Vec> wrows, const Mat& x,
                                std::span<const double> gamma,
                                std::span<const double> beta, double eps, BnMode mode);

BnLayerBackward bn_layer_backward(const Mat& gz, const BnLayerForward& fwd,
                                  std::span<const Vec> wrows, const Mat& x,
                                  std::span<const double> gamma, double eps, BnMode mode);

Mat project_rows(std::span<const Vec> wrows, const Mat& x);
Mat input_backward(const Mat& coef, std::span<const Vec> wrows);
Mat activation_forward(const Mat& z, Activation act);
Mat activation_backward(const Mat& z, const Mat& gx, Activation act);
SoftmaxCe softmax_ce(const Mat& logits, std::span<const int> labels);

}  // namespace serial

}  // namespace silab::kernels
