#include <cmath>
#include <stdexcept>

#include "silab/kernels/kernels.hpp"
#include "silab/numcore/linalg.hpp"

// Definitional reference path. The normalization denominator is evaluated as
// |w|_{S+eps I} with the d x d batch covariance S materialized, exactly as the
// smoothed normalizer is defined, and the backward assembles S*w explicitly.
// O(B d^2) per neuron, single-threaded.

namespace silab::kernels::serial {

namespace {

Mat batch_covariance(const Mat& x, const Vec& u) {
  Mat s(x.cols, x.cols);
  for (int b = 0; b < x.rows; ++b) {
    auto row = x.row(b);
    for (int i = 0; i < x.cols; ++i)
      for (int j = 0; j < x.cols; ++j)
        s.at(i, j) += (row[i] - u[i]) * (row[j] - u[j]);
  }
  for (auto& v : s.data) v /= x.rows;
  return s;
}

Vec matvec(const Mat& a, const Vec& v) {
  Vec out(a.rows, 0.0);
  for (int i = 0; i < a.rows; ++i) out[i] = dot(a.row(i), v);
  return out;
}

}  // namespace

BnLayerForward bn_layer_forward(std::span<const Vec> wrows, const Mat& x,
                                std::span<const double> gamma,
                                std::span<const double> beta, double eps, BnMode mode) {
  if (x.rows < 2) throw std::invalid_argument("bn_layer_forward: batch size must be >= 2");
  const int units = static_cast<int>(wrows.size());
  BnLayerForward out;
  out.z = Mat(x.rows, units);
  out.p = Mat(x.rows, units);
  out.q = Mat(x.rows, units);
  out.mean.assign(units, 0.0);
  out.var.assign(units, 0.0);
  out.denom.assign(units, 0.0);
  out.u = col_mean(x);
  const Mat s = batch_covariance(x, out.u);

  for (int k = 0; k < units; ++k) {
    const Vec& w = wrows[k];
    for (int b = 0; b < x.rows; ++b) out.p.at(b, k) = dot(w, x.row(b));
    if (mode == BnMode::kRemoved) {
      out.denom[k] = 1.0;
      for (int b = 0; b < x.rows; ++b) {
        out.q.at(b, k) = out.p.at(b, k);
        out.z.at(b, k) = gamma[k] * out.p.at(b, k) + beta[k];
      }
      continue;
    }
    const Vec sw = matvec(s, w);
    const double wsw = dot(w, sw);
    out.var[k] = wsw;
    const double d2 = (mode == BnMode::kSmoothed) ? wsw + eps * dot(w, w) : wsw + eps;
    if (d2 <= 0.0)
      throw DegenerateBatchError("bn_layer_forward: zero normalization denominator (unit " +
                                 std::to_string(k) + ")");
    const double denom = std::sqrt(d2);
    out.denom[k] = denom;
    double mean = 0.0;
    for (int b = 0; b < x.rows; ++b) mean += out.p.at(b, k);
    mean /= x.rows;
    out.mean[k] = mean;
    for (int b = 0; b < x.rows; ++b) {
      double q = 0.0;
      auto row = x.row(b);
      for (int j = 0; j < x.cols; ++j) q += w[j] * (row[j] - out.u[j]);
      out.q.at(b, k) = q;
      out.z.at(b, k) = gamma[k] * q / denom + beta[k];
    }
  }
  return out;
}

BnLayerBackward bn_layer_backward(const Mat& gz, const BnLayerForward& fwd,
                                  std::span<const Vec> wrows, const Mat& x,
                                  std::span<const double> gamma, double eps, BnMode mode) {
  const int units = static_cast<int>(wrows.size());
  const int batch = x.rows;
  const int dim = x.cols;
  BnLayerBackward out;
  out.wgrad.resize(units);
  out.coef = Mat(batch, units);
  out.dgamma.assign(units, 0.0);
  out.dbeta.assign(units, 0.0);
  const Mat s = batch_covariance(x, fwd.u);

  for (int k = 0; k < units; ++k) {
    const Vec& w = wrows[k];
    Vec& wg = out.wgrad[k];
    wg.assign(dim, 0.0);
    double s0 = 0.0, s1 = 0.0;
    for (int b = 0; b < batch; ++b) {
      s0 += gz.at(b, k);
      s1 += gz.at(b, k) * fwd.q.at(b, k);
    }
    out.dbeta[k] = s0;
    out.dgamma[k] = s1 / fwd.denom[k];

    if (mode == BnMode::kRemoved) {
      for (int b = 0; b < batch; ++b) {
        const double c = gamma[k] * gz.at(b, k);
        out.coef.at(b, k) = c;
        axpy(c, x.row(b), wg);
      }
      continue;
    }

    const double denom = fwd.denom[k];
    const double inv_d2 = 1.0 / (denom * denom);
    const Vec sw = matvec(s, w);
    for (int b = 0; b < batch; ++b) {
      auto row = x.row(b);
      for (int j = 0; j < dim; ++j) wg[j] += gz.at(b, k) * (row[j] - fwd.u[j]);
    }
    for (int j = 0; j < dim; ++j) {
      double t = wg[j] - s1 * inv_d2 * sw[j];
      if (mode == BnMode::kSmoothed) t -= s1 * inv_d2 * eps * w[j];
      wg[j] = gamma[k] / denom * t;
    }
    for (int b = 0; b < batch; ++b)
      out.coef.at(b, k) = gamma[k] / denom *
                          (gz.at(b, k) - s0 / batch - fwd.q.at(b, k) * s1 * inv_d2 / batch);
  }
  return out;
}

Mat project_rows(std::span<const Vec> wrows, const Mat& x) {
  const int units = static_cast<int>(wrows.size());
  Mat out(x.rows, units);
  for (int b = 0; b < x.rows; ++b)
    for (int k = 0; k < units; ++k) out.at(b, k) = dot(wrows[k], x.row(b));
  return out;
}

Mat input_backward(const Mat& coef, std::span<const Vec> wrows) {
  const int units = static_cast<int>(wrows.size());
  const int dim = units > 0 ? static_cast<int>(wrows[0].size()) : 0;
  Mat out(coef.rows, dim);
  for (int b = 0; b < coef.rows; ++b) {
    auto row = out.row(b);
    for (int k = 0; k < units; ++k) axpy(coef.at(b, k), wrows[k], row);
  }
  return out;
}

Mat activation_forward(const Mat& z, Activation act) {
  Mat out(z.rows, z.cols);
  for (int b = 0; b < z.rows; ++b)
    for (int c = 0; c < z.cols; ++c) out.at(b, c) = activation_eval(z.at(b, c), act);
  return out;
}

Mat activation_backward(const Mat& z, const Mat& gx, Activation act) {
  Mat out(z.rows, z.cols);
  for (int b = 0; b < z.rows; ++b)
    for (int c = 0; c < z.cols; ++c)
      out.at(b, c) = activation_deriv(z.at(b, c), act) * gx.at(b, c);
  return out;
}

SoftmaxCe softmax_ce(const Mat& logits, std::span<const int> labels) {
  const int batch = logits.rows;
  const int classes = logits.cols;
  SoftmaxCe out;
  out.glogits = Mat(batch, classes);
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) {
    double hi = logits.at(b, 0);
    for (int c = 1; c < classes; ++c) hi = std::max(hi, logits.at(b, c));
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(logits.at(b, c) - hi);
    const double lse = hi + std::log(sum);
    loss += lse - logits.at(b, labels[b]);
    for (int c = 0; c < classes; ++c) {
      const double soft = std::exp(logits.at(b, c) - lse);
      out.glogits.at(b, c) = (soft - (c == labels[b] ? 1.0 : 0.0)) / batch;
    }
  }
  out.loss = loss / batch;
  return out;
}

}  // namespace silab::kernels::serial
