#include "silab/kernels/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "silab/numcore/linalg.hpp"

namespace silab::kernels {

double activation_eval(double z, Activation act) {
  switch (act) {
    case Activation::kSigmoid:
      if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
      {
        const double e = std::exp(z);
        return e / (1.0 + e);
      }
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kSoftplus:
      return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
  }
  return 0.0;
}

double activation_deriv(double z, Activation act) {
  switch (act) {
    case Activation::kSigmoid: {
      const double s = activation_eval(z, Activation::kSigmoid);
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kSoftplus:
      return activation_eval(z, Activation::kSigmoid);
  }
  return 0.0;
}

namespace {

void check_layer_args(std::span<const Vec> wrows, const Mat& x,
                      std::span<const double> gamma, std::span<const double> beta) {
  if (x.rows < 2) throw std::invalid_argument("bn_layer_forward: batch size must be >= 2");
  if (wrows.empty()) throw std::invalid_argument("bn_layer_forward: no weight rows");
  for (const auto& w : wrows)
    if (static_cast<int>(w.size()) != x.cols)
      throw std::invalid_argument("bn_layer_forward: weight/input dimension mismatch");
  if (gamma.size() != wrows.size() || beta.size() != wrows.size())
    throw std::invalid_argument("bn_layer_forward: gamma/beta length mismatch");
}

// Per-neuron forward: fills column k of p, q, z and entry k of mean/var/denom.
// Returns false on a degenerate denominator (thrown after the parallel join).
bool neuron_forward(int k, std::span<const Vec> wrows, const Mat& x, double gamma,
                    double beta, double eps, BnMode mode, BnLayerForward& out) {
  const int batch = x.rows;
  const Vec& w = wrows[k];
  for (int b = 0; b < batch; ++b) out.p.at(b, k) = dot(w, x.row(b));
  if (mode == BnMode::kRemoved) {
    out.mean[k] = 0.0;
    out.var[k] = 0.0;
    out.denom[k] = 1.0;
    for (int b = 0; b < batch; ++b) {
      out.q.at(b, k) = out.p.at(b, k);
      out.z.at(b, k) = gamma * out.p.at(b, k) + beta;
    }
    return true;
  }
  double mean = 0.0;
  for (int b = 0; b < batch; ++b) mean += out.p.at(b, k);
  mean /= batch;
  double var = 0.0;
  for (int b = 0; b < batch; ++b) {
    const double q = out.p.at(b, k) - mean;
    out.q.at(b, k) = q;
    var += q * q;
  }
  var /= batch;
  const double d2 = (mode == BnMode::kSmoothed) ? var + eps * dot(w, w) : var + eps;
  out.mean[k] = mean;
  out.var[k] = var;
  if (d2 <= 0.0) return false;
  const double denom = std::sqrt(d2);
  out.denom[k] = denom;
  for (int b = 0; b < batch; ++b) out.z.at(b, k) = gamma * out.q.at(b, k) / denom + beta;
  return true;
}

// Per-neuron backward. The direct weight gradient of z = gamma*q/denom + beta
// with q_b = w^T(x_b - u) and denom^2 = Var_b(w^T x_b) + eps*|w|^2 is
//   (gamma/denom) * [ sum_b gz_b (x_b - u) - (s1/denom^2) (M + eps*w) ],
// with s1 = sum_b gz_b q_b and M = (1/B) sum_b q_b x_b (= S w, since
// sum_b q_b = 0). The input-gradient coefficient of w is
//   (gamma/denom) * (gz_b - s0/B - q_b s1 / (B denom^2)).
void neuron_backward(int k, const Mat& gz, const BnLayerForward& fwd,
                     std::span<const Vec> wrows, const Mat& x, double gamma, double eps,
                     BnMode mode, BnLayerBackward& out) {
  const int batch = x.rows;
  const int dim = x.cols;
  const Vec& w = wrows[k];
  Vec& wg = out.wgrad[k];
  wg.assign(dim, 0.0);

  double s0 = 0.0;
  double s1 = 0.0;
  for (int b = 0; b < batch; ++b) {
    s0 += gz.at(b, k);
    s1 += gz.at(b, k) * fwd.q.at(b, k);
  }
  out.dbeta[k] = s0;
  out.dgamma[k] = s1 / fwd.denom[k];

  if (mode == BnMode::kRemoved) {
    for (int b = 0; b < batch; ++b) {
      const double c = gamma * gz.at(b, k);
      out.coef.at(b, k) = c;
      axpy(c, x.row(b), wg);
    }
    return;
  }

  const double denom = fwd.denom[k];
  const double inv_d2 = 1.0 / (denom * denom);
  Vec acc(dim, 0.0);  // sum_b gz_b x_b
  Vec m(dim, 0.0);    // (1/B) sum_b q_b x_b
  for (int b = 0; b < batch; ++b) {
    axpy(gz.at(b, k), x.row(b), acc);
    axpy(fwd.q.at(b, k), x.row(b), m);
  }
  scale(m, 1.0 / batch);

  const double g_over_d = gamma / denom;
  for (int j = 0; j < dim; ++j) {
    double t = acc[j] - s0 * fwd.u[j] - s1 * inv_d2 * m[j];
    if (mode == BnMode::kSmoothed) t -= s1 * inv_d2 * eps * w[j];
    wg[j] = g_over_d * t;
  }
  for (int b = 0; b < batch; ++b) {
    out.coef.at(b, k) =
        g_over_d * (gz.at(b, k) - s0 / batch - fwd.q.at(b, k) * s1 * inv_d2 / batch);
  }
}

}  // namespace

BnLayerForward bn_layer_forward(std::span<const Vec> wrows, const Mat& x,
                                std::span<const double> gamma,
                                std::span<const double> beta, double eps, BnMode mode) {
  check_layer_args(wrows, x, gamma, beta);
  const int units = static_cast<int>(wrows.size());
  BnLayerForward out;
  out.z = Mat(x.rows, units);
  out.p = Mat(x.rows, units);
  out.q = Mat(x.rows, units);
  out.mean.assign(units, 0.0);
  out.var.assign(units, 0.0);
  out.denom.assign(units, 0.0);
  out.u = col_mean(x);

  std::vector<unsigned char> ok(units, 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < units; ++k)
    ok[k] = neuron_forward(k, wrows, x, gamma[k], beta[k], eps, mode, out) ? 1 : 0;

  for (int k = 0; k < units; ++k)
    if (!ok[k])
      throw DegenerateBatchError("bn_layer_forward: zero normalization denominator (unit " +
                                 std::to_string(k) + ")");
  return out;
}

BnLayerBackward bn_layer_backward(const Mat& gz, const BnLayerForward& fwd,
                                  std::span<const Vec> wrows, const Mat& x,
                                  std::span<const double> gamma, double eps, BnMode mode) {
  const int units = static_cast<int>(wrows.size());
  if (gz.rows != x.rows || gz.cols != units)
    throw std::invalid_argument("bn_layer_backward: shape mismatch");
  BnLayerBackward out;
  out.wgrad.resize(units);
  out.coef = Mat(x.rows, units);
  out.dgamma.assign(units, 0.0);
  out.dbeta.assign(units, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < units; ++k)
    neuron_backward(k, gz, fwd, wrows, x, gamma[k], eps, mode, out);
  return out;
}

Mat project_rows(std::span<const Vec> wrows, const Mat& x) {
  const int units = static_cast<int>(wrows.size());
  Mat out(x.rows, units);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < x.rows; ++b)
    for (int k = 0; k < units; ++k) out.at(b, k) = dot(wrows[k], x.row(b));
  return out;
}

Mat input_backward(const Mat& coef, std::span<const Vec> wrows) {
  const int units = static_cast<int>(wrows.size());
  if (coef.cols != units) throw std::invalid_argument("input_backward: shape mismatch");
  const int dim = units > 0 ? static_cast<int>(wrows[0].size()) : 0;
  Mat out(coef.rows, dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < coef.rows; ++b) {
    auto row = out.row(b);
    for (int k = 0; k < units; ++k) axpy(coef.at(b, k), wrows[k], row);
  }
  return out;
}

Mat activation_forward(const Mat& z, Activation act) {
  Mat out(z.rows, z.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < z.rows; ++b)
    for (int c = 0; c < z.cols; ++c) out.at(b, c) = activation_eval(z.at(b, c), act);
  return out;
}

Mat activation_backward(const Mat& z, const Mat& gx, Activation act) {
  if (z.rows != gx.rows || z.cols != gx.cols)
    throw std::invalid_argument("activation_backward: shape mismatch");
  Mat out(z.rows, z.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < z.rows; ++b)
    for (int c = 0; c < z.cols; ++c)
      out.at(b, c) = activation_deriv(z.at(b, c), act) * gx.at(b, c);
  return out;
}

SoftmaxCe softmax_ce(const Mat& logits, std::span<const int> labels) {
  const int batch = logits.rows;
  const int classes = logits.cols;
  if (static_cast<int>(labels.size()) != batch)
    throw std::invalid_argument("softmax_ce: label count mismatch");
  for (int b = 0; b < batch; ++b)
    if (labels[b] < 0 || labels[b] >= classes)
      throw std::invalid_argument("softmax_ce: label out of range");

  SoftmaxCe out;
  out.glogits = Mat(batch, classes);
  Vec per_sample(batch, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < batch; ++b) {
    double hi = logits.at(b, 0);
    for (int c = 1; c < classes; ++c) hi = std::max(hi, logits.at(b, c));
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(logits.at(b, c) - hi);
    const double lse = hi + std::log(sum);
    per_sample[b] = lse - logits.at(b, labels[b]);
    for (int c = 0; c < classes; ++c) {
      const double soft = std::exp(logits.at(b, c) - lse);
      out.glogits.at(b, c) = (soft - (c == labels[b] ? 1.0 : 0.0)) / batch;
    }
  }
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) loss += per_sample[b];
  out.loss = loss / batch;
  return out;
}

}  // namespace silab::kernels
