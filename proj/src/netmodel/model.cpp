#include "silab/netmodel/model.hpp"

#include <stdexcept>

#include "silab/numcore/linalg.hpp"

namespace silab {

BnNeuronOut smoothed_bn_forward(const Vec& w, const Mat& x, double gamma, double beta,
                                double eps, BnMode mode) {
  const Vec rows[] = {w};
  const double gammas[] = {gamma};
  const double betas[] = {beta};
  auto fwd = kernels::bn_layer_forward(rows, x, gammas, betas, eps, mode);
  BnNeuronOut out;
  out.z.resize(x.rows);
  for (int b = 0; b < x.rows; ++b) out.z[b] = fwd.z.at(b, 0);
  out.mean = fwd.mean[0];
  out.var = fwd.var[0];
  out.denom = fwd.denom[0];
  return out;
}

std::span<const Vec> layer_rows(const ParamState& params, const NetworkSpec& spec,
                                int layer) {
  return {params.w.data() + spec.group_offset(layer),
          static_cast<std::size_t>(spec.widths[layer])};
}

namespace {

void check_shapes(const NetworkSpec& spec, const ParamState& params, const Batch& batch) {
  spec.validate();
  if (batch.x.rows < 2) throw std::invalid_argument("batch size must be >= 2");
  if (batch.x.cols != spec.input_dim())
    throw std::invalid_argument("batch input dimension mismatch");
  if (batch.y.size() != static_cast<std::size_t>(batch.x.rows))
    throw std::invalid_argument("batch label count mismatch");
  if (static_cast<int>(params.w.size()) != spec.num_groups())
    throw std::invalid_argument("parameter group count mismatch");
  if (static_cast<int>(params.g.size()) != 2 * spec.num_classes())
    throw std::invalid_argument("g length mismatch");
}

// gamma/beta vectors for layer i: frozen constants internally, g at the top.
void layer_scale_shift(const NetworkSpec& spec, const ParamState& params, int layer,
                       Vec& gamma, Vec& beta) {
  const int units = spec.widths[layer];
  if (layer == spec.depth()) {
    gamma.assign(params.g.begin(), params.g.begin() + units);
    beta.assign(params.g.begin() + units, params.g.begin() + 2 * units);
  } else {
    gamma.assign(units, spec.internal_gamma);
    beta.assign(units, spec.internal_beta);
  }
}

}  // namespace

ForwardCache forward(const NetworkSpec& spec, const ParamState& params, const Batch& batch) {
  check_shapes(spec, params, batch);
  ForwardCache cache;
  cache.x.resize(spec.depth() + 1);
  cache.x[0] = batch.x;
  cache.layers.resize(spec.depth());

  Vec gamma, beta;
  for (int layer = 1; layer <= spec.depth(); ++layer) {
    layer_scale_shift(spec, params, layer, gamma, beta);
    auto rows = layer_rows(params, spec, layer);
    cache.layers[layer - 1] =
        kernels::bn_layer_forward(rows, cache.x[layer - 1], gamma, beta, spec.epsilon,
                                  spec.bn_mode);
    if (layer < spec.depth())
      cache.x[layer] = kernels::activation_forward(cache.layers[layer - 1].z, spec.activation);
    else
      cache.x[layer] = cache.layers[layer - 1].z;
  }

  auto ce = kernels::softmax_ce(cache.x[spec.depth()], batch.y);
  cache.data_loss = ce.loss;
  cache.loss = ce.loss + 0.5 * spec.lambda * dot(params.g, params.g);
  return cache;
}

double forward_loss(const NetworkSpec& spec, const ParamState& params, const Batch& batch) {
  return forward(spec, params, batch).loss;
}

Gradients zero_gradients(const NetworkSpec& spec) {
  Gradients g;
  g.w.resize(spec.num_groups());
  for (int layer = 1; layer <= spec.depth(); ++layer)
    for (int k = 0; k < spec.widths[layer]; ++k)
      g.w[spec.group_offset(layer) + k].assign(spec.widths[layer - 1], 0.0);
  g.g.assign(2 * spec.num_classes(), 0.0);
  return g;
}

Gradients backward(const NetworkSpec& spec, const ParamState& params, const Batch& batch) {
  return loss_and_backward(spec, params, batch).grads;
}

LossGrads loss_and_backward(const NetworkSpec& spec, const ParamState& params,
                            const Batch& batch) {
  ForwardCache cache = forward(spec, params, batch);
  Gradients grads = zero_gradients(spec);

  auto ce = kernels::softmax_ce(cache.x[spec.depth()], batch.y);
  Mat gx = std::move(ce.glogits);  // dF/d(layer output), walked backwards

  Vec gamma, beta;
  for (int layer = spec.depth(); layer >= 1; --layer) {
    const auto& fwd = cache.layers[layer - 1];
    layer_scale_shift(spec, params, layer, gamma, beta);
    auto rows = layer_rows(params, spec, layer);

    // Internal layers see dF/d(activation); convert to dF/d(BN output).
    Mat gz = (layer == spec.depth())
                 ? std::move(gx)
                 : kernels::activation_backward(fwd.z, gx, spec.activation);

    auto back = kernels::bn_layer_backward(gz, fwd, rows, cache.x[layer - 1], gamma,
                                           spec.epsilon, spec.bn_mode);
    const int off = spec.group_offset(layer);
    for (int k = 0; k < spec.widths[layer]; ++k) grads.w[off + k] = std::move(back.wgrad[k]);
    if (layer == spec.depth()) {
      const int c = spec.num_classes();
      for (int k = 0; k < c; ++k) {
        grads.g[k] = back.dgamma[k];
        grads.g[c + k] = back.dbeta[k];
      }
    }
    if (layer > 1) gx = kernels::input_backward(back.coef, rows);
  }

  axpy(spec.lambda, params.g, grads.g);  // weight decay acts on g only
  return {cache.loss, std::move(grads)};
}

}  // namespace silab
