#include "silab/netmodel/types.hpp"

#include <stdexcept>

#include "silab/numcore/linalg.hpp"

namespace silab {

int NetworkSpec::num_groups() const {
  int m = 0;
  for (std::size_t i = 1; i < widths.size(); ++i) m += widths[i];
  return m;
}

int NetworkSpec::group_offset(int layer) const {
  int off = 0;
  for (int i = 1; i < layer; ++i) off += widths[i];
  return off;
}

void NetworkSpec::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("NetworkSpec: need at least one layer");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("NetworkSpec: all widths must be >= 1");
  if (num_classes() < 2) throw std::invalid_argument("NetworkSpec: need at least two classes");
  if (lambda <= 0.0) throw std::invalid_argument("NetworkSpec: lambda must be positive");
  if (epsilon < 0.0) throw std::invalid_argument("NetworkSpec: epsilon must be nonnegative");
}

ParamState init_params(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  ParamState p;
  p.w.reserve(spec.num_groups());
  for (int layer = 1; layer <= spec.depth(); ++layer) {
    Rng lr = rng.split("init/layer" + std::to_string(layer));
    Mat m = glorot_init(lr, spec.widths[layer], spec.widths[layer - 1]);
    for (int k = 0; k < m.rows; ++k) {
      auto row = m.row(k);
      p.w.emplace_back(row.begin(), row.end());
    }
  }
  const int c = spec.num_classes();
  p.g.assign(2 * c, 0.0);
  for (int k = 0; k < c; ++k) p.g[k] = 1.0;  // gammas 1, betas 0
  return p;
}

ParamState normalize_params(const ParamState& params) {
  ParamState out = params;
  for (auto& w : out.w) {
    const double n = norm2(w);
    if (n == 0.0) throw std::domain_error("normalize_params: zero-norm weight");
    for (auto& v : w) v /= n;
  }
  return out;
}

ParamState scale_group(const ParamState& params, int group, double c) {
  ParamState out = params;
  if (group < 0) {
    for (auto& w : out.w) scale(w, c);
  } else {
    scale(out.w.at(group), c);
  }
  return out;
}

Batch full_batch(const Dataset& data) { return Batch{data.x, data.y}; }

Batch sample_batch(const Dataset& data, int batch_size, Rng& rng) {
  if (batch_size < 2) throw std::invalid_argument("sample_batch: batch size must be >= 2");
  Batch b;
  b.x = Mat(batch_size, data.dim());
  b.y.resize(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const auto idx = static_cast<int>(rng.uniform_index(data.size()));
    auto src = data.x.row(idx);
    auto dst = b.x.row(i);
    for (int c = 0; c < data.dim(); ++c) dst[c] = src[c];
    b.y[i] = data.y[idx];
  }
  return b;
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kSoftplus: return "softplus";
  }
  return "?";
}

const char* to_string(BnMode m) {
  switch (m) {
    case BnMode::kSmoothed: return "smoothed";
    case BnMode::kAdditiveEps: return "additive-eps";
    case BnMode::kRemoved: return "removed";
  }
  return "?";
}

}  // namespace silab
