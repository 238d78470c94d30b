#pragma once

#include <string>
#include <vector>

#include "silab/numcore/rng.hpp"
#include "silab/numcore/types.hpp"

namespace silab {

/// Twice continuously differentiable activations only; ReLU-family is out.
enum class Activation { kSigmoid, kTanh, kSoftplus };

enum class BnMode {
  kSmoothed,     // denominator sqrt(Var + eps*|w|^2); scale-invariant
  kAdditiveEps,  // classic sqrt(Var + eps); breaks scale-invariance (contrast mode)
  kRemoved,      // identity on w^T x; no normalization at all
};

/// Architecture of the batch-normalized feedforward classifier. widths holds
/// m0..mL with m0 the input dimension and mL the class count; every layer is
/// linear -> BN -> activation except the last, which emits the BN output as
/// logits. Internal BN scale/shift are frozen at construction; only the last
/// layer's are learnable.
struct NetworkSpec {
  std::vector<int> widths;
  Activation activation = Activation::kSoftplus;
  double epsilon = 1e-3;
  double lambda = 0.01;
  double internal_gamma = 1.0;
  double internal_beta = 0.0;
  BnMode bn_mode = BnMode::kSmoothed;

  int depth() const { return static_cast<int>(widths.size()) - 1; }
  int input_dim() const { return widths.front(); }
  int num_classes() const { return widths.back(); }

  /// Number of scale-invariant weight vectors (one per row of every layer).
  int num_groups() const;
  /// Flat index of the first weight row of layer i (1-based layer).
  int group_offset(int layer) const;

  void validate() const;
};

/// The (W; g) partition: one weight vector per neuron row across all layers,
/// plus the last layer's learnable (gamma_0..C-1, beta_0..C-1).
struct ParamState {
  std::vector<Vec> w;
  Vec g;
};

struct Gradients {
  std::vector<Vec> w;
  Vec g;
};

/// A mini-batch; variance needs at least two samples.
struct Batch {
  Mat x;
  std::vector<int> y;
  int size() const { return x.rows; }
};

struct Dataset {
  Mat x;
  std::vector<int> y;
  int classes = 0;
  int size() const { return x.rows; }
  int dim() const { return x.cols; }
};

ParamState init_params(const NetworkSpec& spec, Rng& rng);

/// v^(i) = w^(i)/|w^(i)|, g unchanged. Throws on a zero-norm weight.
ParamState normalize_params(const ParamState& params);

/// Copy with group i scaled by c (i = -1 scales every group).
ParamState scale_group(const ParamState& params, int group, double c);

Batch full_batch(const Dataset& data);
Batch sample_batch(const Dataset& data, int batch_size, Rng& rng);

const char* to_string(Activation a);
const char* to_string(BnMode m);

}  // namespace silab
