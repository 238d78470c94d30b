#pragma once

#include <cstdint>

#include "silab/invariance/checks.hpp"

namespace silab {

/// Randomized lemma suite: draws (spec, params, batch) instances and runs the
/// scale-invariance, gradient-scaling, perpendicularity and norm-recursion
/// checkers on each, optionally the finite-difference gradient comparison.
/// Reports are aggregated across instances as the max violation/tolerance
/// ratio, so pass means every instance passed its own tolerance.
struct SuiteConfig {
  int instances = 100;
  std::uint64_t seed = 0;
  std::vector<int> max_widths = {6, 5, 4};  // caps for m1..mL (last = classes)
  int max_input_dim = 6;
  int max_batch = 8;
  std::vector<double> scales = {1e-3, 1e3};
  std::vector<double> grad_scales = {1e-3, 7.0, 1e3};
  int gd_steps = 200;
  double gd_eta_w = 0.5;
  double gd_eta_g = 0.5;
  bool include_fd = false;
  double fd_h = 1e-5;
  BnMode bn_mode = BnMode::kSmoothed;
  double epsilon = 1e-3;
  double lambda = 0.01;
};

std::vector<CheckReport> run_lemma_suite(const SuiteConfig& config);

/// Random instance used by the suite; exposed for tests.
struct SuiteInstance {
  NetworkSpec spec;
  ParamState params;
  Batch batch;
};
SuiteInstance make_suite_instance(const SuiteConfig& config, Rng rng);

}  // namespace silab
