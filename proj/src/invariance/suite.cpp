#include "silab/invariance/suite.hpp"

#include <cmath>
#include <map>

#include "silab/numcore/linalg.hpp"

namespace silab {

SuiteInstance make_suite_instance(const SuiteConfig& config, Rng rng) {
  SuiteInstance inst;
  inst.spec.widths.push_back(
      2 + static_cast<int>(rng.uniform_index(std::max(1, config.max_input_dim - 1))));
  for (int cap : config.max_widths)
    inst.spec.widths.push_back(2 + static_cast<int>(rng.uniform_index(std::max(1, cap - 1))));
  const Activation acts[] = {Activation::kSigmoid, Activation::kTanh, Activation::kSoftplus};
  inst.spec.activation = acts[rng.uniform_index(3)];
  inst.spec.epsilon = config.epsilon;
  inst.spec.lambda = config.lambda;
  inst.spec.bn_mode = config.bn_mode;

  Rng prng = rng.split("params");
  inst.params = init_params(inst.spec, prng);
  for (auto& v : inst.params.g) v += 0.3 * prng.normal();

  const int batch = 2 + static_cast<int>(rng.uniform_index(std::max(1, config.max_batch - 1)));
  Rng brng = rng.split("batch");
  inst.batch.x = Mat(batch, inst.spec.input_dim());
  for (auto& v : inst.batch.x.data) v = brng.normal();
  inst.batch.y.resize(batch);
  for (auto& y : inst.batch.y) y = static_cast<int>(brng.uniform_index(inst.spec.num_classes()));
  return inst;
}

namespace {

// violation/tolerance ratio so instances with different tolerances aggregate.
double ratio(const CheckReport& r) { return r.violation / r.tolerance; }

CheckReport fd_agreement(const SuiteInstance& inst, double h) {
  const auto loss = [&](const ParamState& p) { return forward_loss(inst.spec, p, inst.batch); };
  const Gradients analytic = backward(inst.spec, inst.params, inst.batch);
  const Gradients fd = finite_diff_grad(loss, inst.params, h);
  double worst = 0.0;
  long coords = 0;
  auto compare = [&](const Vec& a, const Vec& f) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double tol = std::max(1e-6, 1e-4 * std::fabs(f[j]));
      worst = std::max(worst, std::fabs(a[j] - f[j]) / tol);
      ++coords;
    }
  };
  for (std::size_t i = 0; i < analytic.w.size(); ++i) compare(analytic.w[i], fd.w[i]);
  compare(analytic.g, fd.g);
  return CheckReport::make("backward_vs_fd", worst, 1.0, coords);
}

CheckReport norm_recursion_on_gd(const SuiteInstance& inst, int steps, double eta_w,
                                 double eta_g) {
  WStepTrace trace;
  ParamState params = inst.params;
  for (int t = 0; t < steps; ++t) {
    const Gradients grads = backward(inst.spec, params, inst.batch);
    trace.w.push_back(params.w);
    trace.grad.push_back(grads.w);
    trace.eta.push_back(eta_w);
    for (std::size_t i = 0; i < params.w.size(); ++i) axpy(-eta_w, grads.w[i], params.w[i]);
    axpy(-eta_g, grads.g, params.g);
  }
  trace.w.push_back(params.w);
  return check_norm_recursion(trace);
}

struct Agg {
  double worst = 0.0;
  long samples = 0;
};

}  // namespace

std::vector<CheckReport> run_lemma_suite(const SuiteConfig& config) {
  Rng root(config.seed);
  std::vector<std::map<std::string, Agg>> per_instance(config.instances);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < config.instances; ++i) {
    const SuiteInstance inst = make_suite_instance(config, root.split(static_cast<std::uint64_t>(i)));
    const auto loss = [&](const ParamState& p) { return forward_loss(inst.spec, p, inst.batch); };
    const auto grad = [&](const ParamState& p) { return backward(inst.spec, p, inst.batch); };
    auto& agg = per_instance[i];

    auto fold = [&agg](const CheckReport& r) {
      Agg& a = agg[r.name];
      a.worst = std::max(a.worst, ratio(r));
      a.samples += r.samples;
    };

    fold(check_scale_invariance(loss, inst.params, config.scales));
    for (double c : config.grad_scales) fold(check_grad_scaling(grad, inst.params, c));
    fold(check_perpendicularity(grad, inst.params));
    if (config.gd_steps > 0)
      fold(norm_recursion_on_gd(inst, config.gd_steps, config.gd_eta_w, config.gd_eta_g));
    if (config.include_fd) fold(fd_agreement(inst, config.fd_h));
  }

  std::map<std::string, Agg> merged;
  for (const auto& agg : per_instance)
    for (const auto& [name, a] : agg) {
      Agg& m = merged[name];
      m.worst = std::max(m.worst, a.worst);
      m.samples += a.samples;
    }

  std::vector<CheckReport> out;
  for (const auto& [name, a] : merged) {
    CheckReport r = CheckReport::make(name, a.worst, 1.0, a.samples);
    r.detail = "max violation/tolerance ratio over " + std::to_string(config.instances) +
               " instances";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace silab
