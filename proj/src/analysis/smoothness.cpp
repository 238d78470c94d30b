#include <cmath>
#include <stdexcept>

#include "silab/analysis/analysis.hpp"
#include "silab/numcore/linalg.hpp"

namespace silab {

SmoothnessEstimate SmoothnessEstimate::inflated() const {
  SmoothnessEstimate out = *this;
  for (auto& v : out.lvv.data) v *= inflation;
  for (auto& v : out.lvg) v *= inflation;
  out.lgg *= inflation;
  out.g_noise *= inflation;
  return out;
}

namespace {

ParamState random_probe_point(const ProbeProblem& problem, Rng& rng) {
  ParamState p;
  p.w.reserve(problem.v_dims.size());
  for (int d : problem.v_dims) p.w.push_back(unit_vec(rng, d));
  if (problem.g_dim > 0) {
    // Direction on the sphere, scaled to the initialization's |g| = sqrt(C)
    // so the probe covers the region training actually starts from.
    p.g = unit_vec(rng, problem.g_dim);
    scale(p.g, std::sqrt(problem.g_dim / 2.0));
  }
  return p;
}

double block_response_norm(const Gradients& up, const Gradients& down, int block, double h) {
  const Vec& a = block < 0 ? up.g : up.w[block];
  const Vec& b = block < 0 ? down.g : down.w[block];
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = (a[j] - b[j]) / (2.0 * h);
    acc += d * d;
  }
  return std::sqrt(acc);
}

// One sample: a random point and one random direction per block; the pair of
// gradient evaluations per direction yields every response block at once.
void probe_sample(const ProbeProblem& problem, Rng rng, double h, SmoothnessEstimate& est) {
  const int m = static_cast<int>(problem.v_dims.size());
  const ParamState at = random_probe_point(problem, rng);

  for (int block = -1; block < m; ++block) {
    if (block < 0 && problem.g_dim == 0) continue;
    const int dim = block < 0 ? problem.g_dim : problem.v_dims[block];
    const Vec dir = unit_vec(rng, dim);

    ParamState up = at;
    ParamState down = at;
    Vec& up_slot = block < 0 ? up.g : up.w[block];
    Vec& down_slot = block < 0 ? down.g : down.w[block];
    axpy(h, dir, up_slot);
    axpy(-h, dir, down_slot);
    const Gradients gu = problem.grad(up);
    const Gradients gd = problem.grad(down);

    for (int i = 0; i < m; ++i) {
      const double resp = block_response_norm(gu, gd, i, h);
      if (!std::isfinite(resp))
        throw std::runtime_error("probe_smoothness: non-finite probe evaluation");
      if (block < 0)
        est.lvg[i] = std::max(est.lvg[i], resp);
      else
        est.lvv.at(i, block) = std::max(est.lvv.at(i, block), resp);
    }
    if (problem.g_dim > 0) {
      const double resp = block_response_norm(gu, gd, -1, h);
      if (!std::isfinite(resp))
        throw std::runtime_error("probe_smoothness: non-finite probe evaluation");
      if (block < 0)
        est.lgg = std::max(est.lgg, resp);
      else
        est.lvg[block] = std::max(est.lvg[block], resp);
    }
  }
}

}  // namespace

SmoothnessEstimate probe_smoothness(const ProbeProblem& problem, int n_samples, Rng& rng,
                                    double h) {
  if (n_samples < 1) throw std::invalid_argument("probe_smoothness: n_samples must be >= 1");
  const int m = static_cast<int>(problem.v_dims.size());

  std::vector<SmoothnessEstimate> locals(n_samples);
  for (auto& est : locals) {
    est.lvv = Mat(m, m);
    est.lvg.assign(m, 0.0);
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int s = 0; s < n_samples; ++s)
    probe_sample(problem, rng.split(static_cast<std::uint64_t>(s)), h, locals[s]);

  SmoothnessEstimate est;
  est.lvv = Mat(m, m);
  est.lvg.assign(m, 0.0);
  est.samples = n_samples;
  for (const auto& local : locals) {
    for (std::size_t j = 0; j < est.lvv.data.size(); ++j)
      est.lvv.data[j] = std::max(est.lvv.data[j], local.lvv.data[j]);
    for (int i = 0; i < m; ++i) est.lvg[i] = std::max(est.lvg[i], local.lvg[i]);
    est.lgg = std::max(est.lgg, local.lgg);
  }
  // The Hessian is symmetric; keep the estimate so.
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double v = std::max(est.lvv.at(i, j), est.lvv.at(j, i));
      est.lvv.at(i, j) = v;
      est.lvv.at(j, i) = v;
    }
  return est;
}

SmoothnessEstimate probe_smoothness(const NetworkSpec& spec, const Dataset& data,
                                    int n_samples, Rng& rng, int noise_batch, double h) {
  spec.validate();
  ProbeProblem problem;
  for (int layer = 1; layer <= spec.depth(); ++layer)
    for (int k = 0; k < spec.widths[layer]; ++k)
      problem.v_dims.push_back(spec.widths[layer - 1]);
  problem.g_dim = 2 * spec.num_classes();
  const Batch full = full_batch(data);
  problem.grad = [&spec, &full](const ParamState& p) { return backward(spec, p, full); };

  Rng probe_rng = rng.split("hessian");
  SmoothnessEstimate est = probe_smoothness(problem, n_samples, probe_rng, h);

  Rng noise_rng = rng.split("noise");
  for (int s = 0; s < n_samples; ++s) {
    Rng point_rng = noise_rng.split(static_cast<std::uint64_t>(s));
    const ParamState at = random_probe_point(problem, point_rng);
    const Gradients expected = backward(spec, at, full);
    Batch b = sample_batch(data, noise_batch, point_rng);
    const Gradients noisy = backward(spec, at, b);
    double acc = 0.0;
    for (std::size_t j = 0; j < expected.g.size(); ++j) {
      const double d = noisy.g[j] - expected.g[j];
      acc += d * d;
    }
    est.g_noise = std::max(est.g_noise, std::sqrt(acc));
  }
  return est;
}

}  // namespace silab
