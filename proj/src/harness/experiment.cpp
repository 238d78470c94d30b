#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "silab/harness/harness.hpp"
#include "silab/numcore/linalg.hpp"

namespace silab {

using nlohmann::json;

namespace {

json report_to_json(const CheckReport& r) {
  json j;
  j["name"] = r.name;
  j["violation"] = r.violation;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["samples"] = r.samples;
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

double epoch_average(const std::vector<TrajectoryRecord>& records, std::size_t begin,
                     std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += records[i].loss;
  return acc / static_cast<double>(end - begin);
}

CheckReport g_norm_check(const std::vector<TrajectoryRecord>& records, double g0_norm,
                         double lambda, int classes) {
  const double bound = std::max(g0_norm, std::sqrt(2.0 * classes) / lambda);
  double worst = 0.0;
  for (const auto& r : records) worst = std::max(worst, r.g_norm - bound);
  CheckReport rep = CheckReport::make("g_norm_bound", std::max(worst, 0.0), 1e-9,
                                      static_cast<long>(records.size()));
  rep.detail = "bound=" + std::to_string(bound);
  return rep;
}

CheckReport w_norm_shape_check(const std::vector<TrajectoryRecord>& records,
                               OptimizerKind kind) {
  double worst = 0.0;
  const bool constant = kind == OptimizerKind::kPsgd;
  for (std::size_t t = 0; t + 1 < records.size(); ++t) {
    for (std::size_t i = 0; i < records[t].w_norm.size(); ++i) {
      if (constant) {
        const double ref = records.front().w_norm[i];
        worst = std::max(worst, std::fabs(records[t + 1].w_norm[i] - ref) / ref);
      } else {
        const double drop = records[t].w_norm[i] - records[t + 1].w_norm[i];
        worst = std::max(worst, drop / records[t].w_norm[i]);
      }
    }
  }
  return CheckReport::make(constant ? "w_norm_constant" : "w_norm_nondecreasing",
                           std::max(worst, 0.0), 1e-12,
                           static_cast<long>(records.size()));
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config, bool write_files) {
  config.validate();
  const Dataset data = make_dataset(config.dataset);
  if (data.dim() != config.network.input_dim())
    throw ConfigError("dataset dimension does not match network.widths[0]");
  if (data.classes != config.network.num_classes())
    throw ConfigError("dataset class count does not match the network");

  RunArtifacts art;
  art.result = run_training(config.network, config.trainer, data);
  const auto& records = art.result.records;

  json& s = art.summary;
  s["steps"] = config.trainer.steps;
  s["records"] = records.size();
  s["diverged"] = art.result.diverged;
  s["diverged_at"] = art.result.diverged_at;

  const bool stochastic = config.trainer.kind == OptimizerKind::kSgd ||
                          config.trainer.kind == OptimizerKind::kPsgd;
  const int epoch_steps =
      stochastic ? (data.size() + config.trainer.batch_size - 1) / config.trainer.batch_size
                 : 1;
  s["epoch_steps"] = epoch_steps;

  if (!records.empty()) {
    s["last_loss"] = records.back().loss;
    double min_grad = records.front().grad_v_sq_total + records.front().grad_g_sq;
    double max_g = 0.0;
    for (const auto& r : records) {
      min_grad = std::min(min_grad, r.grad_v_sq_total + r.grad_g_sq);
      max_g = std::max(max_g, r.g_norm);
    }
    s["min_grad_sq"] = min_grad;
    s["max_g_norm"] = max_g;

    // Epoch averages over recorded losses; an epoch is ceil(n/B) steps.
    std::vector<double> epochs;
    const std::size_t per =
        std::max<std::size_t>(1, static_cast<std::size_t>(epoch_steps) /
                                     static_cast<std::size_t>(config.trainer.record_every));
    for (std::size_t b = 0; b < records.size(); b += per)
      epochs.push_back(epoch_average(records, b, std::min(records.size(), b + per)));
    s["epoch_avg_loss"] = epochs;
    const std::size_t tail = std::min<std::size_t>(5, epochs.size());
    double final_loss = 0.0;
    for (std::size_t i = epochs.size() - tail; i < epochs.size(); ++i) final_loss += epochs[i];
    final_loss /= static_cast<double>(tail);
    s["final_loss"] = final_loss;

    json checks = json::array();
    checks.push_back(report_to_json(g_norm_check(records, records.front().g_norm,
                                                 config.network.lambda,
                                                 config.network.num_classes())));
    checks.push_back(report_to_json(w_norm_shape_check(records, config.trainer.kind)));
    if (config.network.bn_mode == BnMode::kSmoothed && !art.result.diverged) {
      const Batch full = full_batch(data);
      const auto loss = [&](const ParamState& p) {
        return forward_loss(config.network, p, full);
      };
      const double scales[] = {1e-3, 1e3};
      checks.push_back(
          report_to_json(check_scale_invariance(loss, art.result.final_params, scales)));
    }
    s["checks"] = checks;

    // Tail-window rate fits; skipped when the series cannot support one.
    if (!art.result.diverged && records.size() >= 16) {
      std::vector<std::int64_t> t;
      Vec total_grad, mean_eff;
      for (const auto& r : records) {
        t.push_back(r.t);
        total_grad.push_back(r.grad_v_sq_total + r.grad_g_sq);
        double acc = 0.0;
        for (double e : r.eff_lr) acc += e;
        mean_eff.push_back(acc / static_cast<double>(r.eff_lr.size()));
      }
      const std::int64_t hi = records.back().t;
      const std::int64_t lo = std::max<std::int64_t>(1, hi / 8);
      try {
        const RateFit fit = fit_rate(t, total_grad, lo, hi, /*running_min=*/true);
        s["rate_fits"]["running_min_grad_sq"] = {{"slope", fit.slope},
                                                 {"intercept", fit.intercept},
                                                 {"r2", fit.r2},
                                                 {"t_lo", fit.t_lo},
                                                 {"t_hi", fit.t_hi},
                                                 {"points", fit.points}};
      } catch (const std::invalid_argument&) {
      }
      try {
        const RateFit fit = fit_rate(t, mean_eff, lo, hi, /*running_min=*/false);
        s["rate_fits"]["mean_eff_lr"] = {{"slope", fit.slope},
                                         {"intercept", fit.intercept},
                                         {"r2", fit.r2},
                                         {"t_lo", fit.t_lo},
                                         {"t_hi", fit.t_hi},
                                         {"points", fit.points}};
      } catch (const std::invalid_argument&) {
      }
    }
  }

  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.output_dir);
    art.trajectory_csv = std::filesystem::path(config.output_dir) / "trajectory.csv";
    art.summary_json = std::filesystem::path(config.output_dir) / "summary.json";
    art.config_json = std::filesystem::path(config.output_dir) / "config.json";
    write_trajectory_csv(art.trajectory_csv, records);
    std::ofstream sf(art.summary_json);
    if (!sf) throw IoError("cannot write " + art.summary_json.string());
    sf << art.summary.dump(2) << '\n';
    std::ofstream cf(art.config_json);
    if (!cf) throw IoError("cannot write " + art.config_json.string());
    cf << experiment_config_to_json(config).dump(2) << '\n';
  }
  return art;
}

namespace {

ExperimentConfig cell_config(const SweepConfig& sweep, double value, SweepSetting setting,
                             std::size_t cell_index) {
  ExperimentConfig c = sweep.base;
  switch (sweep.axis) {
    case SweepAxis::kEtaW: c.trainer.eta_w.eta0 = value; break;
    case SweepAxis::kEtaG: c.trainer.eta_g.eta0 = value; break;
    case SweepAxis::kEtaUnified:
      c.trainer.eta_w.eta0 = value;
      c.trainer.eta_g.eta0 = value;
      break;
    case SweepAxis::kAlpha:
      c.trainer.eta_w.kind = LrSchedule::Kind::kPower;
      c.trainer.eta_w.alpha = value;
      break;
  }
  switch (setting) {
    case SweepSetting::kSgdBn:
      c.trainer.kind = OptimizerKind::kSgd;
      c.network.bn_mode = BnMode::kSmoothed;
      break;
    case SweepSetting::kPsgd:
      c.trainer.kind = OptimizerKind::kPsgd;
      c.network.bn_mode = BnMode::kSmoothed;
      break;
    case SweepSetting::kBnRemoved:
      c.trainer.kind = OptimizerKind::kSgd;
      c.network.bn_mode = BnMode::kRemoved;
      break;
  }
  c.output_dir = (std::filesystem::path(sweep.base.output_dir) /
                  ("cell_" + std::to_string(cell_index) + "_" + to_string(setting)))
                     .string();
  return c;
}

}  // namespace

SweepOutcome run_sweep(const SweepConfig& config, int jobs, bool write_files) {
  config.validate();
  if (jobs < 1) throw ConfigError("jobs must be >= 1");

  struct CellPlan {
    double value;
    SweepSetting setting;
  };
  std::vector<CellPlan> plan;
  for (double v : config.grid)
    for (SweepSetting s : config.settings) plan.push_back({v, s});

  SweepOutcome outcome;
  outcome.cells.resize(plan.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.size()) return;
      SweepCell& cell = outcome.cells[i];
      cell.axis_value = plan[i].value;
      cell.setting = plan[i].setting;
      try {
        const ExperimentConfig cc = cell_config(config, plan[i].value, plan[i].setting, i);
        const RunArtifacts art = run_experiment(cc, write_files);
        cell.diverged = art.result.diverged;
        cell.final_loss = art.summary.contains("final_loss")
                              ? art.summary.at("final_loss").get<double>()
                              : std::numeric_limits<double>::infinity();
        cell.min_grad_sq = art.summary.contains("min_grad_sq")
                               ? art.summary.at("min_grad_sq").get<double>()
                               : std::numeric_limits<double>::infinity();
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };

  const int n_threads = std::min<int>(jobs, static_cast<int>(plan.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (const auto& cell : outcome.cells)
    if (cell.failed) ++outcome.failed_cells;

  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(config.base.output_dir, ec);
    outcome.table_csv = std::filesystem::path(config.base.output_dir) / "comparison.csv";
    std::ofstream out(outcome.table_csv);
    if (!out) throw IoError("cannot write " + outcome.table_csv.string());
    out << "axis,axis_value,setting,final_loss,min_grad_sq,diverged,failed\n";
    for (const auto& cell : outcome.cells) {
      out << to_string(config.axis) << ',' << fmt17(cell.axis_value) << ','
          << to_string(cell.setting) << ',' << fmt17(cell.final_loss) << ','
          << fmt17(cell.min_grad_sq) << ',' << (cell.diverged ? 1 : 0) << ','
          << (cell.failed ? 1 : 0) << '\n';
    }
  }
  return outcome;
}

}  // namespace silab
