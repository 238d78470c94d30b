#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "silab/harness/harness.hpp"
#include "silab/invariance/suite.hpp"

namespace {

using nlohmann::json;
using namespace silab;

void print_report(const CheckReport& r) {
  std::printf("%-22s %-4s violation=%.6g tolerance=%.6g samples=%ld%s%s\n", r.name.c_str(),
              r.pass ? "PASS" : "FAIL", r.violation, r.tolerance, r.samples,
              r.detail.empty() ? "" : "  ", r.detail.c_str());
}

int cmd_run(const std::string& config_path) {
  const ExperimentConfig config = load_experiment_config(config_path);
  const RunArtifacts art = run_experiment(config);
  std::printf("wrote %s\n", art.trajectory_csv.string().c_str());
  std::printf("wrote %s\n", art.summary_json.string().c_str());
  if (art.result.diverged)
    std::printf("run diverged at step %lld\n", static_cast<long long>(art.result.diverged_at));
  else if (art.summary.contains("final_loss"))
    std::printf("final_loss=%.6g min_grad_sq=%.6g\n",
                art.summary.at("final_loss").get<double>(),
                art.summary.at("min_grad_sq").get<double>());
  return 0;
}

int cmd_sweep(const std::string& config_path, int jobs) {
  const SweepConfig config = load_sweep_config(config_path);
  const SweepOutcome outcome = run_sweep(config, jobs);
  std::printf("wrote %s (%zu cells, %d failed)\n", outcome.table_csv.string().c_str(),
              outcome.cells.size(), outcome.failed_cells);
  if (outcome.failed_cells == static_cast<int>(outcome.cells.size())) return 3;
  return 0;
}

int cmd_check(const std::string& spec_path, const std::string& json_out) {
  std::ifstream in(spec_path);
  if (!in) throw IoError("cannot open " + spec_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("bad JSON: ") + e.what());
  }

  SuiteConfig suite;
  for (const auto& [key, value] : j.items()) {
    if (key == "instances")
      suite.instances = value.get<int>();
    else if (key == "seed")
      suite.seed = value.get<std::uint64_t>();
    else if (key == "max_widths")
      suite.max_widths = value.get<std::vector<int>>();
    else if (key == "max_input_dim")
      suite.max_input_dim = value.get<int>();
    else if (key == "max_batch")
      suite.max_batch = value.get<int>();
    else if (key == "scales")
      suite.scales = value.get<std::vector<double>>();
    else if (key == "grad_scales")
      suite.grad_scales = value.get<std::vector<double>>();
    else if (key == "gd_steps")
      suite.gd_steps = value.get<int>();
    else if (key == "eta_w")
      suite.gd_eta_w = value.get<double>();
    else if (key == "eta_g")
      suite.gd_eta_g = value.get<double>();
    else if (key == "include_fd")
      suite.include_fd = value.get<bool>();
    else if (key == "fd_h")
      suite.fd_h = value.get<double>();
    else if (key == "epsilon")
      suite.epsilon = value.get<double>();
    else if (key == "lambda")
      suite.lambda = value.get<double>();
    else
      throw ConfigError("unknown key \"" + key + "\" in check spec");
  }

  const auto reports = run_lemma_suite(suite);
  json out = json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    print_report(r);
    all_pass = all_pass && r.pass;
    json rj;
    rj["name"] = r.name;
    rj["violation"] = r.violation;
    rj["tolerance"] = r.tolerance;
    rj["pass"] = r.pass;
    rj["samples"] = r.samples;
    out.push_back(rj);
  }
  std::printf("%s\n", all_pass ? "all checks passed" : "SOME CHECKS FAILED");
  if (!json_out.empty()) {
    std::ofstream of(json_out);
    if (!of) throw IoError("cannot write " + json_out);
    of << json{{"checks", out}, {"all_pass", all_pass}}.dump(2) << '\n';
  }
  return 0;
}

int cmd_fit_rate(const std::string& input, const std::string& column, std::int64_t t_lo,
                 std::int64_t t_hi, bool running_min) {
  CsvTable table = read_csv_table(input);
  const Vec& tcol = table.column("t");
  const Vec& values = table.column(column);
  std::vector<std::int64_t> t(tcol.size());
  for (std::size_t i = 0; i < tcol.size(); ++i) t[i] = static_cast<std::int64_t>(tcol[i]);
  if (t.empty()) throw ConfigError("no data rows in " + input);
  if (t_hi < 0) t_hi = t.back();
  if (t_lo < 0) t_lo = std::max<std::int64_t>(1, t_hi / 8);
  try {
    const RateFit fit = fit_rate(t, values, t_lo, t_hi, running_min);
    std::printf("column=%s slope=%.6g intercept=%.6g r2=%.6g window=[%lld,%lld] points=%d\n",
                column.c_str(), fit.slope, fit.intercept, fit.r2,
                static_cast<long long>(fit.t_lo), static_cast<long long>(fit.t_hi),
                fit.points);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scale-invariance training laboratory"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "run one training experiment from a JSON config");
  run->add_option("--config", run_config, "experiment config file")->required();

  std::string sweep_config;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run a grid of experiments and tabulate them");
  sweep->add_option("--config", sweep_config, "sweep config file")->required();
  sweep->add_option("--jobs", jobs, "max concurrent cells");

  std::string check_spec, check_json;
  auto* check = app.add_subcommand("check", "run the randomized invariance suite");
  check->add_option("--spec", check_spec, "suite spec file")->required();
  check->add_option("--json", check_json, "also write a machine-readable report");

  std::string fit_input, fit_column;
  std::int64_t t_lo = -1, t_hi = -1;
  bool running_min = false;
  auto* fit = app.add_subcommand("fit-rate", "log-log slope of a trajectory column");
  fit->add_option("--input", fit_input, "trajectory CSV")->required();
  fit->add_option("--column", fit_column, "column name")->required();
  fit->add_option("--t-lo", t_lo, "window start (default t_hi/8)");
  fit->add_option("--t-hi", t_hi, "window end (default last t)");
  fit->add_flag("--running-min", running_min, "fit the prefix minimum of the column");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (sweep->parsed()) return cmd_sweep(sweep_config, jobs);
    if (check->parsed()) return cmd_check(check_spec, check_json);
    if (fit->parsed()) return cmd_fit_rate(fit_input, fit_column, t_lo, t_hi, running_min);
  } catch (const silab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const silab::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
