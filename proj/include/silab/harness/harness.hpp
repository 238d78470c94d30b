#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "silab/analysis/analysis.hpp"
#include "silab/optim/trainer.hpp"

namespace silab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  enum class Kind { kGaussianBlobs, kCsvFile };
  Kind kind = Kind::kGaussianBlobs;
  // blobs
  int dim = 10;
  int classes = 2;
  int n_points = 256;
  double separation = 3.0;
  double scale = 1.0;
  std::uint64_t seed = 0;
  // csv
  std::string path;
  int label_col = -1;
};

/// Round-robin class labels; x ~ mean_c + scale * N(0, I) with mean_c a
/// deterministic unit direction times the separation. Reproducible per seed.
Dataset synth_blobs(const DatasetSpec& spec);

/// Rectangular numeric CSV without header; labels integral in [0, C) with C
/// inferred. Errors name the offending 1-based row/column.
Dataset load_csv(const std::string& path, int label_col);

void save_csv(const Dataset& data, const std::string& path);

Dataset make_dataset(const DatasetSpec& spec);

struct ExperimentConfig {
  NetworkSpec network;
  TrainerConfig trainer;
  DatasetSpec dataset;
  std::string output_dir = "out";
  // record_every lives in trainer

  void validate() const;
};

enum class SweepSetting { kSgdBn, kPsgd, kBnRemoved };
enum class SweepAxis { kEtaW, kEtaG, kEtaUnified, kAlpha };

struct SweepConfig {
  ExperimentConfig base;
  SweepAxis axis = SweepAxis::kEtaUnified;
  std::vector<double> grid;
  std::vector<SweepSetting> settings = {SweepSetting::kSgdBn, SweepSetting::kPsgd,
                                        SweepSetting::kBnRemoved};

  void validate() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
SweepConfig load_sweep_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

struct RunArtifacts {
  RunResult result;
  nlohmann::json summary;
  std::filesystem::path trajectory_csv;
  std::filesystem::path summary_json;
  std::filesystem::path config_json;
};

/// Runs one experiment; when write_files is set, produces trajectory.csv,
/// summary.json and the resolved config.json under config.output_dir.
RunArtifacts run_experiment(const ExperimentConfig& config, bool write_files = true);

struct SweepCell {
  double axis_value = 0.0;
  SweepSetting setting = SweepSetting::kSgdBn;
  bool failed = false;
  bool diverged = false;
  double final_loss = 0.0;  // mean loss over the last five epochs
  double min_grad_sq = 0.0;
  std::string error;
};

struct SweepOutcome {
  std::vector<SweepCell> cells;
  std::filesystem::path table_csv;
  int failed_cells = 0;
};

SweepOutcome run_sweep(const SweepConfig& config, int jobs = 1, bool write_files = true);

/// Fixed 17-significant-digit float formatting used by every CSV artifact.
std::string fmt17(double v);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRecord>& records);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<Vec> columns;
  Vec& column(const std::string& name);
};
CsvTable read_csv_table(const std::string& path);

const char* to_string(SweepSetting s);
const char* to_string(SweepAxis a);

}  // namespace silab
