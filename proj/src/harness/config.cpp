#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "silab/harness/harness.hpp"

namespace silab {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::set<std::string>& allowed, const char* ctx) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError(std::string("unknown key \"") + key + "\" in " + ctx);
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

std::int64_t get_int(const json& j, const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError(std::string(key) + " must be an integer");
  return j.at(key).get<std::int64_t>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

Activation parse_activation(const std::string& s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "tanh") return Activation::kTanh;
  if (s == "softplus") return Activation::kSoftplus;
  throw ConfigError("unknown activation \"" + s + "\"");
}

BnMode parse_bn_mode(const std::string& s) {
  if (s == "smoothed") return BnMode::kSmoothed;
  if (s == "additive-eps") return BnMode::kAdditiveEps;
  if (s == "removed") return BnMode::kRemoved;
  throw ConfigError("unknown bn_mode \"" + s + "\"");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "gd") return OptimizerKind::kGd;
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "psgd") return OptimizerKind::kPsgd;
  if (s == "intrinsic") return OptimizerKind::kIntrinsic;
  throw ConfigError("unknown optimizer \"" + s + "\"");
}

LrSchedule parse_schedule(const json& j, const char* ctx) {
  expect_keys(j, {"kind", "eta0", "alpha"}, ctx);
  LrSchedule s;
  const std::string kind = get_str(j, "kind", "constant");
  if (kind == "constant")
    s.kind = LrSchedule::Kind::kConstant;
  else if (kind == "power")
    s.kind = LrSchedule::Kind::kPower;
  else
    throw ConfigError(std::string("unknown schedule kind in ") + ctx);
  s.eta0 = get_num(j, "eta0", s.eta0);
  s.alpha = get_num(j, "alpha", s.alpha);
  return s;
}

NetworkSpec parse_network(const json& j) {
  expect_keys(j,
              {"widths", "activation", "epsilon", "lambda", "internal_gamma",
               "internal_beta", "bn_mode"},
              "network");
  NetworkSpec spec;
  if (!j.contains("widths") || !j.at("widths").is_array())
    throw ConfigError("network.widths must be an array");
  spec.widths = j.at("widths").get<std::vector<int>>();
  spec.activation = parse_activation(get_str(j, "activation", "softplus"));
  spec.epsilon = get_num(j, "epsilon", spec.epsilon);
  spec.lambda = get_num(j, "lambda", spec.lambda);
  spec.internal_gamma = get_num(j, "internal_gamma", spec.internal_gamma);
  spec.internal_beta = get_num(j, "internal_beta", spec.internal_beta);
  spec.bn_mode = parse_bn_mode(get_str(j, "bn_mode", "smoothed"));
  return spec;
}

DatasetSpec parse_dataset(const json& j) {
  DatasetSpec d;
  const std::string kind = get_str(j, "kind", "gaussian-blobs");
  if (kind == "gaussian-blobs") {
    expect_keys(j, {"kind", "dim", "classes", "n_points", "separation", "scale", "seed"},
                "dataset");
    d.kind = DatasetSpec::Kind::kGaussianBlobs;
    d.dim = static_cast<int>(get_int(j, "dim", d.dim));
    d.classes = static_cast<int>(get_int(j, "classes", d.classes));
    d.n_points = static_cast<int>(get_int(j, "n_points", d.n_points));
    d.separation = get_num(j, "separation", d.separation);
    d.scale = get_num(j, "scale", d.scale);
    d.seed = static_cast<std::uint64_t>(get_int(j, "seed", 0));
  } else if (kind == "csv-file") {
    expect_keys(j, {"kind", "path", "label_col"}, "dataset");
    d.kind = DatasetSpec::Kind::kCsvFile;
    d.path = get_str(j, "path", "");
    if (d.path.empty()) throw ConfigError("dataset.path is required for csv-file");
    d.label_col = static_cast<int>(get_int(j, "label_col", -1));
    if (d.label_col < 0) throw ConfigError("dataset.label_col is required for csv-file");
  } else {
    throw ConfigError("unknown dataset kind \"" + kind + "\"");
  }
  return d;
}

TrainerConfig parse_trainer(const json& j, const NetworkSpec& network) {
  expect_keys(j,
              {"optimizer", "steps", "seed", "batch_size", "c_g", "record_every", "eta_w",
               "eta_g"},
              "trainer");
  TrainerConfig t;
  t.kind = parse_optimizer(get_str(j, "optimizer", "gd"));
  t.steps = get_int(j, "steps", t.steps);
  t.seed = static_cast<std::uint64_t>(get_int(j, "seed", 0));
  t.batch_size = static_cast<int>(get_int(j, "batch_size", t.batch_size));
  t.c_g = get_num(j, "c_g", t.c_g);
  t.record_every = static_cast<int>(get_int(j, "record_every", t.record_every));
  if (j.contains("eta_w")) t.eta_w = parse_schedule(j.at("eta_w"), "trainer.eta_w");
  if (j.contains("eta_g")) {
    t.eta_g = parse_schedule(j.at("eta_g"), "trainer.eta_g");
  } else {
    // The tuned default: eta_g = 4(1-c_g)/(C+2*lambda), decaying as
    // (t+1)^(-1/2) in the stochastic modes.
    t.eta_g.eta0 = eta_g_default(network.num_classes(), network.lambda, t.c_g);
    if (t.kind == OptimizerKind::kSgd || t.kind == OptimizerKind::kPsgd) {
      t.eta_g.kind = LrSchedule::Kind::kPower;
      t.eta_g.alpha = 0.5;
    }
  }
  return t;
}

json schedule_to_json(const LrSchedule& s) {
  json j;
  j["kind"] = s.kind == LrSchedule::Kind::kConstant ? "constant" : "power";
  j["eta0"] = s.eta0;
  j["alpha"] = s.alpha;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  network.validate();
  try {
    trainer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (dataset.kind == DatasetSpec::Kind::kGaussianBlobs) {
    if (dataset.dim != network.input_dim())
      throw ConfigError("dataset.dim must match network.widths[0]");
    if (dataset.classes != network.num_classes())
      throw ConfigError("dataset.classes must match the network's class count");
    const bool stochastic =
        trainer.kind == OptimizerKind::kSgd || trainer.kind == OptimizerKind::kPsgd;
    if (stochastic && dataset.n_points < 2 * trainer.batch_size)
      throw ConfigError("dataset.n_points must be >= 2 * batch_size");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

void SweepConfig::validate() const {
  base.validate();
  if (grid.empty()) throw ConfigError("sweep grid must not be empty");
  if (settings.empty()) throw ConfigError("sweep settings must not be empty");
}

ExperimentConfig parse_experiment_config(const json& j) {
  expect_keys(j, {"network", "trainer", "dataset", "output_dir"}, "experiment config");
  ExperimentConfig c;
  if (!j.contains("network")) throw ConfigError("missing \"network\" section");
  c.network = parse_network(j.at("network"));
  c.trainer = parse_trainer(j.contains("trainer") ? j.at("trainer") : json::object(),
                            c.network);
  c.dataset = parse_dataset(j.contains("dataset") ? j.at("dataset") : json::object());
  c.output_dir = get_str(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(load_json_file(path));
}

SweepConfig load_sweep_config(const std::string& path) {
  const json j = load_json_file(path);
  expect_keys(j, {"base", "axis", "grid", "settings"}, "sweep config");
  SweepConfig c;
  if (!j.contains("base")) throw ConfigError("missing \"base\" experiment config");
  c.base = parse_experiment_config(j.at("base"));

  const std::string axis = get_str(j, "axis", "eta_unified");
  if (axis == "eta_w")
    c.axis = SweepAxis::kEtaW;
  else if (axis == "eta_g")
    c.axis = SweepAxis::kEtaG;
  else if (axis == "eta_unified")
    c.axis = SweepAxis::kEtaUnified;
  else if (axis == "alpha")
    c.axis = SweepAxis::kAlpha;
  else
    throw ConfigError("unknown sweep axis \"" + axis + "\"");

  if (!j.contains("grid") || !j.at("grid").is_array())
    throw ConfigError("sweep grid must be an array");
  c.grid = j.at("grid").get<std::vector<double>>();

  if (j.contains("settings")) {
    c.settings.clear();
    for (const auto& s : j.at("settings")) {
      const std::string name = s.get<std::string>();
      if (name == "sgd_bn")
        c.settings.push_back(SweepSetting::kSgdBn);
      else if (name == "psgd")
        c.settings.push_back(SweepSetting::kPsgd);
      else if (name == "bn_removed")
        c.settings.push_back(SweepSetting::kBnRemoved);
      else
        throw ConfigError("unknown sweep setting \"" + name + "\"");
    }
  }
  c.validate();
  return c;
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["network"]["widths"] = c.network.widths;
  j["network"]["activation"] = to_string(c.network.activation);
  j["network"]["epsilon"] = c.network.epsilon;
  j["network"]["lambda"] = c.network.lambda;
  j["network"]["internal_gamma"] = c.network.internal_gamma;
  j["network"]["internal_beta"] = c.network.internal_beta;
  j["network"]["bn_mode"] = to_string(c.network.bn_mode);

  j["trainer"]["optimizer"] = to_string(c.trainer.kind);
  j["trainer"]["steps"] = c.trainer.steps;
  j["trainer"]["seed"] = c.trainer.seed;
  j["trainer"]["batch_size"] = c.trainer.batch_size;
  j["trainer"]["c_g"] = c.trainer.c_g;
  j["trainer"]["record_every"] = c.trainer.record_every;
  j["trainer"]["eta_w"] = schedule_to_json(c.trainer.eta_w);
  j["trainer"]["eta_g"] = schedule_to_json(c.trainer.eta_g);

  if (c.dataset.kind == DatasetSpec::Kind::kGaussianBlobs) {
    j["dataset"]["kind"] = "gaussian-blobs";
    j["dataset"]["dim"] = c.dataset.dim;
    j["dataset"]["classes"] = c.dataset.classes;
    j["dataset"]["n_points"] = c.dataset.n_points;
    j["dataset"]["separation"] = c.dataset.separation;
    j["dataset"]["scale"] = c.dataset.scale;
    j["dataset"]["seed"] = c.dataset.seed;
  } else {
    j["dataset"]["kind"] = "csv-file";
    j["dataset"]["path"] = c.dataset.path;
    j["dataset"]["label_col"] = c.dataset.label_col;
  }
  j["output_dir"] = c.output_dir;
  return j;
}

const char* to_string(SweepSetting s) {
  switch (s) {
    case SweepSetting::kSgdBn: return "sgd_bn";
    case SweepSetting::kPsgd: return "psgd";
    case SweepSetting::kBnRemoved: return "bn_removed";
  }
  return "?";
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kEtaW: return "eta_w";
    case SweepAxis::kEtaG: return "eta_g";
    case SweepAxis::kEtaUnified: return "eta_unified";
    case SweepAxis::kAlpha: return "alpha";
  }
  return "?";
}

}  // namespace silab
