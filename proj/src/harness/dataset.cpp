#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "silab/harness/harness.hpp"
#include "silab/numcore/linalg.hpp"

namespace silab {

Dataset synth_blobs(const DatasetSpec& spec) {
  if (spec.dim < 1 || spec.classes < 2 || spec.n_points < 2)
    throw ConfigError("synth_blobs: need dim >= 1, classes >= 2, n_points >= 2");
  Rng root(spec.seed);

  Rng mean_rng = root.split("means");
  std::vector<Vec> means(spec.classes);
  for (auto& m : means) {
    m = unit_vec(mean_rng, spec.dim);
    scale(m, spec.separation);
  }

  Dataset data;
  data.classes = spec.classes;
  data.x = Mat(spec.n_points, spec.dim);
  data.y.resize(spec.n_points);
  Rng point_rng = root.split("points");
  for (int i = 0; i < spec.n_points; ++i) {
    const int c = i % spec.classes;
    data.y[i] = c;
    auto row = data.x.row(i);
    for (int j = 0; j < spec.dim; ++j) row[j] = means[c][j] + spec.scale * point_rng.normal();
  }
  return data;
}

Dataset load_csv(const std::string& path, int label_col) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);

  Dataset data;
  std::vector<Vec> rows;
  std::vector<double> raw_labels;
  std::string line;
  int expected_cols = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    int col_no = 0;
    while (std::getline(ss, cell, ',')) {
      ++col_no;
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("load_csv: non-numeric cell at row " + std::to_string(line_no) +
                          ", column " + std::to_string(col_no));
      cells.push_back(v);
    }
    if (expected_cols < 0) {
      expected_cols = static_cast<int>(cells.size());
      if (expected_cols < 2)
        throw ConfigError("load_csv: need at least one feature column plus labels");
      if (label_col < 0 || label_col >= expected_cols)
        throw ConfigError("load_csv: label column out of range");
    } else if (static_cast<int>(cells.size()) != expected_cols) {
      throw ConfigError("load_csv: ragged row " + std::to_string(line_no));
    }
    const double label = cells[label_col];
    if (label != std::floor(label) || label < 0.0)
      throw ConfigError("load_csv: label at row " + std::to_string(line_no) +
                        " is not a nonnegative integer");
    raw_labels.push_back(label);
    Vec features;
    for (int c = 0; c < expected_cols; ++c)
      if (c != label_col) features.push_back(cells[c]);
    rows.push_back(std::move(features));
  }
  if (rows.size() < 2) throw ConfigError("load_csv: need at least two rows");

  int classes = 0;
  for (double l : raw_labels) classes = std::max(classes, static_cast<int>(l) + 1);
  if (classes < 2) throw ConfigError("load_csv: need at least two classes");

  data.classes = classes;
  data.x = Mat(static_cast<int>(rows.size()), expected_cols - 1);
  data.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto row = data.x.row(static_cast<int>(i));
    for (int j = 0; j < data.x.cols; ++j) row[j] = rows[i][j];
    data.y[i] = static_cast<int>(raw_labels[i]);
  }
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_csv: cannot open " + path + " for writing");
  for (int i = 0; i < data.size(); ++i) {
    auto row = data.x.row(i);
    for (int j = 0; j < data.x.cols; ++j) out << fmt17(row[j]) << ',';
    out << data.y[i] << '\n';
  }
  if (!out) throw IoError("save_csv: write failed for " + path);
}

Dataset make_dataset(const DatasetSpec& spec) {
  if (spec.kind == DatasetSpec::Kind::kGaussianBlobs) return synth_blobs(spec);
  return load_csv(spec.path, spec.label_col);
}

}  // namespace silab
