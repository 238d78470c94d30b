#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "silab/harness/harness.hpp"

namespace silab {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  const std::size_t m = records.empty() ? 0 : records.front().w_norm.size();
  out << "t,loss,grad_v_sq_total,grad_g_sq";
  for (std::size_t i = 0; i < m; ++i) out << ",w_norm_" << i;
  for (std::size_t i = 0; i < m; ++i) out << ",eff_lr_" << i;
  out << '\n';
  for (const auto& rec : records) {
    out << rec.t << ',' << fmt17(rec.loss) << ',' << fmt17(rec.grad_v_sq_total) << ','
        << fmt17(rec.grad_g_sq);
    for (double v : rec.w_norm) out << ',' << fmt17(v);
    for (double v : rec.eff_lr) out << ',' << fmt17(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Vec& CsvTable::column(const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ConfigError("no column named \"" + name + "\"");
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  table.columns.resize(table.header.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= table.columns.size())
        throw ConfigError("row " + std::to_string(row) + " has too many cells in " + path);
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw ConfigError("non-numeric cell at row " + std::to_string(row) + ", column " +
                          std::to_string(col + 1) + " in " + path);
      table.columns[col].push_back(v);
      ++col;
    }
    if (col != table.columns.size())
      throw ConfigError("ragged row " + std::to_string(row) + " in " + path);
  }
  return table;
}

}  // namespace silab
