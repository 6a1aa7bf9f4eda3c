#include "dirac/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dirac {

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> csv_header(const Trajectory& traj) {
  std::vector<std::string> h{"t"};
  const auto block = [&](const char* name, int count) {
    for (int i = 1; i <= count; ++i) h.push_back(name + std::to_string(i));
  };
  block("x", traj.n);
  block("v", traj.n);
  block("p", traj.n);
  block("lambda", traj.k);
  h.emplace_back("E");
  h.emplace_back("constraint_residual");
  if (traj.kind == TrajectoryKind::kNormalExtremal) {
    block("u", traj.fibre_dim);
    h.emplace_back("h");
  }
  return h;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const std::vector<std::string> header = csv_header(traj);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    const MechState& s = traj.states[r];
    out << format_number(s.t);
    const auto put = [&](const Vec& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_number(v[i]);
    };
    put(s.x);
    put(s.v);
    put(s.p);
    put(s.lambda);
    out << ',' << format_number(traj.energy[r]) << ',' << format_number(traj.constraint_residual[r]);
    if (traj.kind == TrajectoryKind::kNormalExtremal) {
      put(traj.controls[r]);
      out << ',' << format_number(traj.energy[r]);
    }
    out << '\n';
  }
}

void write_csv_file(const Trajectory& traj, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open output file: " + path);
  write_csv(traj, f);
  f.flush();
  if (!f) throw IoError("failed writing output file: " + path);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ArgumentError("CSV line " + std::to_string(lineno) + ": wrong number of fields");
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const char* b = cells[i].data();
      const char* e = b + cells[i].size();
      const auto res = std::from_chars(b, e, row[i]);
      if (res.ec != std::errc() || res.ptr != e) {
        throw ArgumentError("CSV line " + std::to_string(lineno) + ": not a number: " + cells[i]);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open CSV file: " + path);
  return read_csv(f);
}

}  // namespace dirac
