#pragma once

#include "dirac/implicit_mechanics.hpp"

#include <iosfwd>
#include <string>

namespace dirac {

// Shortest decimal string that parses back to the same double.
std::string format_number(double value);

std::vector<std::string> csv_header(const Trajectory& traj);
void write_csv(const Trajectory& traj, std::ostream& out);
void write_csv_file(const Trajectory& traj, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace dirac
