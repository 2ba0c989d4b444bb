#include "vtm/trajectory_csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw NumericalError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int n = traj.dof;
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",q_" << i;
  for (int i = 1; i <= n; ++i) out << ",qd_" << i;
  for (int i = 1; i <= n; ++i) out << ",p_" << i;
  out << ",E_kin,E_pot,E_tot,drift,event\n";

  std::vector<std::string> p(static_cast<std::size_t>(n));
  for (const auto& row : traj.rows) {
    out << format_double(row.t);
    for (int i = 0; i < n; ++i) out << ',' << format_double(row.q(i));
    for (int i = 0; i < n; ++i) out << ',' << format_double(row.qd(i));
    std::fill(p.begin(), p.end(), std::string());
    for (std::size_t k = 0; k < row.free_joints.size(); ++k) {
      p[row.free_joints[k]] = format_double(row.momentum(static_cast<Eigen::Index>(k)));
    }
    for (const auto& cell : p) out << ',' << cell;
    out << ',' << format_double(row.kinetic) << ',' << format_double(row.potential) << ','
        << format_double(row.total) << ',' << format_double(row.drift) << ',' << (row.event ? 1 : 0)
        << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: missing header");
  const auto header = split(line);
  if (header.size() < 6 || (header.size() - 6) % 3 != 0 || header.front() != "t") {
    throw ValidationError("csv: unexpected header");
  }
  Trajectory traj;
  traj.dof = static_cast<int>((header.size() - 6) / 3);
  const int n = traj.dof;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells");
    }
    TrajectoryRow row;
    std::size_t c = 0;
    row.t = parse_double(cells[c++], line_no);
    row.q.resize(n);
    row.qd.resize(n);
    for (int i = 0; i < n; ++i) row.q(i) = parse_double(cells[c++], line_no);
    for (int i = 0; i < n; ++i) row.qd(i) = parse_double(cells[c++], line_no);
    std::vector<double> p;
    for (int i = 0; i < n; ++i) {
      const auto& cell = cells[c++];
      if (cell.empty()) continue;
      row.free_joints.push_back(i);
      p.push_back(parse_double(cell, line_no));
    }
    row.momentum = Eigen::Map<VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    row.kinetic = parse_double(cells[c++], line_no);
    row.potential = parse_double(cells[c++], line_no);
    row.total = parse_double(cells[c++], line_no);
    row.drift = parse_double(cells[c++], line_no);
    row.event = cells[c++] == "1";
    traj.rows.push_back(std::move(row));
  }
  return traj;
}

}  // namespace vtm
