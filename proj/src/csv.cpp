#include "vmrd/csv.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vmrd {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell) {
  if (cell == "true") return 1.0;
  if (cell == "false") return 0.0;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: \"" + cell + "\"");
  }
  if (used != cell.size()) throw std::invalid_argument("not a number: \"" + cell + "\"");
  return v;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_rdc_header(std::ostream& out) { out << kRdcHeader << '\n'; }

void write_rdc_row(std::ostream& out, const RdcPoint& p) {
  out << format_real(p.lambda_d) << ',' << format_real(p.lambda_g) << ',' << format_real(p.rate) << ','
      << format_real(p.distortion) << ',' << format_real(p.cost) << ',' << p.iterations << ','
      << (p.converged ? "true" : "false") << '\n';
}

void write_simulation_header(std::ostream& out) { out << kSimulationHeader << '\n'; }

void write_simulation_row(std::ostream& out, const SimulationRow& row) {
  const TrialReport& r = row.report;
  out << format_real(row.rate) << ',' << row.m << ',' << r.trials << ',' << format_real(row.eta) << ','
      << format_real(r.empirical_distortion) << ',' << format_real(r.stderr_d) << ','
      << format_real(r.empirical_cost) << ',' << format_real(r.stderr_c) << ',' << row.seed << '\n';
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw std::invalid_argument("empty CSV");
  t.header = split(line);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw std::invalid_argument("ragged CSV row: " + line);
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_cell(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace vmrd
