#pragma once

// CSV writers for solver and simulator output. Reals are printed with 12
// significant digits ("%.12g"), so the same values always give the same
// bytes.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vmrd/simulator.hpp"
#include "vmrd/solver.hpp"

namespace vmrd {

inline constexpr const char* kRdcHeader =
    "lambda_d,lambda_g,rate_bits_per_symbol,distortion,cost,iterations,converged";
inline constexpr const char* kSimulationHeader =
    "rate,m,trials,eta,emp_distortion,stderr_d,emp_cost,stderr_c,seed";

std::string format_real(double v);

void write_rdc_header(std::ostream& out);
void write_rdc_row(std::ostream& out, const RdcPoint& p);

struct SimulationRow {
  double rate = 0.0;
  int m = 1;
  double eta = 0.0;
  std::uint64_t seed = 0;
  TrialReport report;
};

void write_simulation_header(std::ostream& out);
void write_simulation_row(std::ostream& out, const SimulationRow& row);

/// Header plus numeric rows (booleans as 0/1). Throws std::invalid_argument
/// on ragged rows or non-numeric cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(const std::string& text);

}  // namespace vmrd
