#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sawlab/lattice.hpp"
#include "sawlab/torus_plateau.hpp"

namespace sawlab {

// Entry point of the sawlab binary. Exit codes: 0 success, 1 selftest
// failure, 2 bad input or precondition, 3 budget exhausted.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

// Plateau plot data: one row per report row, G^T against |x|_inf with the
// chi/r^d reference level of the same z.
struct PlotRow {
  double z = 0;
  Point x;
  int norm_inf = 0;
  double GT = 0;
  double reference = 0;
  bool operator==(const PlotRow&) const = default;
};

std::vector<PlotRow> plot_rows(const PlateauReport& rep);
void emit_plot_data(std::ostream& os, const PlateauReport& rep, const std::string& stamp = "");
std::vector<PlotRow> read_plot_data(std::istream& is);

}  // namespace sawlab
