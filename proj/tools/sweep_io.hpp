#pragma once

// Sweep CSV (t, x_1..x_N, pi, prob) and the species-marginal SVG drawn from it.

#include <iosfwd>
#include <string>
#include <vector>

#include "masep/state.hpp"

namespace masep::cli {

struct SweepRow {
  double t = 0.0;
  State state;
  double prob = 0.0;
};

/// printf("%.17g").
std::string fmt17(double v);

std::string sweep_header(std::size_t particles);
std::string sweep_line(const SweepRow& row);

/// Parses what write_sweep produced; '#' lines are skipped.
std::vector<SweepRow> read_sweep(std::istream& in);

/// One panel per time, one polyline per species: the expected number of
/// particles of that species at each site. A pure function of the rows.
std::string marginal_svg(const std::vector<SweepRow>& rows);

}  // namespace masep::cli
