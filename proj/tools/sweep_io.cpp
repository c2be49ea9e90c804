#include "sweep_io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "masep/errors.hpp"

namespace masep::cli {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InputError("bad number '" + s + "' in sweep file");
  return v;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

constexpr const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#444444"};

}  // namespace

std::string fmt17(double v) { return fmt("%.17g", v); }

std::string sweep_header(std::size_t particles) {
  std::string h = "t";
  for (std::size_t i = 1; i <= particles; ++i) h += ",x_" + std::to_string(i);
  return h + ",pi,prob";
}

std::string sweep_line(const SweepRow& row) {
  return fmt17(row.t) + "," + format_positions(row.state.positions) + "," + row.state.species.str() + "," +
         fmt17(row.prob);
}

std::vector<SweepRow> read_sweep(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (n == 0) {
      if (cells.size() < 4 || cells.front() != "t" || cells.back() != "prob") {
        throw InputError("sweep file does not start with a t,x_1..x_N,pi,prob header");
      }
      n = cells.size() - 3;
      continue;
    }
    if (cells.size() != n + 3) throw InputError("sweep row has the wrong number of columns: " + line);
    std::vector<int> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(std::stoi(cells[1 + i]));
    rows.push_back({to_double(cells[0]), State(x, SpeciesWord::parse(cells[n + 1])), to_double(cells[n + 2])});
  }
  if (n == 0) throw InputError("empty sweep file");
  return rows;
}

std::string marginal_svg(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InputError("nothing to plot");
  std::vector<double> times;
  std::set<int> species;
  int x_lo = rows.front().state.positions.front();
  int x_hi = x_lo;
  for (const auto& r : rows) {
    if (std::find(times.begin(), times.end(), r.t) == times.end()) times.push_back(r.t);
    for (std::size_t i = 0; i < r.state.size(); ++i) {
      species.insert(r.state.species[i]);
      x_lo = std::min(x_lo, r.state.positions[i]);
      x_hi = std::max(x_hi, r.state.positions[i]);
    }
  }
  // marginal[t][species][x]
  std::map<double, std::map<int, std::map<int, double>>> marginal;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.state.size(); ++i) {
      marginal[r.t][r.state.species[i]][r.state.positions[i]] += r.prob;
    }
  }

  const double width = 720.0;
  const double panel_h = 180.0;
  const double left = 56.0;
  const double right = 120.0;
  const double top = 28.0;
  const double gap = 36.0;
  const double plot_w = width - left - right;
  const double height = top + static_cast<double>(times.size()) * (panel_h + gap);
  const double span = std::max(1, x_hi - x_lo);
  auto px = [&](int x) { return left + plot_w * (x - x_lo) / span; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt("%.0f", width) << "\" height=\""
      << fmt("%.0f", height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const int tick_step = std::max(1, (x_hi - x_lo) / 12);

  for (std::size_t k = 0; k < times.size(); ++k) {
    const double y0 = top + static_cast<double>(k) * (panel_h + gap);
    auto py = [&](double v) { return y0 + panel_h * (1.0 - v); };
    svg << "<text x=\"" << fmt("%.1f", left) << "\" y=\"" << fmt("%.1f", y0 - 8) << "\">t = " << fmt("%g", times[k])
        << "</text>\n";
    svg << "<rect x=\"" << fmt("%.1f", left) << "\" y=\"" << fmt("%.1f", y0) << "\" width=\"" << fmt("%.1f", plot_w)
        << "\" height=\"" << fmt("%.1f", panel_h) << "\" fill=\"none\" stroke=\"#999\"/>\n";
    for (const double v : {0.0, 0.5, 1.0}) {
      svg << "<text x=\"" << fmt("%.1f", left - 6) << "\" y=\"" << fmt("%.1f", py(v) + 4)
          << "\" text-anchor=\"end\">" << fmt("%g", v) << "</text>\n";
    }
    for (int x = x_lo; x <= x_hi; x += tick_step) {
      svg << "<text x=\"" << fmt("%.1f", px(x)) << "\" y=\"" << fmt("%.1f", y0 + panel_h + 14)
          << "\" text-anchor=\"middle\">" << x << "</text>\n";
    }
    std::size_t colour = 0;
    for (const int s : species) {
      const auto& m = marginal[times[k]][s];
      svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kPalette[colour % std::size(kPalette)]
          << "\" points=\"";
      for (int x = x_lo; x <= x_hi; ++x) {
        const auto it = m.find(x);
        const double v = it == m.end() ? 0.0 : it->second;
        svg << (x == x_lo ? "" : " ") << fmt("%.2f", px(x)) << "," << fmt("%.2f", py(std::clamp(v, 0.0, 1.0)));
      }
      svg << "\"/>\n";
      if (k == 0) {
        const double ly = top + 14.0 * static_cast<double>(colour);
        svg << "<line x1=\"" << fmt("%.1f", width - right + 12) << "\" y1=\"" << fmt("%.1f", ly) << "\" x2=\""
            << fmt("%.1f", width - right + 32) << "\" y2=\"" << fmt("%.1f", ly) << "\" stroke=\""
            << kPalette[colour % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt("%.1f", width - right + 38) << "\" y=\"" << fmt("%.1f", ly + 4) << "\">species "
            << s << "</text>\n";
      }
      ++colour;
    }
  }
  svg << "<text x=\"" << fmt("%.1f", left + plot_w / 2) << "\" y=\"" << fmt("%.1f", height - 4)
      << "\" text-anchor=\"middle\">site x (expected occupation per species)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace masep::cli
