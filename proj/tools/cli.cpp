#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "masep/errors.hpp"
#include "masep/integrability.hpp"
#include "masep/oracle.hpp"
#include "masep/quadrature.hpp"
#include "masep/transition.hpp"
#include "sweep_io.hpp"

namespace masep::cli {

namespace {

using json = nlohmann::json;

struct QuadratureArgs {
  std::string radius = "auto";
  int nodes = 32;
  int max_nodes = 512;
  double tol = 1e-9;
  int threads = 0;

  TransitionOptions options(const SystemParams& params) const {
    TransitionOptions o;
    if (radius != "auto") {
      std::size_t used = 0;
      double r = 0.0;
      try {
        r = std::stod(radius, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != radius.size()) throw InputError("--radius must be a number or 'auto', got '" + radius + "'");
      o.radius = r;
    }
    o.quadrature.initial_nodes = nodes;
    o.quadrature.max_nodes = max_nodes;
    o.quadrature.tol_rel = tol;
    o.quadrature.threads = threads;
    o.resolve_radius(params);  // rejects inadmissible radii with the bound in the message
    return o;
  }
};

void add_quadrature_flags(CLI::App* sub, QuadratureArgs& q) {
  sub->add_option("--radius", q.radius, "contour radius or 'auto' (0.9 of the admissible bound)")
      ->capture_default_str();
  sub->add_option("--nodes", q.nodes, "initial nodes per circle")->capture_default_str();
  sub->add_option("--max-nodes", q.max_nodes, "node cap for refinement")->capture_default_str();
  sub->add_option("--tol", q.tol, "convergence tolerance")->capture_default_str();
  sub->add_option("--threads", q.threads, "worker threads (0: all cores)")->capture_default_str();
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InputError("bad number list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

// ---- prob ------------------------------------------------------------------

struct ProbArgs {
  double p = 0.5;
  double t = 0.0;
  std::string y, nu, x, pi;
  bool as_json = false;
  QuadratureArgs quad;
};

int cmd_prob(const ProbArgs& a, std::ostream& out) {
  const SystemParams params = SystemParams::from_p(a.p);
  TransitionQuery query;
  query.initial = State(parse_positions(a.y), SpeciesWord::parse(a.nu));
  query.final = State(parse_positions(a.x), SpeciesWord::parse(a.pi));
  query.time = a.t;
  query.params = params;
  query.options = a.quad.options(params);
  const ProbabilityResult r = probability(query);
  if (a.as_json) {
    const json record = {{"p", a.p},
                         {"t", a.t},
                         {"y", query.initial.positions},
                         {"nu", query.initial.species.str()},
                         {"x", query.final.positions},
                         {"pi", query.final.species.str()},
                         {"value", r.value},
                         {"err", r.est_error},
                         {"M", r.nodes},
                         {"radius", r.radius}};
    out << record.dump() << "\n";
  } else {
    out << "value  " << fmt17(r.value) << "\n"
        << "err    " << sci(r.est_error) << "\n"
        << "M      " << r.nodes << "\n"
        << "radius " << fmt17(r.radius) << "\n";
  }
  return kOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  double p = 0.5;
  int alphabet = 3;
  int points = 50;
  std::uint64_t seed = 42;
  int max_word_length = 5;
  int max_particles = 3;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const SystemParams params = SystemParams::from_p(a.p);
  if (a.alphabet < 1 || a.alphabet > 9) throw InputError("--alphabet must be in 1..9");
  if (a.points < 1) throw InputError("--points must be positive");
  if (a.max_word_length < 2 || a.max_word_length > 6) throw InputError("--max-word-length must be in 2..6");
  IntegrabilitySuiteOptions o;
  o.alphabet = a.alphabet;
  o.points = a.points;
  o.seed = a.seed;
  o.max_word_length = a.max_word_length;

  struct Part {
    std::string name;
    double threshold;
    std::function<VerificationReport()> run;
  };
  const std::vector<Part> all{
      {"inverse", kRelationThreshold, [&] { return run_inverse_suite(params, o); }},
      {"ybe", kRelationThreshold, [&] { return run_ybe_suite(params, o); }},
      {"braid", kRelationThreshold, [&] { return run_braid_suite(params, o); }},
      {"initial", kInitialThreshold, [&] { return run_initial_suite(params, a.max_particles); }},
  };
  std::vector<const Part*> chosen;
  for (const auto& part : all) {
    if (a.suite == "all" || a.suite == part.name) chosen.push_back(&part);
  }
  if (chosen.empty()) throw InputError("unknown suite '" + a.suite + "'");

  out << "suite,relation,sector,detail,point_seed,deviation,threshold,status\n";
  bool pass = true;
  const VerificationRow* worst = nullptr;
  double worst_ratio = 0.0;
  std::vector<VerificationReport> reports;
  reports.reserve(chosen.size());
  for (const Part* part : chosen) {
    reports.push_back(part->run());
    for (const auto& row : reports.back().rows) {
      const bool ok = row.deviation < part->threshold;
      pass = pass && ok;
      out << part->name << "," << row.relation << "," << row.sector << ",\"" << row.detail << "\"," << row.point_seed
          << "," << sci(row.deviation) << "," << sci(part->threshold) << "," << (ok ? "pass" : "FAIL") << "\n";
      const double ratio = row.deviation / part->threshold;
      if (worst == nullptr || ratio > worst_ratio) {
        worst = &row;
        worst_ratio = ratio;
      }
    }
  }
  out << "# suite=" << a.suite << " p=" << fmt17(a.p) << " seed=" << a.seed << " status=" << (pass ? "pass" : "FAIL")
      << "\n";
  if (!pass && worst != nullptr) {
    err << "verification failed; worst offender: " << worst->relation << " sector " << worst->sector << " ("
        << worst->detail << ") seed " << worst->point_seed << " deviation " << sci(worst->deviation) << "\n";
    return kVerificationFailed;
  }
  return kOk;
}

// ---- oracle-compare --------------------------------------------------------

struct CompareArgs {
  double p = 0.7;
  double t = 1.0;
  std::string y = "0,1";
  std::string nu = "12";
  int window = 10;
  double threshold = 1e-6;
  double leak_threshold = 1e-8;
  std::string out_path;
  QuadratureArgs quad;
};

int cmd_oracle_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const SystemParams params = SystemParams::from_p(a.p);
  const State initial(parse_positions(a.y), SpeciesWord::parse(a.nu));
  if (initial.size() > 3) throw InputError("oracle-compare supports at most 3 particles");
  if (a.window < 0) throw InputError("--window must be non-negative");
  const int lo = initial.positions.front() - a.window;
  const int hi = initial.positions.back() + a.window;

  const WindowedStateSpace space(lo, hi, sector_of(initial.species));
  const GeneratorMatrix gen = build_generator(space, params);
  const EvolveResult oracle = evolve(space, gen, initial, a.t);
  if (oracle.leakage > a.leak_threshold) {
    err << "window [" << lo << ", " << hi << "] leaks " << sci(oracle.leakage) << " > " << sci(a.leak_threshold)
        << "; widen --window\n";
    return kLeakage;
  }
  const Distribution exact = distribution(initial, a.t, params, std::make_pair(lo, hi), a.quad.options(params));
  const ComparisonReport report = compare(exact.probabilities, oracle.probabilities, space);

  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) throw InputError("cannot write " + a.out_path);
  }
  std::ostream& csv = a.out_path.empty() ? out : file;
  std::string header;
  for (std::size_t i = 1; i <= initial.size(); ++i) header += "x_" + std::to_string(i) + ",";
  csv << header << "pi,exact,oracle,diff\n";
  for (const auto& row : report.rows) {
    csv << format_positions(row.state.positions) << "," << row.state.species.str() << "," << fmt17(row.exact) << ","
        << fmt17(row.oracle) << "," << fmt17(row.diff) << "\n";
  }
  const bool pass = report.max_abs_diff <= a.threshold;
  csv << "# states=" << space.size() << " max_abs_diff=" << sci(report.max_abs_diff)
      << " tv_distance=" << sci(report.tv_distance) << " leakage=" << sci(oracle.leakage) << " M=" << exact.nodes
      << " radius=" << fmt17(exact.radius) << " status=" << (pass ? "pass" : "FAIL") << "\n";
  if (!pass) {
    err << "max difference " << sci(report.max_abs_diff) << " exceeds " << sci(a.threshold) << "\n";
    return kVerificationFailed;
  }
  return kOk;
}

// ---- sweep / plot ----------------------------------------------------------

struct SweepArgs {
  double p = 0.5;
  std::string t_list = "0,0.5,1";
  std::string y;
  std::string nu;
  std::optional<int> window;
  std::string out_path;
  std::string plot_path;
  QuadratureArgs quad;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
  if (!f) throw InputError("failed writing " + path);
}

int cmd_plot_from(const std::string& csv_path, const std::string& svg_path) {
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot read " + csv_path);
  write_text(svg_path, marginal_svg(read_sweep(in)));
  return kOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const SystemParams params = SystemParams::from_p(a.p);
  const State initial(parse_positions(a.y), SpeciesWord::parse(a.nu));
  const TransitionOptions options = a.quad.options(params);
  const std::vector<double> times = parse_reals(a.t_list);

  std::ostringstream csv;
  csv << sweep_header(initial.size()) << "\n";
  for (const double t : times) {
    std::optional<std::pair<int, int>> window;
    if (a.window) window = std::make_pair(initial.positions.front() - *a.window, initial.positions.back() + *a.window);
    const Distribution d = distribution(initial, t, params, window, options);
    for (const auto& [state, prob] : d.probabilities) csv << sweep_line({t, state, prob}) << "\n";
    out << "# t=" << fmt17(t) << " window=[" << d.window_lo << "," << d.window_hi << "] states="
        << d.probabilities.size() << " mass=" << fmt17(d.total_mass) << " deficit=" << sci(d.deficit)
        << " M=" << d.nodes << "\n";
  }
  write_text(a.out_path, csv.str());
  if (!a.plot_path.empty()) cmd_plot_from(a.out_path, a.plot_path);
  return kOk;
}

// ---- drift -----------------------------------------------------------------

struct DriftArgs {
  double t = 0.5;
  std::string y, nu, x, pi;
  std::string q_list = "0.1,0.01,0.001";
  QuadratureArgs quad;
};

int cmd_drift(const DriftArgs& a, std::ostream& out) {
  TransitionQuery query;
  query.initial = State(parse_positions(a.y), SpeciesWord::parse(a.nu));
  query.final = State(parse_positions(a.x), SpeciesWord::parse(a.pi));
  query.time = a.t;
  out << "# diagnostic only: the formula is not claimed to hold as q -> 0\n";
  out << "q,p,value,err,M,radius\n";
  for (const double q : parse_reals(a.q_list)) {
    query.params = SystemParams::from_p(1.0 - q);
    query.options = a.quad.options(query.params);
    const ProbabilityResult r = probability(query);
    out << fmt17(q) << "," << fmt17(query.params.p) << "," << fmt17(r.value) << "," << sci(r.est_error) << ","
        << r.nodes << "," << fmt17(r.radius) << "\n";
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact transition probabilities of the multi-species ASEP", "masep"};
  app.require_subcommand(1);

  ProbArgs prob;
  auto* s_prob = app.add_subcommand("prob", "one transition probability P_(Y,nu)(X,pi;t)");
  s_prob->add_option("--p", prob.p, "right-hop rate (q = 1 - p)")->required();
  s_prob->add_option("--t", prob.t, "time")->required();
  s_prob->add_option("--y", prob.y, "initial positions, e.g. 0,1")->required();
  s_prob->add_option("--nu", prob.nu, "initial species word, e.g. 12")->required();
  s_prob->add_option("--x", prob.x, "final positions")->required();
  s_prob->add_option("--pi", prob.pi, "final species word")->required();
  s_prob->add_flag("--json", prob.as_json, "print one JSON record");
  add_quadrature_flags(s_prob, prob.quad);

  VerifyArgs verify;
  auto* s_verify = app.add_subcommand("verify", "integrability and initial-condition suites");
  s_verify->add_option("--suite", verify.suite, "inverse|ybe|braid|initial|all")
      ->check(CLI::IsMember({"inverse", "ybe", "braid", "initial", "all"}))
      ->capture_default_str();
  s_verify->add_option("--p", verify.p, "right-hop rate")->capture_default_str();
  s_verify->add_option("--alphabet", verify.alphabet, "species labels 1..k")->capture_default_str();
  s_verify->add_option("--points", verify.points, "random spectral points")->capture_default_str();
  s_verify->add_option("--seed", verify.seed, "random seed")->capture_default_str();
  s_verify->add_option("--max-word-length", verify.max_word_length, "braid suite word length")->capture_default_str();
  s_verify->add_option("--max-particles", verify.max_particles, "initial suite particle count")
      ->capture_default_str();

  CompareArgs cmp;
  auto* s_cmp = app.add_subcommand("oracle-compare", "contour formula vs the windowed Markov chain");
  s_cmp->add_option("--p", cmp.p, "right-hop rate")->capture_default_str();
  s_cmp->add_option("--t", cmp.t, "time")->capture_default_str();
  s_cmp->add_option("--y", cmp.y, "initial positions")->capture_default_str();
  s_cmp->add_option("--nu", cmp.nu, "initial species word")->capture_default_str();
  s_cmp->add_option("--window", cmp.window, "sites added on each side of Y")->capture_default_str();
  s_cmp->add_option("--threshold", cmp.threshold, "allowed max difference")->capture_default_str();
  s_cmp->add_option("--leak-threshold", cmp.leak_threshold, "allowed oracle leakage")->capture_default_str();
  s_cmp->add_option("--out", cmp.out_path, "CSV file (default stdout)");
  add_quadrature_flags(s_cmp, cmp.quad);

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep", "full distributions at several times to CSV");
  s_sweep->add_option("--p", sweep.p, "right-hop rate")->required();
  s_sweep->add_option("--t-list", sweep.t_list, "comma-separated times")->capture_default_str();
  s_sweep->add_option("--y", sweep.y, "initial positions")->required();
  s_sweep->add_option("--nu", sweep.nu, "initial species word")->required();
  s_sweep->add_option("--window", sweep.window, "sites added on each side of Y (default: calibrated)");
  s_sweep->add_option("--out", sweep.out_path, "CSV file")->required();
  s_sweep->add_option("--plot", sweep.plot_path, "SVG of per-site species marginals");
  add_quadrature_flags(s_sweep, sweep.quad);

  std::string plot_in, plot_out;
  auto* s_plot = app.add_subcommand("plot", "redraw the marginal SVG from a sweep CSV");
  s_plot->add_option("--in", plot_in, "sweep CSV")->required();
  s_plot->add_option("--out", plot_out, "SVG file")->required();

  DriftArgs drift;
  auto* s_drift = app.add_subcommand("drift", "track one probability as q -> 0 (diagnostic)");
  s_drift->add_option("--t", drift.t, "time")->capture_default_str();
  s_drift->add_option("--y", drift.y, "initial positions")->required();
  s_drift->add_option("--nu", drift.nu, "initial species word")->required();
  s_drift->add_option("--x", drift.x, "final positions")->required();
  s_drift->add_option("--pi", drift.pi, "final species word")->required();
  s_drift->add_option("--q-list", drift.q_list, "comma-separated q values")->capture_default_str();
  add_quadrature_flags(s_drift, drift.quad);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s_prob) return cmd_prob(prob, out);
    if (*s_verify) return cmd_verify(verify, out, err);
    if (*s_cmp) return cmd_oracle_compare(cmp, out, err);
    if (*s_sweep) return cmd_sweep(sweep, out);
    if (*s_plot) return cmd_plot_from(plot_in, plot_out);
    if (*s_drift) return cmd_drift(drift, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  }
  return kUsage;
}

}  // namespace masep::cli
