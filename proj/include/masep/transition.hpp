#pragma once

// Transition probabilities P_{(Y,nu)}(X,pi;t) from the contour-integral formula
//
//   \oint ... \oint sum_sigma [A_sigma]_{pi,nu} prod_i xi_{sigma(i)}^{x_i - y_{sigma(i)} - 1} e^{eps(xi_i) t} dxi,
//   eps(xi) = p / xi + q xi - 1,
//
// evaluated with the N-fold trapezoidal rule on one circle.
//
// Every entry point goes through one batched grid engine. For each sigma
// the summation variables are relabelled (m'_i = m_{sigma(i)}) so that the
// X dependence becomes the separable monomial prod_i z_{m'_i}^{x_i}; the
// grid is then reduced against all requested X at once by a pruned DFT
// (one complex GEMM per axis and outer slice).

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "masep/bethe_core.hpp"
#include "masep/integrability.hpp"
#include "masep/quadrature.hpp"
#include "masep/state.hpp"

namespace masep {

/// Imaginary parts and overshoot outside [0, 1] above this are errors.
inline constexpr double kProbabilityTolerance = 1e-8;

struct TransitionOptions {
  /// Contour radius; empty means kDefaultRadiusFraction * max_radius.
  std::optional<double> radius;
  QuadratureOptions quadrature;

  double resolve_radius(const SystemParams& params) const;
};

struct TransitionQuery {
  State initial;  // (Y, nu)
  State final;    // (X, pi)
  double time = 0.0;
  SystemParams params;
  TransitionOptions options;
};

struct ProbabilityResult {
  double value = 0.0;
  double est_error = 0.0;
  int nodes = 0;  // 0 when the answer is exact without integration
  double radius = 0.0;
};

/// What the grid engine integrates: one initial position vector, a set of
/// initial species columns of one sector and a list of final position vectors.
struct GridRequest {
  std::vector<int> y;
  Sector sector{std::vector<int>{1}};
  std::vector<SpeciesWord> columns;  // nu values; ignored in scalar mode
  bool scalar = false;               // A_sigma = prod S over inversions (single species)
  bool split_terms = false;          // keep every sigma term separately
  /// Sum half the outer axis and take twice the real part. Valid because
  /// every term is real; switching it off keeps the full complex sum.
  bool conjugate_symmetry = true;
  double time = 0.0;
  SystemParams params;
  std::vector<std::vector<int>> targets;
};

struct GridValues {
  std::size_t n_targets = 0;
  std::size_t n_columns = 0;
  std::size_t dim = 0;
  std::size_t n_terms = 0;
  std::vector<Permutation> sigmas;  // term order when split
  std::vector<Complex> values;
  double est_error = 0.0;
  int nodes = 0;
  double radius = 0.0;
  /// Per target: the level below which successive node counts cannot be
  /// expected to agree, eps * r^{sum x - sum y} * e^{N t (p/r + qr - 1)}.
  std::vector<double> rounding;

  /// Integral for target X, column nu, final word of the given sector rank,
  /// and (when split) permutation index.
  Complex at(std::size_t target, std::size_t column, std::size_t rank, std::size_t term = 0) const;
  /// Sum over terms.
  Complex total(std::size_t target, std::size_t column, std::size_t rank) const;
};

/// One trapezoidal pass at a fixed node count.
GridValues evaluate_grid_fixed(const GridRequest& request, const ContourSpec& contour, int threads = 0);

/// Node refinement until every requested entry has converged. Targets with
/// sum x < sum y are integrated in the mirror image (x -> -x, words reversed,
/// p <-> q) at the same fraction of that image's admissible radius.
GridValues evaluate_grid(const GridRequest& request, double radius, const QuadratureOptions& options = {});

/// Element (pi, nu) of P_Y(X; t). Exactly 0, without integrating, across sectors.
ProbabilityResult probability(const TransitionQuery& query);

struct BlockResult {
  Sector sector;
  Eigen::MatrixXd values;  // rows pi, columns nu, in sector rank order
  double est_error = 0.0;
  int nodes = 0;
  double radius = 0.0;
};

/// Sector block of P_Y(X; t) from a single grid pass.
BlockResult sector_block(const std::vector<int>& y, const Sector& sector, const std::vector<int>& x, double t,
                         const SystemParams& params, const TransitionOptions& options = {});

/// Single-species P_Y(X; t) with scalar amplitudes.
ProbabilityResult single_species_probability(const std::vector<int>& y, const std::vector<int>& x, double t,
                                             const SystemParams& params, const TransitionOptions& options = {});

struct Distribution {
  State initial;
  double time = 0.0;
  int window_lo = 0;
  int window_hi = 0;
  std::map<State, double> probabilities;
  double total_mass = 0.0;
  double deficit = 0.0;  // 1 - total_mass
  double est_error = 0.0;
  int nodes = 0;
  double radius = 0.0;
};

/// Mass deficit accepted by the automatic window calibration.
inline constexpr double kWindowMassTolerance = 1e-8;

/// Every (X, pi) with X inside the window. Without a window, starts at
/// Y +- ceil(4 sqrt(t) + t + 4) and widens until the deficit is below
/// kWindowMassTolerance. A given window whose mass falls short of
/// 1 - 10 * kWindowMassTolerance is an InputError.
Distribution distribution(const State& initial, double t, const SystemParams& params,
                          std::optional<std::pair<int, int>> window = std::nullopt,
                          const TransitionOptions& options = {});

/// All strictly increasing n-tuples inside [lo, hi], lexicographic.
std::vector<std::vector<int>> window_positions(int n, int lo, int hi);

/// Initial-condition check: for every particle count up to max_particles,
/// a packed and a spread Y, every sector over the alphabet {1..n} and every
/// X with y_i <= x_i <= y_i + reach, the t = 0 block is delta_{XY} I and
/// every sigma != Id term integrates to zero.
VerificationReport run_initial_suite(const SystemParams& params, int max_particles = 3, int reach = 3,
                                     const QuadratureOptions& options = {});

/// Radius used by the initial-condition harness (its X lie to the right of Y,
/// so a small circle converges fastest without amplifying rounding).
inline constexpr double kInitialSuiteRadiusFraction = 0.5;

}  // namespace masep
