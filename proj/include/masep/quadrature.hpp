#pragma once

// Trapezoidal quadrature of (1/2 pi i) \oint ... \oint f over N copies of a
// circle centred at the origin.
//
// Integrands here are rational in the xi_j times entire exponentials and are
// analytic on an annulus around an admissible circle, so the equispaced rule
// converges geometrically in the node count. Convergence is certified by
// refining the node count (x1.5, x4/3 alternately) until two successive sums agree.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "masep/bethe_core.hpp"

namespace masep {

/// Largest nested tensor grid we integrate over (M^N nodes).
inline constexpr int kMaxParticles = 5;

/// Open upper bound (-1 + sqrt(1 + 4pq)) / (2q) on admissible radii.
double max_radius(const SystemParams& params);

/// Default radius fraction of max_radius used for "auto".
inline constexpr double kDefaultRadiusFraction = 0.9;

struct ContourSpec {
  double radius = 0.0;
  int nodes = 32;

  /// Throws InputError unless 0 < radius < max_radius(params), nodes >= 8 and even.
  void validate(const SystemParams& params) const;
  static ContourSpec automatic(const SystemParams& params, int nodes = 32);
};

struct ContourNode {
  Complex xi;
  Complex weight;  // xi / M, so that sum weight * f(xi) ~ (1/2 pi i) \oint f
};

std::vector<ContourNode> contour_nodes(const ContourSpec& spec);

/// xi^k for a node r e^{2 pi i m / M}, with the angle reduced exactly mod M.
Complex node_power(double radius, int m, int nodes, int k);

struct QuadratureOptions {
  int initial_nodes = 32;
  int max_nodes = 512;
  double tol_rel = 1e-9;
  int threads = 0;  // 0: hardware concurrency
};

struct QuadratureResult {
  Complex value;
  double est_error = 0.0;  // change from the previous node count
  int nodes = 0;
  double radius = 0.0;
};

/// Next node count of the refinement schedule 32, 48, 64, 96, 128, ...
int next_node_count(int nodes);

/// Successive sums agree when |I_new - I_old| <= tol_rel * max(1, |I_new|).
bool converged(Complex previous, Complex current, double tol_rel);

/// Evaluator for one node count: called with the node index of every variable.
using GridEvaluator = std::function<Complex(std::span<const int> node_index)>;
/// Builds an evaluator for the given node set; lets integrands tabulate per-node values.
using EvaluatorFactory = std::function<GridEvaluator(std::span<const Complex> nodes)>;

/// Tensor-grid sum over one node count with deterministic pairwise summation.
Complex integrate_fixed(const EvaluatorFactory& factory, int dims, const ContourSpec& spec, int threads = 0);

/// Node refinement from options.initial_nodes until converged; throws
/// ConvergenceError past options.max_nodes.
QuadratureResult integrate(const EvaluatorFactory& factory, int dims, double radius,
                           const QuadratureOptions& options = {});

/// Convenience form for evaluators that only need the xi values.
QuadratureResult integrate(const std::function<Complex(std::span<const Complex>)>& f, int dims, double radius,
                           const QuadratureOptions& options = {});

/// Pairwise (cascade) summation, deterministic for a fixed input order.
Complex pairwise_sum(std::span<const Complex> values);

/// Worker count actually used for a requested value (0 = hardware concurrency).
int resolve_threads(int requested);

}  // namespace masep
