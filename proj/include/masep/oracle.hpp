#pragma once

// Independent ground truth: the multi-species ASEP as a finite Markov chain
// on a lattice window, solved by uniformization, plus a Gillespie sampler on
// the unbounded lattice.
//
// Generator convention: rates(s, s') is the rate of s -> s' (rows are source
// states). A jump that would leave the window is dropped from the chain but
// still counted in the diagonal, so such rows sum to a negative number and
// the lost probability shows up as leakage.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "masep/bethe_core.hpp"
#include "masep/state.hpp"

namespace masep {

class WindowedStateSpace {
 public:
  /// All (X, pi) with X inside [lo, hi] and pi in the sector.
  WindowedStateSpace(int lo, int hi, Sector sector);

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  std::size_t particles() const { return sector_.word_length(); }
  const Sector& sector() const { return sector_; }
  std::size_t size() const { return positions_.size() * sector_.dim(); }

  State state(std::size_t index) const;
  std::optional<std::size_t> index(const State& state) const;

 private:
  int lo_;
  int hi_;
  Sector sector_;
  std::vector<std::vector<int>> positions_;
  std::map<std::vector<int>, std::size_t> position_index_;
};

struct GeneratorMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> rates;
  /// Total rate of dropped (window-exiting) jumps per state.
  std::vector<double> exit_rates;
};

/// Rates from the exclusion rules: each particle rings at rate 1 and targets
/// x + 1 with probability p, x - 1 with probability q. An empty target is
/// taken; a lower species there is swapped with; otherwise the jump is blocked.
GeneratorMatrix build_generator(const WindowedStateSpace& space, const SystemParams& params);

struct EvolveResult {
  Eigen::VectorXd probabilities;
  double leakage = 0.0;    // 1 - total mass
  int terms = 0;           // Poisson terms used
};

/// Uniformization tail tolerance.
inline constexpr double kUniformizationTolerance = 1e-12;

/// Point mass at `initial` pushed forward by e^{t G}.
EvolveResult evolve(const WindowedStateSpace& space, const GeneratorMatrix& gen, const State& initial, double t);

/// The state reached by one particle attempting one jump on the unbounded
/// lattice; unchanged when blocked.
State apply_jump(const State& state, std::size_t particle, bool right);

struct EmpiricalDistribution {
  std::map<State, double> frequencies;
  std::size_t samples = 0;
};

/// Independent trajectories; sample k draws from mt19937_64 seeded by
/// seed_seq{seed, k} (32-bit halves), so results do not depend on `threads`.
EmpiricalDistribution gillespie(const State& initial, double t, const SystemParams& params, std::size_t n_samples,
                                std::uint64_t seed, int threads = 0);

struct ComparisonRow {
  State state;
  double exact = 0.0;
  double oracle = 0.0;
  double diff = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // in state-space order
  double max_abs_diff = 0.0;
  double tv_distance = 0.0;
};

/// Every state of the space must appear in `exact` and vice versa.
ComparisonReport compare(const std::map<State, double>& exact, const Eigen::VectorXd& oracle,
                         const WindowedStateSpace& space);

/// Total-variation distance between two distributions on states (missing keys count as 0).
double total_variation(const std::map<State, double>& a, const std::map<State, double>& b);

}  // namespace masep
