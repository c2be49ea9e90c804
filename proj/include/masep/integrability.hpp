#pragma once

// Numerical verification of the R-matrix relations: the inverse relation,
// the Yang-Baxter equation on three-letter sectors, and the commutation,
// braid and inverse relations of the tensor-position operators T_l.
//
// Every check is done sector by sector. Because R (x) I and I (x) R are
// block diagonal over sectors up to a permutation of rows and columns, the
// sector statements imply the full N^2 / N^3 / N^N ones.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "masep/bethe_core.hpp"

namespace masep {

struct VerificationRow {
  std::string relation;     // "inverse", "ybe", "commute", "braid", "initial", ...
  std::string sector;       // e.g. "112"
  std::string detail;       // indices / positions involved
  std::uint64_t point_seed = 0;
  double deviation = 0.0;
};

struct VerificationReport {
  std::vector<VerificationRow> rows;

  double max_deviation() const;
  /// Row with the largest deviation, or nullptr if empty.
  const VerificationRow* worst() const;
  void append(const VerificationReport& other);
};

/// max over two-letter sectors of |r_block(beta, alpha) r_block(alpha, beta) - I|_max.
VerificationReport verify_inverse(int beta, int alpha, const SpectralPoint& point, const SystemParams& params,
                                  int alphabet);

/// Both sides of (R_gb x I)(I x R_ga)(R_ba x I) = (I x R_ba)(R_ga x I)(I x R_gb)
/// on a three-letter sector.
VerificationReport verify_ybe(int gamma, int beta, int alpha, const SpectralPoint& point,
                              const SystemParams& params, const Sector& triple);

/// T_i / T_j relations on every sector of the given word length:
/// commutation for |i - j| >= 2, braid for |i - j| = 1, and
/// T_i(b, a) T_i(a, b) = I. Uses spectral indices 1..4 of `point`.
VerificationReport verify_braid(int i, int j, const SpectralPoint& point, const SystemParams& params,
                                int word_length, int alphabet);

/// n values spread uniformly in angle on the circle of radius fraction * max_radius.
/// The stream depends only on (seed, index).
SpectralPoint random_admissible_point(std::size_t n, const SystemParams& params, std::uint64_t seed,
                                      std::uint64_t index, double fraction = 0.9);

struct IntegrabilitySuiteOptions {
  int alphabet = 3;
  int points = 50;
  std::uint64_t seed = 42;
  /// Extra points at this fraction of max_radius; 0 disables them.
  double adversarial_fraction = 0.999;
  int adversarial_points = 10;
  int max_word_length = 5;  // braid suite
};

VerificationReport run_inverse_suite(const SystemParams& params, const IntegrabilitySuiteOptions& options);
VerificationReport run_ybe_suite(const SystemParams& params, const IntegrabilitySuiteOptions& options);
VerificationReport run_braid_suite(const SystemParams& params, const IntegrabilitySuiteOptions& options);

}  // namespace masep
