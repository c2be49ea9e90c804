#pragma once

// Two-particle scattering amplitudes and the sector-restricted action of
// A_sigma = T_{a_n}(...) ... T_{a_1}(...).
//
// Nothing here ever builds an N^N x N^N matrix. The amplitude matrices are
// block diagonal over sectors, so every operator is applied as a transport
// of vectors indexed by the lexicographic rank of a sector's words.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "masep/combinatorics.hpp"

namespace masep {

using Complex = std::complex<double>;

/// Denominators p + q xi_a xi_b - xi_a below this modulus are rejected.
inline constexpr double kSingularityThreshold = 1e-14;

/// Hop rates: right with probability p, left with q = 1 - p.
struct SystemParams {
  double p = 0.5;
  double q = 0.5;

  /// Validates 0 < p < 1 (the contour formula needs p, q != 0).
  static SystemParams from_p(double p);
};

/// xi_1..xi_n, addressed with 1-based indices.
struct SpectralPoint {
  std::vector<Complex> xi;

  std::size_t size() const { return xi.size(); }
  Complex operator()(int j) const { return xi[static_cast<std::size_t>(j - 1)]; }
};

/// S, P, Q, T for one ordered pair (beta, alpha).
struct PairScalars {
  Complex S;
  Complex P;
  Complex Q;
  Complex T;
};

/// Scalars of the pair (beta, alpha) given the values xi_alpha, xi_beta.
/// Throws SingularityError (tagged with beta, alpha) near a pole.
PairScalars pair_scalars(Complex xi_alpha, Complex xi_beta, const SystemParams& params,
                         int beta = 0, int alpha = 0);

Complex scalar_S(int alpha, int beta, const SpectralPoint& point, const SystemParams& params);
Complex scalar_P(int alpha, int beta, const SpectralPoint& point, const SystemParams& params);
Complex scalar_Q(int alpha, int beta, const SpectralPoint& point, const SystemParams& params);
Complex scalar_T(int alpha, int beta, const SpectralPoint& point, const SystemParams& params);

/// A dense matrix on one sector, rows and columns indexed by sector rank.
struct AmplitudeBlock {
  Sector sector;
  Eigen::MatrixXcd entries;
};

/// Block of R_{beta alpha} on a two-letter sector: [S] for [i,i],
/// [[P, pT], [qT, Q]] on the order (ij, ji) for [i,j] with i < j.
AmplitudeBlock r_block(const Sector& sector, int beta, int alpha, const SpectralPoint& point,
                       const SystemParams& params);

/// Block of B: [1] or [[p, p], [q, q]].
AmplitudeBlock b_block(const Sector& sector, const SystemParams& params);

/// R_{beta alpha} recomputed as -[(p + q xa xb) I - xa B]^{-1} [(p + q xa xb) I - xb B].
AmplitudeBlock r_from_b(const Sector& sector, int beta, int alpha, const SpectralPoint& point,
                        const SystemParams& params);

/// Precomputed action of T_l = I x ... x R x ... x I on one sector.
///
/// For every rank k and position l the word's letters (w_l, w_{l+1}) are
/// classified (equal / ascending / descending) and the rank of the word with
/// those two letters exchanged is stored, so one application costs O(dim).
class SectorTransport {
 public:
  explicit SectorTransport(Sector sector);

  const Sector& sector() const { return sector_; }
  std::size_t dim() const { return sector_.dim(); }
  std::size_t word_length() const { return sector_.word_length(); }

  /// out = T_l v with the given pair scalars; l is 1-based, in [1, n-1].
  /// `in` and `out` must not alias.
  void apply(int l, const PairScalars& s, const SystemParams& params, std::span<const Complex> in,
             std::span<Complex> out) const;

  enum class Kind : std::uint8_t { Equal, Ascending, Descending };
  struct Link {
    std::uint32_t partner;
    Kind kind;
  };
  /// Per-rank links for position l (1-based).
  const std::vector<Link>& links(int l) const { return links_[static_cast<std::size_t>(l - 1)]; }

 private:
  Sector sector_;
  std::vector<std::vector<Link>> links_;  // [l - 1][rank]
};

/// A vector on one sector.
struct SectorVector {
  Sector sector;
  std::vector<Complex> values;
};

SectorVector basis_vector(const Sector& sector, const SpeciesWord& word);

/// T_l(beta, alpha) applied to `vec` (l is 1-based).
SectorVector apply_T_l(const SectorVector& vec, int l, int beta, int alpha, const SpectralPoint& point,
                       const SystemParams& params);

/// A_sigma e_nu along an explicit transposition path.
SectorVector amplitude_column(const TranspositionPath& path, const SpeciesWord& nu, const SpectralPoint& point,
                              const SystemParams& params);

/// A_sigma e_nu using the canonical decomposition of sigma.
SectorVector amplitude_column(const Permutation& sigma, const SpeciesWord& nu, const SpectralPoint& point,
                              const SystemParams& params,
                              DecompositionStrategy strategy = DecompositionStrategy::Bubble);

/// [A_sigma]_{pi, nu}; exactly zero when pi and nu are in different sectors.
Complex amplitude_element(const Permutation& sigma, const SpeciesWord& pi, const SpeciesWord& nu,
                          const SpectralPoint& point, const SystemParams& params);

/// Product of S_{beta alpha} over the inversions of sigma: A_sigma on a
/// single-species sector.
Complex scalar_amplitude(const Permutation& sigma, const SpectralPoint& point, const SystemParams& params);

/// Dense sector block of T_l(beta, alpha). Only for small sectors (dim <= 64).
Eigen::MatrixXcd transport_matrix(const SectorTransport& transport, int l, int beta, int alpha,
                                  const SpectralPoint& point, const SystemParams& params);

}  // namespace masep
