#include "masep/bethe_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "masep/errors.hpp"

namespace masep {

namespace {

void require_two_letter(const Sector& sector) {
  if (sector.word_length() != 2) {
    throw InputError("expected a two-letter sector, got [" + sector.label() + "]");
  }
}

void require_index(const SpectralPoint& point, int j) {
  if (j < 1 || j > static_cast<int>(point.size())) {
    throw InputError("spectral index " + std::to_string(j) + " outside 1.." + std::to_string(point.size()));
  }
}

}  // namespace

SystemParams SystemParams::from_p(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("p must lie strictly between 0 and 1, got " + std::to_string(p));
  }
  return SystemParams{p, 1.0 - p};
}

PairScalars pair_scalars(Complex xa, Complex xb, const SystemParams& params, int beta, int alpha) {
  const double p = params.p;
  const double q = params.q;
  const Complex base = p + q * xa * xb;
  const Complex denom = base - xa;
  if (std::abs(denom) <= kSingularityThreshold) {
    throw SingularityError("near-singular denominator for pair (beta=" + std::to_string(beta) +
                               ", alpha=" + std::to_string(alpha) + ")",
                           beta, alpha);
  }
  const Complex inv = 1.0 / denom;
  return PairScalars{
      -(base - xb) * inv,
      (p - q * xa) * (xb - 1.0) * inv,
      (p - q * xb) * (xa - 1.0) * inv,
      (xb - xa) * inv,
  };
}

Complex scalar_S(int alpha, int beta, const SpectralPoint& point, const SystemParams& params) {
  require_index(point, alpha);
  require_index(point, beta);
  return pair_scalars(point(alpha), point(beta), params, beta, alpha).S;
}

Complex scalar_P(int alpha, int beta, const SpectralPoint& point, const SystemParams& params) {
  require_index(point, alpha);
  require_index(point, beta);
  return pair_scalars(point(alpha), point(beta), params, beta, alpha).P;
}

Complex scalar_Q(int alpha, int beta, const SpectralPoint& point, const SystemParams& params) {
  require_index(point, alpha);
  require_index(point, beta);
  return pair_scalars(point(alpha), point(beta), params, beta, alpha).Q;
}

Complex scalar_T(int alpha, int beta, const SpectralPoint& point, const SystemParams& params) {
  require_index(point, alpha);
  require_index(point, beta);
  return pair_scalars(point(alpha), point(beta), params, beta, alpha).T;
}

AmplitudeBlock r_block(const Sector& sector, int beta, int alpha, const SpectralPoint& point,
                       const SystemParams& params) {
  require_two_letter(sector);
  require_index(point, alpha);
  require_index(point, beta);
  const PairScalars s = pair_scalars(point(alpha), point(beta), params, beta, alpha);
  AmplitudeBlock block{sector, Eigen::MatrixXcd(sector.dim(), sector.dim())};
  if (sector.dim() == 1) {
    block.entries(0, 0) = s.S;
  } else {
    block.entries << s.P, params.p * s.T, params.q * s.T, s.Q;
  }
  return block;
}

AmplitudeBlock b_block(const Sector& sector, const SystemParams& params) {
  require_two_letter(sector);
  AmplitudeBlock block{sector, Eigen::MatrixXcd(sector.dim(), sector.dim())};
  if (sector.dim() == 1) {
    block.entries(0, 0) = 1.0;
  } else {
    block.entries << params.p, params.p, params.q, params.q;
  }
  return block;
}

AmplitudeBlock r_from_b(const Sector& sector, int beta, int alpha, const SpectralPoint& point,
                        const SystemParams& params) {
  require_two_letter(sector);
  require_index(point, alpha);
  require_index(point, beta);
  const Complex xa = point(alpha);
  const Complex xb = point(beta);
  const Eigen::MatrixXcd b = b_block(sector, params).entries;
  const auto n = static_cast<Eigen::Index>(sector.dim());
  const Complex base = params.p + params.q * xa * xb;
  const Eigen::MatrixXcd lhs = base * Eigen::MatrixXcd::Identity(n, n) - xa * b;
  const Eigen::MatrixXcd rhs = base * Eigen::MatrixXcd::Identity(n, n) - xb * b;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(lhs);
  if (!lu.isInvertible() || std::abs(lu.determinant()) <= kSingularityThreshold) {
    throw SingularityError("singular direct-method system for pair (beta=" + std::to_string(beta) +
                               ", alpha=" + std::to_string(alpha) + ")",
                           beta, alpha);
  }
  return AmplitudeBlock{sector, -lu.solve(rhs)};
}

// ---------------------------------------------------------------------------
// SectorTransport

SectorTransport::SectorTransport(Sector sector) : sector_(std::move(sector)) {
  const std::size_t n = sector_.word_length();
  const std::size_t dim = sector_.dim();
  links_.assign(n > 0 ? n - 1 : 0, std::vector<Link>(dim));
  std::vector<int> letters = sector_.multiset();
  std::size_t k = 0;
  do {
    const SpeciesWord word(letters);
    for (std::size_t l = 0; l + 1 < n; ++l) {
      Link& link = links_[l][k];
      if (letters[l] == letters[l + 1]) {
        link = {static_cast<std::uint32_t>(k), Kind::Equal};
      } else {
        link.partner = static_cast<std::uint32_t>(sector_.rank(word.swapped(l)));
        link.kind = letters[l] < letters[l + 1] ? Kind::Ascending : Kind::Descending;
      }
    }
    ++k;
  } while (std::next_permutation(letters.begin(), letters.end()));
}

void SectorTransport::apply(int l, const PairScalars& s, const SystemParams& params, std::span<const Complex> in,
                            std::span<Complex> out) const {
  if (l < 1 || l >= static_cast<int>(word_length())) {
    throw InputError("tensor position " + std::to_string(l) + " outside 1.." + std::to_string(word_length() - 1));
  }
  const Complex pT = params.p * s.T;
  const Complex qT = params.q * s.T;
  const auto& links = links_[static_cast<std::size_t>(l - 1)];
  for (std::size_t k = 0; k < links.size(); ++k) {
    const Link link = links[k];
    switch (link.kind) {
      case Kind::Equal:
        out[k] = s.S * in[k];
        break;
      case Kind::Ascending:
        out[k] = s.P * in[k] + pT * in[link.partner];
        break;
      case Kind::Descending:
        out[k] = s.Q * in[k] + qT * in[link.partner];
        break;
    }
  }
}

SectorVector basis_vector(const Sector& sector, const SpeciesWord& word) {
  SectorVector v{sector, std::vector<Complex>(sector.dim(), Complex{})};
  v.values[sector.rank(word)] = 1.0;
  return v;
}

SectorVector apply_T_l(const SectorVector& vec, int l, int beta, int alpha, const SpectralPoint& point,
                       const SystemParams& params) {
  require_index(point, alpha);
  require_index(point, beta);
  const SectorTransport transport(vec.sector);
  const PairScalars s = pair_scalars(point(alpha), point(beta), params, beta, alpha);
  SectorVector out{vec.sector, std::vector<Complex>(vec.values.size())};
  transport.apply(l, s, params, vec.values, out.values);
  return out;
}

SectorVector amplitude_column(const TranspositionPath& path, const SpeciesWord& nu, const SpectralPoint& point,
                              const SystemParams& params) {
  if (static_cast<int>(nu.size()) != path.target().degree()) {
    throw InputError("species word length must equal the permutation degree");
  }
  if (point.size() < nu.size()) throw InputError("spectral point has fewer entries than particles");
  const Sector sector = sector_of(nu);
  SectorVector v = basis_vector(sector, nu);
  if (path.length() == 0) return v;
  const SectorTransport transport(sector);
  std::vector<Complex> scratch(sector.dim());
  for (std::size_t k = 0; k < path.length(); ++k) {
    const auto [beta, alpha] = path.pairs[k];
    const PairScalars s = pair_scalars(point(alpha), point(beta), params, beta, alpha);
    transport.apply(path.word[k], s, params, v.values, scratch);
    v.values.swap(scratch);
  }
  return v;
}

SectorVector amplitude_column(const Permutation& sigma, const SpeciesWord& nu, const SpectralPoint& point,
                              const SystemParams& params, DecompositionStrategy strategy) {
  return amplitude_column(decompose(sigma, strategy), nu, point, params);
}

Complex amplitude_element(const Permutation& sigma, const SpeciesWord& pi, const SpeciesWord& nu,
                          const SpectralPoint& point, const SystemParams& params) {
  if (pi.size() != nu.size()) throw InputError("pi and nu must have the same length");
  if (!pi.same_multiset(nu)) return Complex{};
  const Sector sector = sector_of(nu);
  if (sector.dim() == 1) return scalar_amplitude(sigma, point, params);
  const SectorVector column = amplitude_column(sigma, nu, point, params);
  return column.values[sector.rank(pi)];
}

Complex scalar_amplitude(const Permutation& sigma, const SpectralPoint& point, const SystemParams& params) {
  Complex prod = 1.0;
  for (const auto& [beta, alpha] : inversions(sigma)) {
    prod *= pair_scalars(point(alpha), point(beta), params, beta, alpha).S;
  }
  return prod;
}

Eigen::MatrixXcd transport_matrix(const SectorTransport& transport, int l, int beta, int alpha,
                                  const SpectralPoint& point, const SystemParams& params) {
  const std::size_t dim = transport.dim();
  if (dim > 64) throw InputError("dense sector blocks are limited to dim <= 64");
  const PairScalars s = pair_scalars(point(alpha), point(beta), params, beta, alpha);
  Eigen::MatrixXcd m(dim, dim);
  std::vector<Complex> e(dim), col(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    std::fill(e.begin(), e.end(), Complex{});
    e[c] = 1.0;
    transport.apply(l, s, params, e, col);
    for (std::size_t r = 0; r < dim; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
  }
  return m;
}

}  // namespace masep
