#include <doctest.h>

#include <cmath>

#include "masep/bethe_core.hpp"
#include "masep/errors.hpp"
#include "reference.hpp"

using namespace masep;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

SpectralPoint point_of(const std::vector<Complex>& xi) { return SpectralPoint{xi}; }

// Sector block of a dense operator on (C^K)^n.
Eigen::MatrixXcd restrict(const Eigen::MatrixXcd& dense, const Sector& s, int K) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(s.dim()), static_cast<Eigen::Index>(s.dim()));
  for (std::size_t r = 0; r < s.dim(); ++r) {
    const SpeciesWord wr = s.unrank(r);
    const auto lr = wr.letters();
    for (std::size_t c = 0; c < s.dim(); ++c) {
      const SpeciesWord wc = s.unrank(c);
      const auto lc = wc.letters();
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          dense(ref::word_index({lr.begin(), lr.end()}, K), ref::word_index({lc.begin(), lc.end()}, K));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("S at a hand-computed point") {
  const auto params = SystemParams::from_p(0.5);
  const SpectralPoint pt = point_of({0.1, 0.2});
  CHECK(std::abs(scalar_S(1, 2, pt, params) - Complex(-0.31 / 0.41)) < 1e-15);
}

TEST_CASE("scalars match the reference and satisfy S = P + qT = Q + pT") {
  for (double p : {0.3, 0.5, 0.8}) {
    const auto params = SystemParams::from_p(p);
    const auto xi = ref::random_circle_points(2, 0.9 * ref::admissible_radius(p), 11);
    const PairScalars s = pair_scalars(xi[0], xi[1], params);
    const ref::Scalars r = ref::scalars(xi[0], xi[1], p);
    CHECK(std::abs(s.S - r.S) < 1e-14);
    CHECK(std::abs(s.P - r.P) < 1e-14);
    CHECK(std::abs(s.Q - r.Q) < 1e-14);
    CHECK(std::abs(s.T - r.T) < 1e-14);
    CHECK(std::abs(s.S - (s.P + params.q * s.T)) < 1e-13);
    CHECK(std::abs(s.S - (s.Q + params.p * s.T)) < 1e-13);
  }
}

TEST_CASE("pole is reported with its indices") {
  const auto params = SystemParams::from_p(0.5);
  // p + q a b - a = 0 at a = 1, b = 1
  try {
    pair_scalars(1.0, 1.0, params, 2, 1);
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.beta() == 2);
    CHECK(e.alpha() == 1);
  }
  CHECK_THROWS_AS(SystemParams::from_p(1.0), InputError);
  CHECK_THROWS_AS(SystemParams::from_p(0.0), InputError);
}

TEST_CASE("r_block, r_from_b and the dense R agree") {
  const auto params = SystemParams::from_p(0.7);
  const auto xi = ref::random_circle_points(2, 0.8 * ref::admissible_radius(0.7), 3);
  const SpectralPoint pt = point_of(xi);
  const Eigen::MatrixXcd dense = ref::dense_r(3, xi[0], xi[1], 0.7);  // R_{21}
  for (const Sector& s : all_sectors(2, 3)) {
    const auto blk = r_block(s, 2, 1, pt, params);
    CHECK(max_abs(blk.entries - r_from_b(s, 2, 1, pt, params).entries) < 1e-12);
    CHECK(max_abs(blk.entries - restrict(dense, s, 3)) < 1e-14);
  }
  const Sector s12(std::vector<int>{1, 2});
  const auto b = b_block(s12, params);
  CHECK(std::abs(b.entries(0, 0) - 0.7) < 1e-15);
  CHECK(std::abs(b.entries(1, 1) - 0.3) < 1e-15);
}

TEST_CASE("T_1 e12 and T_2 e123") {
  const auto params = SystemParams::from_p(0.6);
  const auto xi = ref::random_circle_points(3, 0.5, 5);
  const SpectralPoint pt = point_of(xi);
  {
    const Sector s = sector_of(SpeciesWord::parse("12"));
    const auto out = apply_T_l(basis_vector(s, SpeciesWord::parse("12")), 1, 2, 1, pt, params);
    const PairScalars sc = pair_scalars(xi[0], xi[1], params);
    CHECK(std::abs(out.values[s.rank(SpeciesWord::parse("12"))] - sc.P) < 1e-15);
    CHECK(std::abs(out.values[s.rank(SpeciesWord::parse("21"))] - params.q * sc.T) < 1e-15);
  }
  {
    const Sector s = sector_of(SpeciesWord::parse("123"));
    const auto out = apply_T_l(basis_vector(s, SpeciesWord::parse("123")), 2, 3, 2, pt, params);
    const PairScalars sc = pair_scalars(xi[1], xi[2], params);
    for (std::size_t k = 0; k < s.dim(); ++k) {
      const std::string w = s.unrank(k).str();
      const Complex want = w == "123" ? sc.P : w == "132" ? params.q * sc.T : Complex(0.0);
      CHECK(std::abs(out.values[k] - want) < 1e-15);
    }
  }
}

TEST_CASE("transport matrices are sector blocks of the Kronecker T_l") {
  const double p = 0.45;
  const auto params = SystemParams::from_p(p);
  const auto xi = ref::random_circle_points(4, 0.9 * ref::admissible_radius(p), 17);
  const SpectralPoint pt = point_of(xi);
  for (const Sector& s : all_sectors(4, 3)) {
    const SectorTransport tr(s);
    for (int l = 1; l <= 3; ++l) {
      const Eigen::MatrixXcd dense = ref::dense_T(l, 4, 3, ref::dense_r(3, xi[1], xi[3], p));
      CHECK(max_abs(transport_matrix(tr, l, 4, 2, pt, params) - restrict(dense, s, 3)) < 1e-14);
    }
  }
}

TEST_CASE("amplitude columns match the dense product for every reduced word") {
  const double p = 0.7;
  const auto params = SystemParams::from_p(p);
  const auto xi = ref::random_circle_points(4, 0.9 * ref::admissible_radius(p), 23);
  const SpectralPoint pt = point_of(xi);
  const std::vector<std::string> sectors = {"1234", "1123", "1122", "1112"};
  for (const Permutation& sigma : all_permutations(4)) {
    const std::vector<int> one_line(sigma.images().begin(), sigma.images().end());
    const auto words = ref::reduced_words(one_line);
    const Eigen::MatrixXcd dense = ref::dense_A(words.front(), 4, 4, xi, p);
    for (const auto& label : sectors) {
      const Sector s = sector_of(SpeciesWord::parse(label));
      const Eigen::MatrixXcd block = restrict(dense, s, 4);
      for (std::size_t c = 0; c < s.dim(); ++c) {
        const auto col = amplitude_column(sigma, s.unrank(c), pt, params, DecompositionStrategy::ReverseBubble);
        for (std::size_t r = 0; r < s.dim(); ++r) {
          CHECK(std::abs(col.values[r] - block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) <
                1e-12);
        }
      }
    }
    // the reference itself is independent of the word
    for (const auto& w : words) CHECK(max_abs(ref::dense_A(w, 4, 4, xi, p) - dense) < 1e-12);
  }
}

TEST_CASE("one more transposition is one more T_i") {
  const auto params = SystemParams::from_p(0.5);
  const SpectralPoint pt = point_of(ref::random_circle_points(4, 0.3, 29));
  const SpeciesWord nu = SpeciesWord::parse("2131");
  for (const Permutation& sigma : all_permutations(4)) {
    for (int i = 1; i < 4; ++i) {
      if (sigma(i) > sigma(i + 1)) continue;  // only length-increasing steps
      const auto before = amplitude_column(sigma, nu, pt, params);
      const auto after = amplitude_column(sigma.transposed(i), nu, pt, params);
      const auto step = apply_T_l(before, i, sigma(i + 1), sigma(i), pt, params);
      for (std::size_t k = 0; k < after.values.size(); ++k) CHECK(std::abs(after.values[k] - step.values[k]) < 1e-13);
    }
  }
}

TEST_CASE("amplitude elements across sectors vanish; single species is the inversion product") {
  const auto params = SystemParams::from_p(0.5);
  const auto xi = ref::random_circle_points(3, 0.4, 31);
  const SpectralPoint pt = point_of(xi);
  const Permutation sigma = Permutation::parse("321");
  CHECK(amplitude_element(sigma, SpeciesWord::parse("112"), SpeciesWord::parse("123"), pt, params) == Complex(0.0));
  Complex prod = 1.0;
  for (int i = 1; i <= 3; ++i) {
    for (int j = i + 1; j <= 3; ++j) {
      if (sigma(i) > sigma(j)) prod *= ref::scalars(xi[static_cast<std::size_t>(sigma(j) - 1)],
                                                    xi[static_cast<std::size_t>(sigma(i) - 1)], 0.5)
                                           .S;
    }
  }
  CHECK(std::abs(scalar_amplitude(sigma, pt, params) - prod) < 1e-14);
  CHECK(std::abs(amplitude_element(sigma, SpeciesWord::parse("111"), SpeciesWord::parse("111"), pt, params) - prod) <
        1e-14);
}
