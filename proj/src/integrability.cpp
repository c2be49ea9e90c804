#include "masep/integrability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "masep/errors.hpp"
#include "masep/quadrature.hpp"

namespace masep {

namespace {

struct Step {
  int l;
  int beta;
  int alpha;
};

// Applies steps in the given order (first element acts first).
std::vector<Complex> transport_sequence(const SectorTransport& transport, const std::vector<Step>& steps,
                                        const SpectralPoint& point, const SystemParams& params,
                                        std::vector<Complex> v) {
  std::vector<Complex> scratch(v.size());
  for (const Step& s : steps) {
    const PairScalars scalars = pair_scalars(point(s.alpha), point(s.beta), params, s.beta, s.alpha);
    transport.apply(s.l, scalars, params, v, scratch);
    v.swap(scratch);
  }
  return v;
}

// max_k |A e_k - B e_k|_inf over all basis vectors of the sector.
double relation_deviation(const SectorTransport& transport, const std::vector<Step>& lhs, const std::vector<Step>& rhs,
                          const SpectralPoint& point, const SystemParams& params) {
  double worst = 0.0;
  std::vector<Complex> e(transport.dim());
  for (std::size_t k = 0; k < transport.dim(); ++k) {
    std::fill(e.begin(), e.end(), Complex{});
    e[k] = 1.0;
    const auto a = transport_sequence(transport, lhs, point, params, e);
    const auto b = transport_sequence(transport, rhs, point, params, e);
    for (std::size_t r = 0; r < a.size(); ++r) worst = std::max(worst, std::abs(a[r] - b[r]));
  }
  return worst;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Keeps, for every (relation, sector, detail), the row of the worst point.
class WorstRowCollector {
 public:
  void add(VerificationRow row) {
    auto key = std::make_tuple(row.relation, row.sector, row.detail);
    auto it = index_.find(key);
    if (it == index_.end()) {
      index_.emplace(std::move(key), report_.rows.size());
      report_.rows.push_back(std::move(row));
    } else if (row.deviation > report_.rows[it->second].deviation) {
      report_.rows[it->second] = std::move(row);
    }
  }
  void add(const VerificationReport& rows, std::uint64_t seed) {
    for (VerificationRow row : rows.rows) {
      row.point_seed = seed;
      add(std::move(row));
    }
  }
  VerificationReport take() { return std::move(report_); }

 private:
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index_;
  VerificationReport report_;
};

// Regular points first, then the adversarial ones near the radius bound.
template <typename Fn>
void for_each_point(std::size_t n, const SystemParams& params, const IntegrabilitySuiteOptions& options, Fn&& fn) {
  for (int k = 0; k < options.points; ++k) {
    const auto index = static_cast<std::uint64_t>(k);
    fn(random_admissible_point(n, params, options.seed, index, 0.9), index);
  }
  if (options.adversarial_fraction > 0.0) {
    for (int k = 0; k < options.adversarial_points; ++k) {
      const auto index = 1000000u + static_cast<std::uint64_t>(k);
      fn(random_admissible_point(n, params, options.seed, index, options.adversarial_fraction), index);
    }
  }
}

}  // namespace

double VerificationReport::max_deviation() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.deviation);
  return m;
}

const VerificationRow* VerificationReport::worst() const {
  const VerificationRow* best = nullptr;
  for (const auto& r : rows) {
    if (best == nullptr || r.deviation > best->deviation) best = &r;
  }
  return best;
}

void VerificationReport::append(const VerificationReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

VerificationReport verify_inverse(int beta, int alpha, const SpectralPoint& point, const SystemParams& params,
                                  int alphabet) {
  VerificationReport report;
  const std::string detail = "beta=" + std::to_string(beta) + ",alpha=" + std::to_string(alpha);
  for (const Sector& sector : all_sectors(2, alphabet)) {
    const auto forward = r_block(sector, beta, alpha, point, params).entries;
    const auto backward = r_block(sector, alpha, beta, point, params).entries;
    const auto n = forward.rows();
    const double dev = max_abs(forward * backward - Eigen::MatrixXcd::Identity(n, n));
    report.rows.push_back({"inverse", sector.label(), detail, 0, dev});
  }
  return report;
}

VerificationReport verify_ybe(int gamma, int beta, int alpha, const SpectralPoint& point, const SystemParams& params,
                              const Sector& triple) {
  if (triple.word_length() != 3) throw InputError("Yang-Baxter check needs a three-letter sector");
  if (gamma == beta || gamma == alpha || beta == alpha) {
    throw InputError("Yang-Baxter check needs three distinct spectral indices");
  }
  const SectorTransport transport(triple);
  // operators listed in application order (rightmost factor first)
  const std::vector<Step> lhs{{1, beta, alpha}, {2, gamma, alpha}, {1, gamma, beta}};
  const std::vector<Step> rhs{{2, gamma, beta}, {1, gamma, alpha}, {2, beta, alpha}};
  const std::string detail =
      "gamma=" + std::to_string(gamma) + ",beta=" + std::to_string(beta) + ",alpha=" + std::to_string(alpha);
  return VerificationReport{{{"ybe", triple.label(), detail, 0, relation_deviation(transport, lhs, rhs, point, params)}}};
}

VerificationReport verify_braid(int i, int j, const SpectralPoint& point, const SystemParams& params, int word_length,
                                int alphabet) {
  if (i < 1 || j < 1 || i >= word_length || j >= word_length) {
    throw InputError("positions must lie in 1.." + std::to_string(word_length - 1));
  }
  if (point.size() < 4) throw InputError("braid checks use spectral indices 1..4");
  VerificationReport report;
  const std::string pos = "i=" + std::to_string(i) + ",j=" + std::to_string(j);
  for (const Sector& sector : all_sectors(word_length, alphabet)) {
    const SectorTransport transport(sector);
    if (std::abs(i - j) >= 2) {
      const std::vector<Step> lhs{{j, 4, 3}, {i, 2, 1}};
      const std::vector<Step> rhs{{i, 2, 1}, {j, 4, 3}};
      report.rows.push_back({"commute", sector.label(), pos, 0, relation_deviation(transport, lhs, rhs, point, params)});
    } else if (std::abs(i - j) == 1) {
      // T_i(g,b) T_j(g,a) T_i(b,a) = T_j(b,a) T_i(g,a) T_j(g,b) with (g,b,a) = (3,2,1)
      const std::vector<Step> lhs{{i, 2, 1}, {j, 3, 1}, {i, 3, 2}};
      const std::vector<Step> rhs{{j, 3, 2}, {i, 3, 1}, {j, 2, 1}};
      report.rows.push_back({"braid", sector.label(), pos, 0, relation_deviation(transport, lhs, rhs, point, params)});
    }
    std::vector<int> positions{i};
    if (j != i) positions.push_back(j);
    for (int l : positions) {
      const std::vector<Step> lhs{{l, 1, 2}, {l, 2, 1}};
      report.rows.push_back({"inverse_T", sector.label(), "l=" + std::to_string(l), 0,
                             relation_deviation(transport, lhs, {}, point, params)});
    }
  }
  return report;
}

SpectralPoint random_admissible_point(std::size_t n, const SystemParams& params, std::uint64_t seed,
                                      std::uint64_t index, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("radius fraction must lie in (0, 1)");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double r = fraction * max_radius(params);
  SpectralPoint point;
  point.xi.reserve(n);
  for (std::size_t k = 0; k < n; ++k) point.xi.push_back(std::polar(r, angle(rng)));
  return point;
}

VerificationReport run_inverse_suite(const SystemParams& params, const IntegrabilitySuiteOptions& options) {
  WorstRowCollector rows;
  for_each_point(3, params, options, [&](const SpectralPoint& point, std::uint64_t seed) {
    for (int beta = 1; beta <= 3; ++beta) {
      for (int alpha = 1; alpha <= 3; ++alpha) {
        rows.add(verify_inverse(beta, alpha, point, params, options.alphabet), seed);
      }
    }
  });
  return rows.take();
}

VerificationReport run_ybe_suite(const SystemParams& params, const IntegrabilitySuiteOptions& options) {
  WorstRowCollector rows;
  const auto sectors = all_sectors(3, options.alphabet);
  const auto orders = all_permutations(3);
  for_each_point(3, params, options, [&](const SpectralPoint& point, std::uint64_t seed) {
    for (const Sector& sector : sectors) {
      for (const Permutation& o : orders) {
        rows.add(verify_ybe(o(1), o(2), o(3), point, params, sector), seed);
      }
    }
  });
  return rows.take();
}

VerificationReport run_braid_suite(const SystemParams& params, const IntegrabilitySuiteOptions& options) {
  WorstRowCollector rows;
  for_each_point(4, params, options, [&](const SpectralPoint& point, std::uint64_t seed) {
    for (int n = 2; n <= options.max_word_length; ++n) {
      for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
          rows.add(verify_braid(i, j, point, params, n, options.alphabet), seed);
        }
      }
    }
  });
  return rows.take();
}

}  // namespace masep
