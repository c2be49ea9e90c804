#include "masep/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "masep/errors.hpp"
#include "masep/quadrature.hpp"
#include "masep/transition.hpp"

namespace masep {

WindowedStateSpace::WindowedStateSpace(int lo, int hi, Sector sector) : lo_(lo), hi_(hi), sector_(std::move(sector)) {
  const int n = static_cast<int>(sector_.word_length());
  if (hi - lo + 1 < n) throw InputError("window is narrower than the particle count");
  positions_ = window_positions(n, lo, hi);
  for (std::size_t k = 0; k < positions_.size(); ++k) position_index_.emplace(positions_[k], k);
}

State WindowedStateSpace::state(std::size_t index) const {
  const std::size_t dim = sector_.dim();
  return State(positions_.at(index / dim), sector_.unrank(index % dim));
}

std::optional<std::size_t> WindowedStateSpace::index(const State& state) const {
  auto it = position_index_.find(state.positions);
  if (it == position_index_.end() || !sector_.contains(state.species)) return std::nullopt;
  return it->second * sector_.dim() + sector_.rank(state.species);
}

GeneratorMatrix build_generator(const WindowedStateSpace& space, const SystemParams& params) {
  const std::size_t n_states = space.size();
  const std::size_t n = space.particles();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n_states * (2 * n + 1));
  GeneratorMatrix gen;
  gen.exit_rates.assign(n_states, 0.0);

  for (std::size_t s = 0; s < n_states; ++s) {
    const State from = space.state(s);
    double outflow = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (const bool right : {true, false}) {
        const double rate = right ? params.p : params.q;
        const State to = apply_jump(from, i, right);
        if (to == from) continue;
        outflow += rate;
        if (auto k = space.index(to)) {
          triplets.emplace_back(static_cast<int>(s), static_cast<int>(*k), rate);
        } else {
          gen.exit_rates[s] += rate;
        }
      }
    }
    triplets.emplace_back(static_cast<int>(s), static_cast<int>(s), -outflow);
  }
  gen.rates.resize(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_states));
  gen.rates.setFromTriplets(triplets.begin(), triplets.end());
  return gen;
}

EvolveResult evolve(const WindowedStateSpace& space, const GeneratorMatrix& gen, const State& initial, double t) {
  if (t < 0.0 || !std::isfinite(t)) throw InputError("time must be finite and non-negative");
  const auto start = space.index(initial);
  if (!start) throw InputError("initial state " + initial.str() + " is not in the window");

  const auto n_states = static_cast<Eigen::Index>(space.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_states);
  v(static_cast<Eigen::Index>(*start)) = 1.0;
  EvolveResult out;
  if (t == 0.0) {
    out.probabilities = v;
    return out;
  }

  double lambda = 0.0;
  for (Eigen::Index s = 0; s < n_states; ++s) lambda = std::max(lambda, -gen.rates.coeff(s, s));
  if (lambda == 0.0) {
    out.probabilities = v;
    return out;
  }
  const double lt = lambda * t;
  if (lt > 600.0) throw InputError("uniformization rate times t is too large for this oracle");

  // row vector v^T (I + G / lambda)^k, weighted by Poisson(lambda t)
  Eigen::SparseMatrix<double, Eigen::ColMajor> step_t =
      (Eigen::SparseMatrix<double, Eigen::RowMajor>(gen.rates / lambda)).transpose();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_states);
  double weight = std::exp(-lt);
  double used = 0.0;
  int k = 0;
  while (true) {
    acc += weight * v;
    used += weight;
    if (1.0 - used < kUniformizationTolerance && k >= lt) break;
    ++k;
    if (k > 100000) throw NumericalError("uniformization did not terminate");
    Eigen::VectorXd moved = step_t * v;
    v += moved;
    weight *= lt / k;
  }
  out.probabilities = acc;
  out.leakage = std::max(0.0, 1.0 - acc.sum());
  out.terms = k + 1;
  return out;
}

State apply_jump(const State& state, std::size_t particle, bool right) {
  const std::size_t n = state.size();
  const int x = state.positions[particle];
  const int target = right ? x + 1 : x - 1;
  const std::size_t neighbour = right ? particle + 1 : particle - 1;  // wraps for particle 0, checked below
  const bool occupied = right ? (particle + 1 < n && state.positions[neighbour] == target)
                              : (particle > 0 && state.positions[neighbour] == target);
  if (!occupied) {
    State next = state;
    next.positions[particle] = target;
    return next;
  }
  if (state.species[neighbour] < state.species[particle]) {
    return State(state.positions, state.species.swapped(std::min(particle, neighbour)));
  }
  return state;
}

EmpiricalDistribution gillespie(const State& initial, double t, const SystemParams& params, std::size_t n_samples,
                                std::uint64_t seed, int threads) {
  if (n_samples < 1) throw InputError("need at least one sample");
  if (t < 0.0 || !std::isfinite(t)) throw InputError("time must be finite and non-negative");
  const std::size_t n = initial.size();
  const double total_rate = static_cast<double>(n);

  std::vector<State> finals(n_samples);
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 1024;
  auto worker = [&]() {
    for (std::size_t begin = next.fetch_add(kChunk); begin < n_samples; begin = next.fetch_add(kChunk)) {
      const std::size_t end = std::min(n_samples, begin + kChunk);
      for (std::size_t k = begin; k < end; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        std::mt19937_64 rng(seq);
        std::exponential_distribution<double> clock(total_rate);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::bernoulli_distribution go_right(params.p);
        State s = initial;
        double now = clock(rng);
        while (now <= t) {
          const std::size_t i = pick(rng);
          s = apply_jump(s, i, go_right(rng));
          now += clock(rng);
        }
        finals[k] = std::move(s);
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(n_samples / kChunk) + 1));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  EmpiricalDistribution out;
  out.samples = n_samples;
  for (const State& s : finals) out.frequencies[s] += 1.0;
  for (auto& [state, f] : out.frequencies) f /= static_cast<double>(n_samples);
  return out;
}

ComparisonReport compare(const std::map<State, double>& exact, const Eigen::VectorXd& oracle,
                         const WindowedStateSpace& space) {
  if (static_cast<std::size_t>(oracle.size()) != space.size()) throw InputError("oracle vector does not match the space");
  if (exact.size() != space.size()) {
    throw InputError("exact distribution has " + std::to_string(exact.size()) + " states, window has " +
                     std::to_string(space.size()));
  }
  ComparisonReport report;
  report.rows.reserve(space.size());
  double l1 = 0.0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    const State s = space.state(k);
    auto it = exact.find(s);
    if (it == exact.end()) throw InputError("state " + s.str() + " missing from the exact distribution");
    const double o = oracle(static_cast<Eigen::Index>(k));
    const double d = std::abs(it->second - o);
    report.rows.push_back({s, it->second, o, d});
    report.max_abs_diff = std::max(report.max_abs_diff, d);
    l1 += d;
  }
  report.tv_distance = 0.5 * l1;
  return report;
}

double total_variation(const std::map<State, double>& a, const std::map<State, double>& b) {
  double l1 = 0.0;
  for (const auto& [s, v] : a) {
    auto it = b.find(s);
    l1 += std::abs(v - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [s, v] : b) {
    if (!a.contains(s)) l1 += std::abs(v);
  }
  return 0.5 * l1;
}

}  // namespace masep
