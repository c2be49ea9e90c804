#include "masep/quadrature.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <thread>

#include "masep/errors.hpp"

namespace masep {

double max_radius(const SystemParams& params) {
  if (!(params.p > 0.0 && params.p < 1.0)) {
    throw InputError("max_radius needs 0 < p < 1, got p = " + std::to_string(params.p));
  }
  const double p = params.p;
  const double q = params.q;
  return (-1.0 + std::sqrt(1.0 + 4.0 * p * q)) / (2.0 * q);
}

void ContourSpec::validate(const SystemParams& params) const {
  const double bound = max_radius(params);
  if (!(radius > 0.0 && radius < bound)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "contour radius %.10g is not admissible: need 0 < r < %.10g", radius, bound);
    throw InputError(buf);
  }
  if (nodes < 8 || nodes % 2 != 0) {
    throw InputError("node count must be even and at least 8, got " + std::to_string(nodes));
  }
}

ContourSpec ContourSpec::automatic(const SystemParams& params, int nodes) {
  return ContourSpec{kDefaultRadiusFraction * max_radius(params), nodes};
}

Complex node_power(double radius, int m, int nodes, int k) {
  // reduce m*k mod M in integers so large exponents keep full angular accuracy
  const long long reduced = ((static_cast<long long>(m) * k) % nodes + nodes) % nodes;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(reduced) / nodes;
  return std::polar(std::pow(radius, k), angle);
}

std::vector<ContourNode> contour_nodes(const ContourSpec& spec) {
  if (spec.nodes < 1 || spec.radius <= 0.0) throw InputError("contour needs a positive radius and node count");
  std::vector<ContourNode> out(static_cast<std::size_t>(spec.nodes));
  for (int m = 0; m < spec.nodes; ++m) {
    const Complex xi = node_power(spec.radius, m, spec.nodes, 1);
    out[static_cast<std::size_t>(m)] = {xi, xi / static_cast<double>(spec.nodes)};
  }
  return out;
}

int next_node_count(int nodes) {
  int next = nodes % 3 == 0 ? nodes / 3 * 4 : nodes + nodes / 2;
  if (next % 2 != 0) ++next;
  return next;
}

bool converged(Complex previous, Complex current, double tol_rel) {
  return std::abs(current - previous) <= tol_rel * std::max(1.0, std::abs(current));
}

Complex pairwise_sum(std::span<const Complex> values) {
  if (values.size() <= 8) {
    Complex s{};
    for (const Complex& v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Complex integrate_fixed(const EvaluatorFactory& factory, int dims, const ContourSpec& spec, int threads) {
  if (dims < 1 || dims > kMaxParticles) {
    throw InputError("integration dimension must be in 1.." + std::to_string(kMaxParticles));
  }
  const auto nodes = contour_nodes(spec);
  std::vector<Complex> xi(nodes.size());
  for (std::size_t m = 0; m < nodes.size(); ++m) xi[m] = nodes[m].xi;
  const GridEvaluator evaluate = factory(xi);

  const int M = spec.nodes;
  std::size_t slice_size = 1;
  for (int d = 1; d < dims; ++d) slice_size *= static_cast<std::size_t>(M);

  // One slice per value of the outermost index; slice sums are stored by
  // index and reduced in order, so the result does not depend on the worker count.
  std::vector<Complex> slice_sums(static_cast<std::size_t>(M));
  std::atomic<int> next{0};
  auto worker = [&]() {
    std::vector<Complex> buffer(slice_size);
    std::vector<int> idx(static_cast<std::size_t>(dims));
    for (int a = next++; a < M; a = next++) {
      std::fill(idx.begin(), idx.end(), 0);
      idx[0] = a;
      for (std::size_t s = 0; s < slice_size; ++s) {
        Complex w = 1.0;
        for (int d = 0; d < dims; ++d) w *= nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])].weight;
        buffer[s] = w * evaluate(idx);
        for (int d = dims - 1; d >= 1; --d) {
          if (++idx[static_cast<std::size_t>(d)] < M) break;
          idx[static_cast<std::size_t>(d)] = 0;
        }
      }
      slice_sums[static_cast<std::size_t>(a)] = pairwise_sum(buffer);
    }
  };
  const int n_workers = std::min(resolve_threads(threads), M);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return pairwise_sum(slice_sums);
}

QuadratureResult integrate(const EvaluatorFactory& factory, int dims, double radius, const QuadratureOptions& options) {
  if (options.initial_nodes < 8 || options.initial_nodes % 2 != 0) {
    throw InputError("initial node count must be even and at least 8");
  }
  int M = options.initial_nodes;
  Complex previous = integrate_fixed(factory, dims, ContourSpec{radius, M}, options.threads);
  Complex before = previous;
  while (next_node_count(M) <= options.max_nodes) {
    M = next_node_count(M);
    const Complex current = integrate_fixed(factory, dims, ContourSpec{radius, M}, options.threads);
    if (converged(previous, current, options.tol_rel)) {
      return QuadratureResult{current, std::abs(current - previous), M, radius};
    }
    before = previous;
    previous = current;
  }
  throw ConvergenceError("quadrature did not converge by M = " + std::to_string(M) + " (last change " +
                             std::to_string(std::abs(previous - before)) + ")",
                         std::abs(before), std::abs(previous), M);
}

QuadratureResult integrate(const std::function<Complex(std::span<const Complex>)>& f, int dims, double radius,
                           const QuadratureOptions& options) {
  EvaluatorFactory factory = [&f, dims](std::span<const Complex> nodes) -> GridEvaluator {
    std::vector<Complex> table(nodes.begin(), nodes.end());
    return [&f, dims, table = std::move(table)](std::span<const int> idx) {
      std::array<Complex, kMaxParticles> xi{};
      for (int d = 0; d < dims; ++d) xi[static_cast<std::size_t>(d)] = table[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
      return f(std::span<const Complex>(xi.data(), static_cast<std::size_t>(dims)));
    };
  };
  return integrate(factory, dims, radius, options);
}

}  // namespace masep
