#include "masep/transition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "masep/errors.hpp"

namespace masep {

namespace {

using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

// Largest outer slice (complex entries) the engine will allocate.
constexpr std::size_t kMaxSliceEntries = std::size_t{1} << 25;
// Outer index ranges are reduced block by block in this fixed order.
constexpr int kReductionBlocks = 8;

// One sigma term after relabelling: factor g_{sigma(i)} sits on axis i and
// the step (beta, alpha) reads xi_alpha, xi_beta from the axes sigma^{-1}(alpha),
// sigma^{-1}(beta).
struct TermPlan {
  struct Step {
    int l;
    int axis_alpha;
    int axis_beta;
  };
  Permutation sigma;
  std::vector<int> g_row;
  std::vector<Step> steps;
};

std::vector<TermPlan> plan_terms(int n) {
  std::vector<TermPlan> plans;
  for (const Permutation& sigma : all_permutations(n)) {
    const TranspositionPath path = decompose(sigma);
    const Permutation inv = sigma.inverse();
    TermPlan plan{sigma, {}, {}};
    for (int i = 1; i <= n; ++i) plan.g_row.push_back(sigma(i) - 1);
    for (std::size_t k = 0; k < path.length(); ++k) {
      plan.steps.push_back({path.word[k], inv(path.pairs[k].alpha) - 1, inv(path.pairs[k].beta) - 1});
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

void validate_request(const GridRequest& req) {
  const auto n = req.y.size();
  if (n < 1 || n > static_cast<std::size_t>(kMaxParticles)) {
    throw InputError("particle count must be in 1.." + std::to_string(kMaxParticles));
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (req.y[i] <= req.y[i - 1]) throw InputError("initial positions must be strictly increasing");
  }
  if (req.time < 0.0 || !std::isfinite(req.time)) throw InputError("time must be finite and non-negative");
  if (req.targets.empty()) throw InputError("no target positions requested");
  for (const auto& x : req.targets) {
    if (x.size() != n) throw InputError("target and initial positions have different lengths");
  }
  if (!req.scalar) {
    if (req.sector.word_length() != n) throw InputError("sector word length does not match the particle count");
    if (req.columns.empty()) throw InputError("no initial species words requested");
    for (const auto& nu : req.columns) {
      if (!req.sector.contains(nu)) throw InputError("species word " + nu.str() + " is not in the sector");
    }
  }
}

std::size_t slice_entries(const GridRequest& req, int nodes) {
  const std::size_t dim = req.scalar ? 1 : req.sector.dim();
  const std::size_t cols = req.scalar ? 1 : req.columns.size();
  std::size_t terms = 1;
  if (req.split_terms) {
    for (std::size_t k = 2; k <= req.y.size(); ++k) terms *= k;
  }
  std::size_t size = dim * cols * terms;
  for (std::size_t i = 1; i < req.y.size(); ++i) size *= static_cast<std::size_t>(nodes);
  return size;
}

Complex eps(Complex xi, const SystemParams& params) { return params.p / xi + params.q * xi - 1.0; }

// Rounding level of the grid sum for one target: every term carries
// |prod xi^{x_i - y_sigma(i) - 1}| = r^{sum x - sum y - N} and |e^{t eps}| <= e^{t (p/r + qr - 1)}.
// Far to the left of Y at small admissible radii this exceeds tol_rel, and
// successive node counts can then only agree to this level.
double rounding_floor(const GridRequest& req, std::size_t target, double radius) {
  long shift = 0;
  for (std::size_t i = 0; i < req.y.size(); ++i) shift += req.targets[target][i] - req.y[i];
  const double n = static_cast<double>(req.y.size());
  const double growth = std::max(0.0, req.params.p / radius + req.params.q * radius - 1.0);
  return std::numeric_limits<double>::epsilon() *
         std::exp(static_cast<double>(shift) * std::log(radius) + n * req.time * growth);
}

// `allowance` widens kProbabilityTolerance to the target's rounding floor.
double finalize_probability(Complex v, const char* what, double allowance) {
  const double tol = std::max(kProbabilityTolerance, allowance);
  if (std::abs(v.imag()) > tol) {
    throw NumericalError(std::string(what) + " has imaginary part " + std::to_string(v.imag()));
  }
  const double re = v.real();
  if (re < -tol || re > 1.0 + tol) {
    throw NumericalError(std::string(what) + " = " + std::to_string(re) + " lies outside [0, 1]");
  }
  return std::clamp(re, 0.0, 1.0);
}

// Split real/imaginary arrays over the lanes of one grid row.
struct Lanes {
  std::vector<double> re;
  std::vector<double> im;

  void resize(std::size_t n) {
    re.assign(n, 0.0);
    im.assign(n, 0.0);
  }
};

// Pair scalars of one step, per lane (pT, qT premultiplied).
struct StepCoefficients {
  Lanes S, P, Q, pT, qT;
};

struct FillContext {
  int n = 0;
  int M = 0;
  std::size_t lanes = 1;
  int lane_axis = -1;  // last axis, or -1 for a single particle
  std::size_t inner = 1;
  std::size_t dim = 1;
  std::size_t n_cols = 1;
  std::size_t n_terms = 1;
  bool scalar = false;
  SystemParams params;
  const std::vector<Complex>* g = nullptr;
  const std::vector<PairScalars>* pair = nullptr;
  const std::vector<TermPlan>* plans = nullptr;
  const SectorTransport* transport = nullptr;
  const std::vector<std::size_t>* column_rank = nullptr;
};

// Evaluates the relabelled integrand of every output along one row of the
// grid: all axes but the last are fixed, the last runs over its M nodes.
class RowFiller {
 public:
  explicit RowFiller(const FillContext& ctx) : ctx_(ctx) {
    std::size_t max_steps = 0;
    for (const auto& plan : *ctx.plans) max_steps = std::max(max_steps, plan.steps.size());
    coef_.resize(max_steps);
    for (auto& c : coef_) {
      for (Lanes* l : {&c.S, &c.P, &c.Q, &c.pT, &c.qT}) l->resize(ctx.lanes);
    }
    gprod_.resize(ctx.lanes);
    amp_.resize(ctx.lanes);
    v_.resize(ctx.dim);
    w_.resize(ctx.dim);
    for (std::size_t k = 0; k < ctx.dim; ++k) {
      v_[k].resize(ctx.lanes);
      w_[k].resize(ctx.lanes);
    }
  }

  // buf[b * inner + offset + lane] = integrand of output b.
  void fill(const std::vector<int>& mp, Complex* buf, std::size_t offset) {
    const std::size_t L = ctx_.lanes;
    const std::size_t B = ctx_.n_cols * ctx_.dim * ctx_.n_terms;
    const auto Mz = static_cast<std::size_t>(ctx_.M);
    for (std::size_t b = 0; b < B; ++b) std::fill_n(buf + b * ctx_.inner + offset, L, Complex{});

    const auto& plans = *ctx_.plans;
    for (std::size_t tau = 0; tau < plans.size(); ++tau) {
      const TermPlan& plan = plans[tau];
      const std::size_t term = ctx_.n_terms > 1 ? tau : 0;

      Complex fixed = 1.0;
      for (int i = 0; i < ctx_.n; ++i) {
        if (i == ctx_.lane_axis) continue;
        fixed *= (*ctx_.g)[static_cast<std::size_t>(plan.g_row[static_cast<std::size_t>(i)]) * Mz +
                           static_cast<std::size_t>(mp[static_cast<std::size_t>(i)])];
      }
      if (ctx_.lane_axis < 0) {
        gprod_.re[0] = fixed.real();
        gprod_.im[0] = fixed.imag();
      } else {
        const Complex* row = ctx_.g->data() +
                             static_cast<std::size_t>(plan.g_row[static_cast<std::size_t>(ctx_.lane_axis)]) * Mz;
        for (std::size_t l = 0; l < L; ++l) {
          const Complex v = fixed * row[l];
          gprod_.re[l] = v.real();
          gprod_.im[l] = v.imag();
        }
      }

      for (std::size_t k = 0; k < plan.steps.size(); ++k) load_step(plan.steps[k], mp, coef_[k]);

      if (ctx_.scalar) {
        amp_ = gprod_;
        for (std::size_t k = 0; k < plan.steps.size(); ++k) mul_assign(amp_, coef_[k].S);
        Complex* dst = buf + term * ctx_.inner + offset;
        for (std::size_t l = 0; l < L; ++l) dst[l] += Complex(amp_.re[l], amp_.im[l]);
        continue;
      }
      for (std::size_t c = 0; c < ctx_.n_cols; ++c) {
        for (std::size_t k = 0; k < ctx_.dim; ++k) {
          std::fill(v_[k].re.begin(), v_[k].re.end(), 0.0);
          std::fill(v_[k].im.begin(), v_[k].im.end(), 0.0);
        }
        std::fill(v_[(*ctx_.column_rank)[c]].re.begin(), v_[(*ctx_.column_rank)[c]].re.end(), 1.0);
        for (std::size_t k = 0; k < plan.steps.size(); ++k) {
          apply(plan.steps[k].l, coef_[k]);
          v_.swap(w_);
        }
        for (std::size_t k = 0; k < ctx_.dim; ++k) {
          Complex* dst = buf + ((c * ctx_.dim + k) * ctx_.n_terms + term) * ctx_.inner + offset;
          const double* vr = v_[k].re.data();
          const double* vi = v_[k].im.data();
          for (std::size_t l = 0; l < L; ++l) {
            dst[l] += Complex(gprod_.re[l] * vr[l] - gprod_.im[l] * vi[l], gprod_.re[l] * vi[l] + gprod_.im[l] * vr[l]);
          }
        }
      }
    }
  }

 private:
  void load_step(const TermPlan::Step& st, const std::vector<int>& mp, StepCoefficients& c) const {
    const auto Mz = static_cast<std::size_t>(ctx_.M);
    const bool alpha_lane = st.axis_alpha == ctx_.lane_axis;
    const bool beta_lane = st.axis_beta == ctx_.lane_axis;
    const auto ia = static_cast<std::size_t>(mp[static_cast<std::size_t>(st.axis_alpha)]);
    const auto ib = static_cast<std::size_t>(mp[static_cast<std::size_t>(st.axis_beta)]);
    for (std::size_t l = 0; l < ctx_.lanes; ++l) {
      const PairScalars& ps = (*ctx_.pair)[(alpha_lane ? l : ia) * Mz + (beta_lane ? l : ib)];
      const Complex pT = ctx_.params.p * ps.T;
      const Complex qT = ctx_.params.q * ps.T;
      c.S.re[l] = ps.S.real();
      c.S.im[l] = ps.S.imag();
      c.P.re[l] = ps.P.real();
      c.P.im[l] = ps.P.imag();
      c.Q.re[l] = ps.Q.real();
      c.Q.im[l] = ps.Q.imag();
      c.pT.re[l] = pT.real();
      c.pT.im[l] = pT.imag();
      c.qT.re[l] = qT.real();
      c.qT.im[l] = qT.imag();
    }
  }

  static void mul_assign(Lanes& x, const Lanes& y) {
    for (std::size_t l = 0; l < x.re.size(); ++l) {
      const double r = x.re[l] * y.re[l] - x.im[l] * y.im[l];
      const double i = x.re[l] * y.im[l] + x.im[l] * y.re[l];
      x.re[l] = r;
      x.im[l] = i;
    }
  }

  // w = T_l v, lane by lane.
  void apply(int l, const StepCoefficients& c) {
    const auto& links = ctx_.transport->links(l);
    const std::size_t L = ctx_.lanes;
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto& link = links[k];
      double* __restrict or_ = w_[k].re.data();
      double* __restrict oi = w_[k].im.data();
      const double* ar = v_[k].re.data();
      const double* ai = v_[k].im.data();
      if (link.kind == SectorTransport::Kind::Equal) {
        const double* sr = c.S.re.data();
        const double* si = c.S.im.data();
        for (std::size_t j = 0; j < L; ++j) {
          or_[j] = sr[j] * ar[j] - si[j] * ai[j];
          oi[j] = sr[j] * ai[j] + si[j] * ar[j];
        }
        continue;
      }
      const bool asc = link.kind == SectorTransport::Kind::Ascending;
      const Lanes& diag = asc ? c.P : c.Q;
      const Lanes& off = asc ? c.pT : c.qT;
      const double* dr = diag.re.data();
      const double* di = diag.im.data();
      const double* fr = off.re.data();
      const double* fi = off.im.data();
      const double* br = v_[link.partner].re.data();
      const double* bi = v_[link.partner].im.data();
      for (std::size_t j = 0; j < L; ++j) {
        or_[j] = dr[j] * ar[j] - di[j] * ai[j] + fr[j] * br[j] - fi[j] * bi[j];
        oi[j] = dr[j] * ai[j] + di[j] * ar[j] + fr[j] * bi[j] + fi[j] * br[j];
      }
    }
  }

  FillContext ctx_;
  std::vector<StepCoefficients> coef_;
  Lanes gprod_;
  Lanes amp_;
  std::vector<Lanes> v_;
  std::vector<Lanes> w_;
};

}  // namespace

double TransitionOptions::resolve_radius(const SystemParams& params) const {
  if (!radius) return kDefaultRadiusFraction * max_radius(params);
  ContourSpec{*radius, 8}.validate(params);
  return *radius;
}

Complex GridValues::at(std::size_t target, std::size_t column, std::size_t rank, std::size_t term) const {
  return values[((target * n_columns + column) * dim + rank) * n_terms + term];
}

Complex GridValues::total(std::size_t target, std::size_t column, std::size_t rank) const {
  Complex s{};
  for (std::size_t k = 0; k < n_terms; ++k) s += at(target, column, rank, k);
  return s;
}

GridValues evaluate_grid_fixed(const GridRequest& req, const ContourSpec& contour, int threads) {
  validate_request(req);
  contour.validate(req.params);
  const int n = static_cast<int>(req.y.size());
  const int M = contour.nodes;
  const double r = contour.radius;
  const SystemParams& params = req.params;
  const auto Mz = static_cast<std::size_t>(M);

  std::vector<Complex> z(Mz);
  for (int m = 0; m < M; ++m) z[static_cast<std::size_t>(m)] = node_power(r, m, M, 1);

  // g_j(m) = z^{-y_j - 1} (z / M) e^{eps(z) t}
  std::vector<Complex> g(static_cast<std::size_t>(n) * Mz);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < M; ++m) {
      const auto mm = static_cast<std::size_t>(m);
      g[static_cast<std::size_t>(j) * Mz + mm] = node_power(r, m, M, -req.y[static_cast<std::size_t>(j)]) /
                                                 static_cast<double>(M) * std::exp(req.time * eps(z[mm], params));
    }
  }

  // pair[a * M + b]: scalars with xi_alpha = z_a, xi_beta = z_b
  std::vector<PairScalars> pair(Mz * Mz);
  for (std::size_t a = 0; a < Mz; ++a) {
    for (std::size_t b = 0; b < Mz; ++b) pair[a * Mz + b] = pair_scalars(z[a], z[b], params);
  }

  // distinct target coordinates per axis and their monomial tables
  std::vector<std::vector<int>> axis_values(static_cast<std::size_t>(n));
  for (const auto& x : req.targets) {
    for (int i = 0; i < n; ++i) axis_values[static_cast<std::size_t>(i)].push_back(x[static_cast<std::size_t>(i)]);
  }
  std::vector<ColMat> omega(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& u = axis_values[static_cast<std::size_t>(i)];
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    ColMat& om = omega[static_cast<std::size_t>(i)];
    om.resize(M, static_cast<Eigen::Index>(u.size()));
    for (int m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < u.size(); ++k) om(m, static_cast<Eigen::Index>(k)) = node_power(r, m, M, u[k]);
    }
  }

  const std::vector<TermPlan> plans = plan_terms(n);
  const std::size_t dim = req.scalar ? 1 : req.sector.dim();
  const std::size_t n_cols = req.scalar ? 1 : req.columns.size();
  const std::size_t n_terms = req.split_terms ? plans.size() : 1;
  const std::size_t B = n_cols * dim * n_terms;

  std::size_t inner = 1;
  for (int i = 1; i < n; ++i) inner *= Mz;
  if (B * inner > kMaxSliceEntries) {
    throw InputError("grid of " + std::to_string(M) + " nodes per axis is too large for " + std::to_string(n) +
                     " particles with " + std::to_string(B) + " outputs");
  }
  // buffer size: largest intermediate of the axis-by-axis contraction
  std::size_t buffer_size = B * inner;
  std::size_t q_size = B;  // entries of a contracted slice (W_1..W_{n-1}, B)
  {
    std::size_t total = B * inner;
    for (int i = n - 1; i >= 1; --i) {
      total = total / Mz * axis_values[static_cast<std::size_t>(i)].size();
      buffer_size = std::max(buffer_size, total);
      q_size *= axis_values[static_cast<std::size_t>(i)].size();
    }
  }
  const std::size_t w0 = axis_values[0].size();

  std::optional<SectorTransport> transport;
  std::vector<std::size_t> column_rank;
  if (!req.scalar) {
    transport.emplace(req.sector);
    for (const auto& nu : req.columns) column_rank.push_back(req.sector.rank(nu));
  }

  // With real data the slices a and M - a are complex conjugates, so only
  // a in [0, M/2] is visited and the interior slices count twice.
  const int a_count = req.conjugate_symmetry ? M / 2 + 1 : M;
  const int n_blocks = std::min(kReductionBlocks, a_count);
  std::vector<std::vector<Complex>> block_acc(static_cast<std::size_t>(n_blocks));
  std::atomic<int> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  FillContext ctx;
  ctx.n = n;
  ctx.M = M;
  ctx.lanes = n >= 2 ? Mz : 1;
  ctx.lane_axis = n >= 2 ? n - 1 : -1;
  ctx.inner = inner;
  ctx.dim = dim;
  ctx.n_cols = n_cols;
  ctx.n_terms = n_terms;
  ctx.scalar = req.scalar;
  ctx.params = params;
  ctx.g = &g;
  ctx.pair = &pair;
  ctx.plans = &plans;
  ctx.transport = transport ? &*transport : nullptr;
  ctx.column_rank = &column_rank;
  const std::size_t rows_per_slice = inner / ctx.lanes;

  auto worker = [&]() {
    try {
      std::vector<Complex> buf_a(buffer_size);
      std::vector<Complex> buf_b(buffer_size);
      RowFiller filler(ctx);
      std::vector<int> mp(static_cast<std::size_t>(n));
      for (int blk = next_block++; blk < n_blocks; blk = next_block++) {
        std::vector<Complex> acc(w0 * q_size);
        const int a_begin = blk * a_count / n_blocks;
        const int a_end = (blk + 1) * a_count / n_blocks;
        for (int a = a_begin; a < a_end; ++a) {
          std::fill(mp.begin(), mp.end(), 0);
          mp[0] = a;
          for (std::size_t row = 0; row < rows_per_slice; ++row) {
            filler.fill(mp, buf_a.data(), row * ctx.lanes);
            for (int i = n - 2; i >= 1; --i) {
              if (++mp[static_cast<std::size_t>(i)] < M) break;
              mp[static_cast<std::size_t>(i)] = 0;
            }
          }

          // contract inner axes last to first; each GEMM moves the new axis to the front
          Complex* cur = buf_a.data();
          std::size_t total = B * inner;
          for (int i = n - 1; i >= 1; --i) {
            const auto rows = static_cast<Eigen::Index>(total / Mz);
            const ColMat& om = omega[static_cast<std::size_t>(i)];
            Complex* out = (cur == buf_a.data()) ? buf_b.data() : buf_a.data();
            Eigen::Map<const RowMat> in_map(cur, rows, M);
            Eigen::Map<ColMat> out_map(out, rows, om.cols());
            out_map.noalias() = in_map * om;
            total = static_cast<std::size_t>(rows) * static_cast<std::size_t>(om.cols());
            cur = out;
          }
          for (std::size_t k0 = 0; k0 < w0; ++k0) {
            const double weight = req.conjugate_symmetry && a != 0 && 2 * a != M ? 2.0 : 1.0;
            const Complex f = weight * omega[0](a, static_cast<Eigen::Index>(k0));
            Complex* dst = acc.data() + k0 * q_size;
            for (std::size_t q = 0; q < q_size; ++q) dst[q] += f * cur[q];
          }
        }
        block_acc[static_cast<std::size_t>(blk)] = std::move(acc);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_block = n_blocks;
    }
  };

  const int n_workers = std::min(resolve_threads(threads), n_blocks);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n_workers; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Complex> acc(w0 * q_size);
  for (const auto& part : block_acc) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += part[k];
  }
  if (req.conjugate_symmetry) {
    for (auto& v : acc) v = v.real();
  }

  GridValues out;
  out.n_targets = req.targets.size();
  out.n_columns = n_cols;
  out.dim = dim;
  out.n_terms = n_terms;
  if (req.split_terms) {
    for (const auto& plan : plans) out.sigmas.push_back(plan.sigma);
  }
  out.nodes = M;
  out.radius = r;
  out.rounding.resize(req.targets.size());
  for (std::size_t t = 0; t < req.targets.size(); ++t) out.rounding[t] = rounding_floor(req, t, r);
  out.values.resize(out.n_targets * B);
  for (std::size_t t = 0; t < req.targets.size(); ++t) {
    std::size_t offset = 0;
    for (int i = 0; i < n; ++i) {
      const auto& u = axis_values[static_cast<std::size_t>(i)];
      const auto k = static_cast<std::size_t>(
          std::lower_bound(u.begin(), u.end(), req.targets[t][static_cast<std::size_t>(i)]) - u.begin());
      offset = offset * u.size() + k;
    }
    std::copy_n(acc.begin() + static_cast<std::ptrdiff_t>(offset * B), B,
                out.values.begin() + static_cast<std::ptrdiff_t>(t * B));
  }
  return out;
}

namespace {

GridValues evaluate_grid_direct(const GridRequest& request, double radius, const QuadratureOptions& options) {
  if (options.initial_nodes < 8 || options.initial_nodes % 2 != 0) {
    throw InputError("initial node count must be even and at least 8");
  }
  int M = options.initial_nodes;
  GridValues previous = evaluate_grid_fixed(request, ContourSpec{radius, M}, options.threads);
  const std::size_t per_target = previous.n_columns * previous.dim * previous.n_terms;
  double last_change = 0.0;
  while (next_node_count(M) <= options.max_nodes && slice_entries(request, next_node_count(M)) <= kMaxSliceEntries) {
    M = next_node_count(M);
    GridValues current = evaluate_grid_fixed(request, ContourSpec{radius, M}, options.threads);
    bool ok = true;
    double change = 0.0;
    for (std::size_t k = 0; k < current.values.size(); ++k) {
      const double d = std::abs(current.values[k] - previous.values[k]);
      change = std::max(change, d);
      ok = ok && (converged(previous.values[k], current.values[k], options.tol_rel) || d <= current.rounding[k / per_target]);
    }
    if (ok) {
      current.est_error = change;
      return current;
    }
    last_change = change;
    previous = std::move(current);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "quadrature did not converge by M = %d (last change %.3e)", M, last_change);
  throw ConvergenceError(buf, 0.0, last_change, M);
}

long target_shift(const GridRequest& req, std::size_t target) {
  long shift = 0;
  for (std::size_t i = 0; i < req.y.size(); ++i) shift += req.targets[target][i] - req.y[i];
  return shift;
}

std::vector<int> mirrored(const std::vector<int>& x) {
  std::vector<int> out(x.rbegin(), x.rend());
  for (int& v : out) v = -v;
  return out;
}

SpeciesWord reversed(const SpeciesWord& w) {
  const auto l = w.letters();
  return SpeciesWord(std::vector<int>(l.rbegin(), l.rend()));
}

}  // namespace

// Targets with sum x < sum y are evaluated in the mirror image x -> -x
// (words reversed, p and q exchanged), where the same displacement is to the
// right and the contour factor r^{sum x - sum y} decays instead of growing.
GridValues evaluate_grid(const GridRequest& request, double radius, const QuadratureOptions& options) {
  std::vector<std::size_t> direct;
  std::vector<std::size_t> mirror;
  for (std::size_t t = 0; t < request.targets.size(); ++t) {
    (!request.split_terms && target_shift(request, t) < 0 ? mirror : direct).push_back(t);
  }
  if (mirror.empty()) return evaluate_grid_direct(request, radius, options);

  GridRequest back = request;
  back.y = mirrored(request.y);
  back.params = SystemParams{request.params.q, request.params.p};
  for (auto& c : back.columns) c = reversed(c);
  back.targets.clear();
  for (std::size_t t : mirror) back.targets.push_back(mirrored(request.targets[t]));
  const double back_radius = radius * max_radius(back.params) / max_radius(request.params);
  const GridValues b = evaluate_grid_direct(back, back_radius, options);

  GridValues out;
  out.n_targets = request.targets.size();
  out.n_columns = b.n_columns;
  out.dim = b.dim;
  out.n_terms = b.n_terms;
  out.values.resize(out.n_targets * out.n_columns * out.dim * out.n_terms);
  out.rounding.resize(out.n_targets);
  out.est_error = b.est_error;
  out.nodes = b.nodes;
  out.radius = radius;
  const std::size_t per_target = out.n_columns * out.dim * out.n_terms;

  if (!direct.empty()) {
    GridRequest fwd = request;
    fwd.targets.clear();
    for (std::size_t t : direct) fwd.targets.push_back(request.targets[t]);
    const GridValues a = evaluate_grid_direct(fwd, radius, options);
    for (std::size_t j = 0; j < direct.size(); ++j) {
      std::copy_n(a.values.begin() + static_cast<std::ptrdiff_t>(j * per_target), per_target,
                  out.values.begin() + static_cast<std::ptrdiff_t>(direct[j] * per_target));
      out.rounding[direct[j]] = a.rounding[j];
    }
    out.est_error = std::max(out.est_error, a.est_error);
    out.nodes = std::max(out.nodes, a.nodes);
  }

  std::vector<std::size_t> rank_map(out.dim, 0);
  if (!request.scalar) {
    for (std::size_t k = 0; k < out.dim; ++k) rank_map[k] = request.sector.rank(reversed(request.sector.unrank(k)));
  }
  for (std::size_t j = 0; j < mirror.size(); ++j) {
    const std::size_t t = mirror[j];
    for (std::size_t c = 0; c < out.n_columns; ++c) {
      for (std::size_t k = 0; k < out.dim; ++k) {
        out.values[((t * out.n_columns + c) * out.dim + k) * out.n_terms] = b.at(j, c, rank_map[k]);
      }
    }
    out.rounding[t] = b.rounding[j];
  }
  return out;
}

ProbabilityResult probability(const TransitionQuery& query) {
  const State& init = query.initial;
  const State& fin = query.final;
  if (init.size() != fin.size()) throw InputError("initial and final states have different particle counts");
  if (init.size() == 0) throw InputError("empty state");
  const double radius = query.options.resolve_radius(query.params);
  if (!init.species.same_multiset(fin.species)) return ProbabilityResult{0.0, 0.0, 0, radius};

  GridRequest req;
  req.y = init.positions;
  req.sector = sector_of(init.species);
  req.columns = {init.species};
  req.time = query.time;
  req.params = query.params;
  req.targets = {fin.positions};
  const GridValues grid = evaluate_grid(req, radius, query.options.quadrature);
  const double value = finalize_probability(grid.at(0, 0, req.sector.rank(fin.species)), "probability", grid.rounding[0]);
  return ProbabilityResult{value, grid.est_error, grid.nodes, grid.radius};
}

BlockResult sector_block(const std::vector<int>& y, const Sector& sector, const std::vector<int>& x, double t,
                         const SystemParams& params, const TransitionOptions& options) {
  GridRequest req;
  req.y = y;
  req.sector = sector;
  for (std::size_t k = 0; k < sector.dim(); ++k) req.columns.push_back(sector.unrank(k));
  req.time = t;
  req.params = params;
  req.targets = {x};
  static_cast<void>(State(x, sector.unrank(0)));  // validates x
  const GridValues grid = evaluate_grid(req, options.resolve_radius(params), options.quadrature);

  BlockResult out{sector, Eigen::MatrixXd(sector.dim(), sector.dim()), grid.est_error, grid.nodes, grid.radius};
  for (std::size_t col = 0; col < sector.dim(); ++col) {
    for (std::size_t row = 0; row < sector.dim(); ++row) {
      out.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
          finalize_probability(grid.at(0, col, row), "block entry", grid.rounding[0]);
    }
  }
  return out;
}

ProbabilityResult single_species_probability(const std::vector<int>& y, const std::vector<int>& x, double t,
                                             const SystemParams& params, const TransitionOptions& options) {
  GridRequest req;
  req.y = y;
  req.scalar = true;
  req.time = t;
  req.params = params;
  req.targets = {x};
  static_cast<void>(State(x, SpeciesWord(std::vector<int>(x.size(), 1))));  // validates x
  const GridValues grid = evaluate_grid(req, options.resolve_radius(params), options.quadrature);
  return ProbabilityResult{finalize_probability(grid.at(0, 0, 0), "probability", grid.rounding[0]), grid.est_error, grid.nodes,
                           grid.radius};
}

std::vector<std::vector<int>> window_positions(int n, int lo, int hi) {
  std::vector<std::vector<int>> out;
  if (n < 1 || hi - lo + 1 < n) return out;
  std::vector<int> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = lo + i;
  while (true) {
    out.push_back(x);
    int i = n - 1;
    while (i >= 0 && x[static_cast<std::size_t>(i)] == hi - (n - 1 - i)) --i;
    if (i < 0) break;
    ++x[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k) x[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k - 1)] + 1;
  }
  return out;
}

namespace {

Distribution distribution_on(const State& initial, double t, const SystemParams& params, int lo, int hi,
                             const TransitionOptions& options) {
  GridRequest req;
  req.y = initial.positions;
  req.sector = sector_of(initial.species);
  req.columns = {initial.species};
  req.time = t;
  req.params = params;
  req.targets = window_positions(static_cast<int>(initial.size()), lo, hi);
  const GridValues grid = evaluate_grid(req, options.resolve_radius(params), options.quadrature);

  Distribution out;
  out.initial = initial;
  out.time = t;
  out.window_lo = lo;
  out.window_hi = hi;
  out.est_error = grid.est_error;
  out.nodes = grid.nodes;
  out.radius = grid.radius;
  for (std::size_t k = 0; k < req.targets.size(); ++k) {
    for (std::size_t rank = 0; rank < req.sector.dim(); ++rank) {
      const double value = finalize_probability(grid.at(k, 0, rank), "probability", grid.rounding[k]);
      out.probabilities.emplace(State(req.targets[k], req.sector.unrank(rank)), value);
      out.total_mass += value;
    }
  }
  out.deficit = 1.0 - out.total_mass;
  return out;
}

}  // namespace

Distribution distribution(const State& initial, double t, const SystemParams& params,
                          std::optional<std::pair<int, int>> window, const TransitionOptions& options) {
  if (initial.size() == 0) throw InputError("empty initial state");
  if (t < 0.0 || !std::isfinite(t)) throw InputError("time must be finite and non-negative");
  const int y_lo = initial.positions.front();
  const int y_hi = initial.positions.back();
  if (window) {
    const auto [lo, hi] = *window;
    if (lo > y_lo || hi < y_hi) throw InputError("window must contain the initial positions");
    Distribution d = distribution_on(initial, t, params, lo, hi, options);
    if (d.total_mass < 1.0 - 10.0 * kWindowMassTolerance) {
      throw InputError("window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] is too small: mass " +
                       std::to_string(d.total_mass));
    }
    return d;
  }
  int half = static_cast<int>(std::ceil(4.0 * std::sqrt(t) + t + 4.0));
  for (int attempt = 0; attempt < 6; ++attempt) {
    Distribution d = distribution_on(initial, t, params, y_lo - half, y_hi + half, options);
    if (d.deficit < kWindowMassTolerance) return d;
    half += std::max(2, half / 2);
  }
  throw NumericalError("window calibration did not reach mass deficit " + std::to_string(kWindowMassTolerance));
}

VerificationReport run_initial_suite(const SystemParams& params, int max_particles, int reach,
                                     const QuadratureOptions& options) {
  if (max_particles < 1 || max_particles > kMaxParticles) throw InputError("bad particle count for initial suite");
  if (reach < 0) throw InputError("reach must be non-negative");
  const double radius = kInitialSuiteRadiusFraction * max_radius(params);
  VerificationReport report;
  for (int n = 1; n <= max_particles; ++n) {
    std::vector<std::vector<int>> starts;
    std::vector<int> packed(static_cast<std::size_t>(n));
    std::vector<int> spread(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      packed[static_cast<std::size_t>(i)] = i;
      spread[static_cast<std::size_t>(i)] = 2 * i;
    }
    starts.push_back(packed);
    if (n > 1) starts.push_back(spread);

    for (const auto& y : starts) {
      // X with y_i <= x_i <= y_i + reach, strictly increasing
      std::vector<std::vector<int>> targets;
      for (const auto& x : window_positions(n, y.front(), y.back() + reach)) {
        bool ok = true;
        for (int i = 0; i < n; ++i) {
          const auto ii = static_cast<std::size_t>(i);
          ok = ok && x[ii] >= y[ii] && x[ii] <= y[ii] + reach;
        }
        if (ok) targets.push_back(x);
      }
      for (const Sector& sector : all_sectors(n, n)) {
        GridRequest req;
        req.y = y;
        req.sector = sector;
        for (std::size_t k = 0; k < sector.dim(); ++k) req.columns.push_back(sector.unrank(k));
        req.split_terms = true;
        req.time = 0.0;
        req.params = params;
        req.targets = targets;
        const GridValues grid = evaluate_grid(req, radius, options);

        double total_dev = 0.0;
        double term_dev = 0.0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
          const bool same_x = targets[k] == y;
          for (std::size_t c = 0; c < grid.n_columns; ++c) {
            for (std::size_t row = 0; row < grid.dim; ++row) {
              const double expected = (same_x && row == c) ? 1.0 : 0.0;
              total_dev = std::max(total_dev, std::abs(grid.total(k, c, row) - expected));
              for (std::size_t tau = 0; tau < grid.n_terms; ++tau) {
                if (grid.sigmas[tau].is_identity()) continue;
                term_dev = std::max(term_dev, std::abs(grid.at(k, c, row, tau)));
              }
            }
          }
        }
        const std::string detail = "Y=" + format_positions(y);
        report.rows.push_back({"initial", sector.label(), detail, 0, total_dev});
        if (n > 1) report.rows.push_back({"initial_term", sector.label(), detail, 0, term_dev});
      }
    }
  }
  return report;
}

}  // namespace masep
