#include "bssn/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "bssn/core_map.hpp"
#include "bssn/newton.hpp"

namespace bssn {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id) {
  // mix the stream id into the master seed
  std::uint64_t sm = seed ^ (0x9e3779b97f4a7c15ull * (stream_id + 1));
  return Rng(splitmix64(sm));
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller; u1 bounded away from zero
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vec Rng::normal_vector(Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = normal();
  return v;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

Vec add_relative_noise(const Vec& f, double level, std::uint64_t seed) {
  if (level < 0.0) throw InvalidArgument("noise level must be >= 0");
  if (level == 0.0) return f;
  const double fnorm = f.norm();
  if (fnorm == 0.0) {
    throw InvalidArgument("cannot add relative noise to a zero signal");
  }
  Rng rng = Rng::stream(seed, 0);
  Vec e = rng.normal_vector(f.size());
  e *= level * fnorm / e.norm();
  return f + e;
}

DiscrepancyResult discrepancy_principle(
    const std::function<WeightedL1Problem(double)>& problem_factory,
    const std::function<double(const Vec&)>& data_mismatch,
    const DiscrepancyConfig& dconf, double target, const SolverConfig& sconf) {
  if (dconf.q <= 0.0 || dconf.q >= 1.0) throw InvalidArgument("q in (0,1)");
  if (dconf.tau < 1.0) throw InvalidArgument("tau must be >= 1");
  if (dconf.w_init <= 0.0) throw InvalidArgument("w_init must be > 0");

  double w = dconf.w_init;
  WeightedL1Problem problem = problem_factory(w);
  Vec u = Vec::Zero(problem.dimension());
  DiscrepancyResult out;
  for (int i = 0; i <= dconf.max_reductions; ++i) {
    problem = problem_factory(w);
    SolveResult res = solve(problem, u, sconf);
    if (!res.converged) {
      throw NumericalError("discrepancy_principle: inner solve failed");
    }
    u = res.u_star;  // warm start for the next, smaller weight
    ++out.solves;
    if (data_mismatch(u) <= target) {
      out.w = w;
      out.u_w = u;
      return out;
    }
    w *= dconf.q;
  }
  throw NumericalError(
      "discrepancy_principle: target not reached within the reduction cap");
}

RegressionMetrics regression_metrics(const RegressionProblem& reg,
                                     const Vec& u_w) {
  const Eigen::Index m = reg.a_rows.rows();
  const Eigen::Index n = reg.a_rows.cols();
  if (m <= n + 1) {
    throw InvalidArgument("regression_metrics: need m > n + 1");
  }
  const Vec r = reg.a_rows * u_w - reg.y;
  const double mse = r.squaredNorm() / static_cast<double>(m - n - 1);
  const double ybar = reg.y.mean();
  const double var =
      (reg.y.array() - ybar).square().sum() / static_cast<double>(m - 1);
  RegressionMetrics out;
  out.std_error = std::sqrt(mse);
  out.r_squared = 1.0 - mse / var;
  out.support_size =
      static_cast<int>((u_w.array() != 0.0).count());
  return out;
}

std::vector<PathPoint> regularization_path(
    const std::function<WeightedL1Problem(double)>& problem_factory,
    const std::vector<double>& weights, const RegressionProblem& reg,
    const SolverConfig& sconf) {
  if (!std::is_sorted(weights.begin(), weights.end())) {
    throw InvalidArgument("regularization_path: weights must be increasing");
  }
  std::vector<PathPoint> path;
  Vec warm;
  for (double w : weights) {
    WeightedL1Problem problem = problem_factory(w);
    if (warm.size() == 0) warm = Vec::Zero(problem.dimension());
    PathPoint pt;
    pt.w = w;
    try {
      SolveResult res = solve(problem, warm, sconf);
      pt.converged = res.converged;
      pt.u_w = res.u_star;
    } catch (const NumericalError&) {
      pt.converged = false;
      pt.u_w = warm;
    }
    if (pt.converged) warm = pt.u_w;
    pt.metrics = regression_metrics(reg, pt.u_w);
    path.push_back(std::move(pt));
  }
  return path;
}

Vec ista_oracle(const WeightedL1Problem& problem, const Vec& u0, double step,
                double tol, int max_iter) {
  if (step <= 0.0) throw InvalidArgument("ista: step must be > 0");
  Vec u = u0;
  const Vec beta = step * problem.weights.values();
  for (int it = 0; it < max_iter; ++it) {
    const Vec grad = problem.objective->gradient(u);
    detail::require_finite(grad, "gradient");
    const Vec next = soft_threshold(u - step * grad, beta);
    const double change = (next - u).norm();
    u = next;
    if (change < tol) return u;
  }
  throw NumericalError("ista_oracle: iteration cap exceeded");
}

double ista_default_step(const WeightedL1Problem& problem, const Vec& u0) {
  const Mat& hess = problem.objective->hessian(u0);
  Rng rng(0xb55e);
  Vec v = rng.normal_vector(hess.rows());
  v.normalize();
  double lambda = 1.0;
  for (int it = 0; it < 100; ++it) {
    Vec hv = hess * v;
    const double next = hv.norm();
    if (next == 0.0) break;
    hv /= next;
    if (std::abs(next - lambda) <= 1e-10 * lambda) {
      lambda = next;
      break;
    }
    lambda = next;
    v = hv;
  }
  return 0.9 / lambda;
}

RegressionProblem make_regression_instance(
    int m, int n, const std::vector<double>& support_weights,
    double outlier_fraction, std::uint64_t seed) {
  if (static_cast<int>(support_weights.size()) > n) {
    throw InvalidArgument("more support weights than coefficients");
  }
  Rng design_rng = Rng::stream(seed, 1);
  Rng noise_rng = Rng::stream(seed, 2);
  Rng mask_rng = Rng::stream(seed, 3);
  Rng placement_rng = Rng::stream(seed, 4);

  RegressionProblem reg;
  reg.a_rows.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) reg.a_rows(i, j) = design_rng.normal();
  }

  reg.u_true = Vec::Zero(n);
  const std::vector<int> slots = placement_rng.permutation(n);
  for (size_t i = 0; i < support_weights.size(); ++i) {
    reg.u_true(slots[i]) = support_weights[i];
  }

  Vec e(m);
  for (int i = 0; i < m; ++i) e(i) = noise_rng.normal();
  const int n_out = static_cast<int>(outlier_fraction * m);
  const std::vector<int> order = mask_rng.permutation(m);
  for (int i = 0; i < n_out; ++i) e(order[i]) *= 50.0;

  reg.y = reg.a_rows * reg.u_true + e;
  reg.outlier_fraction = outlier_fraction;
  return reg;
}

Vec make_sparse_test_image(int image_side, double nonzero_fraction,
                           std::uint64_t seed) {
  const int n = image_side * image_side;
  Rng rng = Rng::stream(seed, 5);
  Vec img = Vec::Zero(n);
  const int count = std::max(1, static_cast<int>(nonzero_fraction * n));
  const std::vector<int> order = rng.permutation(n);
  for (int i = 0; i < count; ++i) {
    img(order[i]) = 0.5 + 0.5 * rng.uniform();
  }
  return img;
}

}  // namespace bssn
