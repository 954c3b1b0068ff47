#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "bssn/objectives.hpp"
#include "bssn/types.hpp"

namespace bssn {

/// Seedable generator with named substreams so each synthesized
/// artifact (noise, design, outlier mask, ...) draws from its own
/// deterministic stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent substream: same master seed + stream id is always the
  /// same sequence.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform();            // [0, 1)
  double normal();             // standard normal, Box-Muller
  Vec normal_vector(Eigen::Index n);
  std::vector<int> permutation(int n);  // Fisher-Yates shuffle of 0..n-1

 private:
  std::uint64_t s_[4];
  std::uint64_t next_u64();
};

/// f + e with e rescaled to ||e|| = level * ||f|| exactly.
Vec add_relative_noise(const Vec& f, double level, std::uint64_t seed);

struct DiscrepancyConfig {
  double w_init = std::pow(0.9, 10);
  double q = 0.9;
  double tau = 2.0;
  int max_reductions = 200;
};

struct DiscrepancyResult {
  double w = 0.0;
  Vec u_w;
  int solves = 0;
};

/// Geometric weight reduction until the minimizer fits the data to
/// within the target; each solve warm-starts from the previous one.
DiscrepancyResult discrepancy_principle(
    const std::function<WeightedL1Problem(double)>& problem_factory,
    const std::function<double(const Vec&)>& data_mismatch,
    const DiscrepancyConfig& dconf, double target, const SolverConfig& sconf);

struct RegressionMetrics {
  double std_error = 0.0;
  double r_squared = 0.0;
  int support_size = 0;
};

RegressionMetrics regression_metrics(const RegressionProblem& reg,
                                     const Vec& u_w);

struct PathPoint {
  double w = 0.0;
  Vec u_w;
  RegressionMetrics metrics;
  bool converged = false;
};

/// Warm-started sweep over an increasing weight grid.
std::vector<PathPoint> regularization_path(
    const std::function<WeightedL1Problem(double)>& problem_factory,
    const std::vector<double>& weights, const RegressionProblem& reg,
    const SolverConfig& sconf);

/// Proximal-gradient fixed-point oracle (iterative soft-thresholding).
Vec ista_oracle(const WeightedL1Problem& problem, const Vec& u0, double step,
                double tol, int max_iter);

/// Default ISTA stepsize 0.9 / c2 with c2 from power iteration on the
/// Hessian at u0.
double ista_default_step(const WeightedL1Problem& problem, const Vec& u0);

RegressionProblem make_regression_instance(int m, int n,
                                           const std::vector<double>& support_weights,
                                           double outlier_fraction,
                                           std::uint64_t seed);

/// Deterministic sparse test image with roughly the given nonzero
/// fraction, values in [0.5, 1].
Vec make_sparse_test_image(int image_side, double nonzero_fraction,
                           std::uint64_t seed);

}  // namespace bssn
