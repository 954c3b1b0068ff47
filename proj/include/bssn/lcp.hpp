#pragma once

#include <optional>
#include <utility>

#include "bssn/types.hpp"

namespace bssn {

enum class LcpSolver { damped_newton, lemke, empty };

/// Symmetric positive-definite LCP: x >= 0, Nx + z >= 0, <x, Nx+z> = 0.
/// back_map records, per LCP coordinate, the original variable index
/// and whether it came from the I+ (plus) or I- (minus) block.
struct LcpInstance {
  Mat n_mat;
  Vec z_vec;
  enum class Sign { plus, minus };
  std::vector<std::pair<int, Sign>> back_map;

  Eigen::Index size() const { return z_vec.size(); }
  /// Plain-text dump for failure triage.
  std::string dump() const;
};

struct LcpSolution {
  Vec x;
  Vec y;  // = Nx + z
  LcpSolver solver_used = LcpSolver::empty;
};

/// min{x, Nx+z} merit used by the damped Newton inner solver and the
/// complementarity checks.
Vec lcp_min_map(const LcpInstance& inst, const Vec& x);

/// Damped Newton on the min-map, started from x = 0. Declines (nullopt)
/// when the start condition z_k != 0 fails, a reduced system is
/// singular, or max_steps is exhausted.
std::optional<LcpSolution> damped_newton_lcp(const LcpInstance& inst,
                                             double tol, int max_steps = 50);

/// Lemke's complementary pivoting with lexicographic tie-breaking.
/// Ray termination or pivot-cap overflow is a hard error for SPD input.
LcpSolution lemke(const LcpInstance& inst, double tol, int max_pivots = 0);

/// Enumeration oracle for m <= 20: tries every active set.
LcpSolution brute_force_lcp(const LcpInstance& inst);

/// Damped Newton with Lemke fallback; the production entry point.
LcpSolution solve_lcp(const LcpInstance& inst, double tol = 1e-10);

}  // namespace bssn
