#pragma once

#include <Eigen/Cholesky>

#include "bssn/core_map.hpp"
#include "bssn/lcp.hpp"
#include "bssn/types.hpp"

namespace bssn {

/// Per-step working data: the reduced LCP together with the residual,
/// the factorization of the active block and the coupling columns, so
/// direction recovery reuses the single factorization from assembly.
struct StepContext {
  Indices abar, izero, iplus, iminus;
  Vec f;                   // F(u)
  Eigen::LLT<Mat> llt;     // factorization of M_{A,A}
  // Spectrally truncated fallback when the active block is only
  // positive semidefinite (singular operators such as the N = 64 blur
  // factor): eigenvalues below a relative cutoff are dropped so the
  // solve acts on the well-conditioned subspace only.
  Mat eig_vectors;
  Vec eig_inverse;
  bool semidefinite = false;
  Mat coupling;            // M_{A, [I0 I+ I-]}
  LcpInstance lcp;
  int sle_count = 0;       // solves against the factorization so far

  Mat solve_active(const Mat& rhs) const {
    if (semidefinite) {
      return eig_vectors *
             (eig_inverse.asDiagonal() * (eig_vectors.transpose() * rhs));
    }
    return llt.solve(rhs);
  }
};

StepContext build_step(const WeightedL1Problem& problem, const Vec& u,
                       const IndexPartition& partition, bool use_modified);

/// Newton direction from the LCP solution; one further solve against
/// the factorization held by the context.
Vec direction_from_context(const WeightedL1Problem& problem, const Vec& u,
                           StepContext& ctx, const LcpSolution& lcp_solution);

/// Schur-complement reduced LCP at u (convenience wrapper).
LcpInstance assemble_reduced_lcp(const WeightedL1Problem& problem,
                                 const Vec& u,
                                 const IndexPartition& partition,
                                 bool use_modified);

/// Newton direction at u given the solved LCP (convenience wrapper).
Vec newton_direction(const WeightedL1Problem& problem, const Vec& u,
                     const IndexPartition& partition,
                     const LcpSolution& lcp_solution, bool use_modified);

/// Armijo backtracking: largest beta^l with
/// Theta(u + beta^l d) <= (1 - 2 sigma beta^l) Theta(u).
/// Returns (stepsize, number of halvings).
std::pair<double, int> armijo_search(const WeightedL1Problem& problem,
                                     const Vec& u, const Vec& d,
                                     const SolverConfig& config);

/// The solver drivers (plain, modified and hybrid index sets).
SolveResult solve(const WeightedL1Problem& problem, const Vec& u0,
                  const SolverConfig& config);

/// Ratios ||u^{j+1} - u*|| / ||u^j - u*||^2 over the stored iterates.
std::vector<double> quadratic_rate_diagnostic(const std::vector<Vec>& iterates,
                                              const Vec& u_star);

/// Index split driven by the LCP solution (positive vs clamped LCP
/// coordinates); diagnostic only, never used by the solve itself.
std::pair<Indices, Indices> index_sets_bc(const IndexPartition& partition,
                                          const LcpSolution& lcp_solution,
                                          bool use_modified);

/// Dense blockwise generalized derivative assembled from the B/C split;
/// test support for verifying G(u) d = -F(u).
Mat generalized_derivative(const WeightedL1Problem& problem, const Vec& u,
                           const IndexPartition& partition,
                           const LcpSolution& lcp_solution, bool use_modified);

}  // namespace bssn
