#include "bssn/newton.hpp"

#include <algorithm>
#include <cmath>

namespace bssn {

namespace {

Mat submatrix(const Mat& m, const Indices& rows, const Indices& cols) {
  Mat out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < cols.size(); ++j) {
      out(i, j) = m(rows[i], cols[j]);
    }
  }
  return out;
}

Vec subvector(const Vec& v, const Indices& idx) {
  Vec out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

}  // namespace

StepContext build_step(const WeightedL1Problem& problem, const Vec& u,
                       const IndexPartition& partition, bool use_modified) {
  StepContext ctx;
  ctx.abar = partition.active(use_modified);
  ctx.izero = partition.inactive_zero(use_modified);
  ctx.iplus = partition.inactive_plus(use_modified);
  ctx.iminus = partition.inactive_minus(use_modified);
  ctx.f = residual_map(problem, u);

  const double gamma = problem.gamma;
  const Mat& hess = problem.objective->hessian(u);
  if (!hess.allFinite()) throw NumericalError("hessian has non-finite entries");

  const int a = static_cast<int>(ctx.abar.size());
  const int nz = static_cast<int>(ctx.izero.size());
  const int np = static_cast<int>(ctx.iplus.size());
  const int nm = static_cast<int>(ctx.iminus.size());

  Indices inact;
  inact.reserve(nz + np + nm);
  inact.insert(inact.end(), ctx.izero.begin(), ctx.izero.end());
  inact.insert(inact.end(), ctx.iplus.begin(), ctx.iplus.end());
  inact.insert(inact.end(), ctx.iminus.begin(), ctx.iminus.end());

  if (a > 0) {
    const Mat maa = submatrix(hess, ctx.abar, ctx.abar);
    ctx.llt.compute(maa);
    // a successful factorization of a numerically singular block still
    // produces catastrophically amplified directions; treat it as
    // semidefinite as well
    if (ctx.llt.info() != Eigen::Success || ctx.llt.rcond() < 1e-10) {
      // singular but positive-semidefinite block (e.g. a blur factor
      // with an exact kernel): fall back to a truncated eigensolve
      Eigen::SelfAdjointEigenSolver<Mat> es(maa);
      if (es.info() != Eigen::Success) {
        throw NumericalError("active block eigendecomposition failed");
      }
      const Vec& lam = es.eigenvalues();
      const double lam_max = lam.cwiseAbs().maxCoeff();
      if (lam.minCoeff() < -1e-10 * lam_max) {
        throw NumericalError("active block of the Hessian is not PSD");
      }
      const double cutoff = 1e-8 * lam_max;
      ctx.eig_vectors = es.eigenvectors();
      ctx.eig_inverse = (lam.array() > cutoff)
                            .select(lam.array().inverse(), 0.0)
                            .matrix();
      ctx.semidefinite = true;
    }
    ctx.coupling = submatrix(hess, ctx.abar, inact);
  } else {
    ctx.coupling.resize(0, inact.size());
  }

  const int m = np + nm;
  if (m == 0) {
    ctx.lcp.n_mat.resize(0, 0);
    ctx.lcp.z_vec.resize(0);
    return ctx;
  }

  // Schur columns W = M_AA^{-1} M_{A,[I0 I+ I-]} and s = M_AA^{-1} F_A:
  // |I| + 1 systems with the one factorization.
  Mat w(a, inact.size());
  Vec s(a);
  if (a > 0) {
    w = ctx.solve_active(ctx.coupling);
    s = ctx.solve_active(subvector(ctx.f, ctx.abar));
    ctx.sle_count += static_cast<int>(inact.size()) + 1;
  }

  const Mat mpp = submatrix(hess, ctx.iplus, ctx.iplus);
  const Mat mpm = submatrix(hess, ctx.iplus, ctx.iminus);
  const Mat mmm = submatrix(hess, ctx.iminus, ctx.iminus);
  const Mat mp0 = submatrix(hess, ctx.iplus, ctx.izero);
  const Mat mm0 = submatrix(hess, ctx.iminus, ctx.izero);

  Mat n_mat(m, m);
  Vec z_head(m);
  const Vec u0 = subvector(u, ctx.izero);
  const Vec fp = subvector(ctx.f, ctx.iplus);
  const Vec fm = subvector(ctx.f, ctx.iminus);

  if (a > 0) {
    const Mat pa = submatrix(hess, ctx.iplus, ctx.abar);
    const Mat qa = submatrix(hess, ctx.iminus, ctx.abar);
    const Mat w0 = w.leftCols(nz);
    const Mat wp = w.middleCols(nz, np);
    const Mat wm = w.rightCols(nm);
    n_mat.topLeftCorner(np, np) = gamma * (mpp - pa * wp);
    n_mat.topRightCorner(np, nm) = gamma * (pa * wm - mpm);
    n_mat.bottomLeftCorner(nm, np) = gamma * (qa * wp - mpm.transpose());
    n_mat.bottomRightCorner(nm, nm) = gamma * (mmm - qa * wm);
    z_head.head(np) = gamma * (pa * (w0 * u0) - mp0 * u0) - pa * s + fp;
    z_head.tail(nm) = gamma * (mm0 * u0 - qa * (w0 * u0)) + qa * s - fm;
  } else {
    n_mat.topLeftCorner(np, np) = gamma * mpp;
    n_mat.topRightCorner(np, nm) = -gamma * mpm;
    n_mat.bottomLeftCorner(nm, np) = -gamma * mpm.transpose();
    n_mat.bottomRightCorner(nm, nm) = gamma * mmm;
    z_head.head(np) = -gamma * (mp0 * u0) + fp;
    z_head.tail(nm) = gamma * (mm0 * u0) - fm;
  }
  n_mat = 0.5 * (n_mat + n_mat.transpose()).eval();

  Vec x_shift(m);
  x_shift.head(np) = subvector(u, ctx.iplus);
  x_shift.tail(nm) = -subvector(u, ctx.iminus);

  ctx.lcp.n_mat = std::move(n_mat);
  ctx.lcp.z_vec = z_head - ctx.lcp.n_mat * x_shift;

  // Degenerate Schur rows: N is positive semidefinite, so a vanishing
  // diagonal entry forces the whole row/column to vanish (a Hessian
  // kernel coordinate). The complementarity row is then unsolvable
  // whenever z_k < 0; pick the identity-row element of the generalized
  // derivative for those coordinates instead, which pins x_k = 0.
  const double deg_tol =
      1e-10 * std::max(1.0, ctx.lcp.n_mat.diagonal().maxCoeff());
  for (int k = 0; k < m; ++k) {
    if (ctx.lcp.n_mat(k, k) <= deg_tol) {
      ctx.lcp.n_mat.row(k).setZero();
      ctx.lcp.n_mat.col(k).setZero();
      ctx.lcp.n_mat(k, k) = 1.0;
      // strictly positive offset pins x_k = 0 with slack y_k = 1
      ctx.lcp.z_vec(k) = 1.0;
    }
  }
  ctx.lcp.back_map.clear();
  for (int k : ctx.iplus) ctx.lcp.back_map.push_back({k, LcpInstance::Sign::plus});
  for (int k : ctx.iminus) ctx.lcp.back_map.push_back({k, LcpInstance::Sign::minus});
  return ctx;
}

Vec direction_from_context(const WeightedL1Problem& problem, const Vec& u,
                           StepContext& ctx, const LcpSolution& lcp_solution) {
  const int np = static_cast<int>(ctx.iplus.size());
  const int nm = static_cast<int>(ctx.iminus.size());
  if (lcp_solution.x.size() != np + nm) {
    throw InvalidArgument("direction: LCP solution size mismatch");
  }

  Vec d = Vec::Zero(u.size());
  for (int k : ctx.izero) d(k) = -u(k);
  for (int i = 0; i < np; ++i) {
    const int k = ctx.iplus[i];
    d(k) = lcp_solution.x(i) - u(k);
  }
  for (int i = 0; i < nm; ++i) {
    const int k = ctx.iminus[i];
    d(k) = -lcp_solution.x(np + i) - u(k);
  }

  const int a = static_cast<int>(ctx.abar.size());
  if (a > 0) {
    Vec d_inact(ctx.coupling.cols());
    int pos = 0;
    for (int k : ctx.izero) d_inact(pos++) = d(k);
    for (int k : ctx.iplus) d_inact(pos++) = d(k);
    for (int k : ctx.iminus) d_inact(pos++) = d(k);
    const double gamma = problem.gamma;
    const Vec rhs =
        -gamma * (ctx.coupling * d_inact) - subvector(ctx.f, ctx.abar);
    const Vec da = (1.0 / gamma) * ctx.solve_active(rhs).col(0);
    ctx.sle_count += 1;
    for (int i = 0; i < a; ++i) d(ctx.abar[i]) = da(i);
  }
  return d;
}

LcpInstance assemble_reduced_lcp(const WeightedL1Problem& problem,
                                 const Vec& u,
                                 const IndexPartition& partition,
                                 bool use_modified) {
  return build_step(problem, u, partition, use_modified).lcp;
}

Vec newton_direction(const WeightedL1Problem& problem, const Vec& u,
                     const IndexPartition& partition,
                     const LcpSolution& lcp_solution, bool use_modified) {
  StepContext ctx = build_step(problem, u, partition, use_modified);
  return direction_from_context(problem, u, ctx, lcp_solution);
}

std::pair<double, int> armijo_search(const WeightedL1Problem& problem,
                                     const Vec& u, const Vec& d,
                                     const SolverConfig& config) {
  const double theta = merit(problem, u);
  double t = 1.0;
  for (int l = 0; l <= config.max_backtracks; ++l) {
    if (merit(problem, u + t * d) <= (1.0 - 2.0 * config.armijo_sigma * t) * theta) {
      return {t, l};
    }
    t *= config.armijo_beta;
  }
  throw InternalError(
      "armijo_search: backtracking cap hit; direction is not a descent "
      "direction");
}

SolveResult solve(const WeightedL1Problem& problem, const Vec& u0,
                  const SolverConfig& config) {
  config.validate();
  detail::require_finite(u0, "starting vector");

  SolveResult result;
  Vec u = u0;
  bool use_modified = config.variant == Variant::modbssn;
  bool switched = false;

  Vec f = residual_map(problem, u);
  double res = f.norm();

  IterationRecord start;
  start.j = 0;
  start.residual_norm = res;
  start.objective = problem.penalized_value(u);
  start.variant_active = use_modified ? Variant::modbssn : Variant::bssn;
  result.records.push_back(start);
  if (config.store_iterates) result.iterates.push_back(u);

  int j = 0;
  while (res >= config.tol && j < config.max_outer) {
    const IndexPartition partition = classify(problem, u, config.boundary_eps);
    StepContext ctx = build_step(problem, u, partition, use_modified);
    int lcp_size = static_cast<int>(ctx.lcp.size());
    LcpSolution lcp_solution;
    if (lcp_size > 0) {
      try {
        lcp_solution = solve_lcp(ctx.lcp);
      } catch (const NumericalError&) {
        if (!use_modified) throw;
        // a Hessian kernel can render the modified-set subproblem
        // infeasible; the plain sets are an equally valid derivative
        // choice and typically yield an empty subproblem, so retry the
        // step with them
        ctx = build_step(problem, u, partition, false);
        lcp_size = static_cast<int>(ctx.lcp.size());
        lcp_solution = lcp_size > 0 ? solve_lcp(ctx.lcp) : LcpSolution{};
      }
    } else {
      lcp_solution.x.resize(0);
      lcp_solution.y.resize(0);
    }
    const Vec d = direction_from_context(problem, u, ctx, lcp_solution);
    const auto [t, backtracks] = armijo_search(problem, u, d, config);
    (void)backtracks;
    u += t * d;
    ++j;

    if (u.norm() > config.divergence_norm_cap) {
      throw NumericalError("solve: iterate norm exceeded divergence cap");
    }

    f = residual_map(problem, u);
    res = f.norm();

    IterationRecord rec;
    rec.j = j;
    rec.residual_norm = res;
    rec.objective = problem.penalized_value(u);
    rec.step = t;
    rec.lcp_size = lcp_size;
    rec.sle_size = static_cast<int>(ctx.abar.size());
    rec.sle_count = ctx.sle_count;
    rec.variant_active = use_modified ? Variant::modbssn : Variant::bssn;
    result.records.push_back(rec);
    if (config.store_iterates) result.iterates.push_back(u);

    if (config.variant == Variant::hybrid && !switched && j > config.j_max &&
        t < config.t_min) {
      use_modified = true;
      switched = true;
      result.switch_step = j;
    }
  }

  result.u_star = u;
  result.converged = res < config.tol;
  return result;
}

std::vector<double> quadratic_rate_diagnostic(const std::vector<Vec>& iterates,
                                              const Vec& u_star) {
  std::vector<double> ratios;
  for (size_t j = 0; j + 1 < iterates.size(); ++j) {
    const double prev = (iterates[j] - u_star).norm();
    const double next = (iterates[j + 1] - u_star).norm();
    if (prev > 0.0) ratios.push_back(next / (prev * prev));
  }
  return ratios;
}

std::pair<Indices, Indices> index_sets_bc(const IndexPartition& partition,
                                          const LcpSolution& lcp_solution,
                                          bool use_modified) {
  Indices b = partition.active(use_modified);
  Indices c = partition.inactive_zero(use_modified);
  const Indices iplus = partition.inactive_plus(use_modified);
  const Indices iminus = partition.inactive_minus(use_modified);
  const int np = static_cast<int>(iplus.size());
  for (int i = 0; i < np; ++i) {
    (lcp_solution.x(i) > 0.0 ? b : c).push_back(iplus[i]);
  }
  for (size_t i = 0; i < iminus.size(); ++i) {
    (lcp_solution.x(np + static_cast<int>(i)) > 0.0 ? b : c)
        .push_back(iminus[i]);
  }
  std::sort(b.begin(), b.end());
  std::sort(c.begin(), c.end());
  return {b, c};
}

Mat generalized_derivative(const WeightedL1Problem& problem, const Vec& u,
                           const IndexPartition& partition,
                           const LcpSolution& lcp_solution, bool use_modified) {
  const auto [b, c] = index_sets_bc(partition, lcp_solution, use_modified);
  const Mat& hess = problem.objective->hessian(u);
  const Eigen::Index n = u.size();
  Mat g = Mat::Zero(n, n);
  for (int k : b) g.row(k) = problem.gamma * hess.row(k);
  for (int k : c) g(k, k) = 1.0;
  return g;
}

}  // namespace bssn
