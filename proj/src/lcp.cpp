#include "bssn/lcp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <sstream>

namespace bssn {

namespace {

// Solve N_SS * xs = -z_S for an index subset, via Cholesky.
// Returns false if the factorization fails.
bool solve_restricted(const Mat& n_mat, const Vec& z, const Indices& support,
                      Vec& x_out) {
  const int s = static_cast<int>(support.size());
  x_out = Vec::Zero(z.size());
  if (s == 0) return true;
  Mat nss(s, s);
  Vec rhs(s);
  for (int i = 0; i < s; ++i) {
    rhs(i) = -z(support[i]);
    for (int j = 0; j < s; ++j) nss(i, j) = n_mat(support[i], support[j]);
  }
  Eigen::LLT<Mat> llt(nss);
  if (llt.info() != Eigen::Success) return false;
  const Vec xs = llt.solve(rhs);
  if (!xs.allFinite()) return false;
  for (int i = 0; i < s; ++i) x_out(support[i]) = xs(i);
  return true;
}

// Exact re-solve on the support identified by an iterative solver.
// Returns true and overwrites sol on success.
bool polish(const LcpInstance& inst, LcpSolution& sol, double feas_tol) {
  Indices support;
  for (int k = 0; k < inst.size(); ++k) {
    if (sol.x(k) > sol.y(k)) support.push_back(k);
  }
  Vec x;
  if (!solve_restricted(inst.n_mat, inst.z_vec, support, x)) return false;
  const Vec y = inst.n_mat * x + inst.z_vec;
  if (x.minCoeff() < -feas_tol || y.minCoeff() < -feas_tol) return false;
  sol.x = x.cwiseMax(0.0);
  sol.y = y;
  return true;
}

int lexico_smaller_row(const Mat& tableau, int r1, int r2, int col) {
  // lexicographic ratio comparison over the identity columns
  for (int i = 0; i < tableau.rows(); ++i) {
    const double diff = tableau(r2, i) * tableau(r1, col) -
                        tableau(r1, i) * tableau(r2, col);
    if (diff < 0) return r2;
    if (diff > 0) return r1;
  }
  return r1;
}

}  // namespace

std::string LcpInstance::dump() const {
  std::ostringstream os;
  os.precision(17);
  os << "m " << size() << "\nN\n" << n_mat << "\nz\n" << z_vec.transpose()
     << "\n";
  return os.str();
}

Vec lcp_min_map(const LcpInstance& inst, const Vec& x) {
  return x.cwiseMin(inst.n_mat * x + inst.z_vec);
}

std::optional<LcpSolution> damped_newton_lcp(const LcpInstance& inst,
                                             double tol, int max_steps) {
  const int m = static_cast<int>(inst.size());
  if (m == 0) {
    return LcpSolution{Vec(0), Vec(0), LcpSolver::empty};
  }
  // start condition for x0 = 0: (Nx0 + z)_k != x0_k, i.e. z_k != 0
  for (int k = 0; k < m; ++k) {
    if (inst.z_vec(k) == 0.0) return std::nullopt;
  }
  constexpr double kSigma = 0.01;
  constexpr double kBeta = 0.5;

  Vec x = Vec::Zero(m);
  Vec h = lcp_min_map(inst, x);
  double theta = h.squaredNorm();

  for (int step = 0; step < max_steps; ++step) {
    if (std::sqrt(theta) < tol) {
      return LcpSolution{x, inst.n_mat * x + inst.z_vec,
                         LcpSolver::damped_newton};
    }
    const Vec y = inst.n_mat * x + inst.z_vec;
    Indices active;  // rows where the affine branch is the minimum
    for (int k = 0; k < m; ++k) {
      if (y(k) < x(k)) active.push_back(k);
    }
    // Newton step: d_k = -x_k on identity rows; N_AA d_A = -h_A - N_AI d_I
    Vec d = -x;
    const int a = static_cast<int>(active.size());
    if (a > 0) {
      Mat naa(a, a);
      Vec rhs(a);
      for (int i = 0; i < a; ++i) {
        const int r = active[i];
        double coupling = 0.0;
        int ai = 0;
        for (int c = 0; c < m; ++c) {
          if (ai < a && active[ai] == c) {
            naa(i, ai) = inst.n_mat(r, c);
            ++ai;
          } else {
            coupling += inst.n_mat(r, c) * d(c);
          }
        }
        rhs(i) = -h(r) - coupling;
      }
      Eigen::FullPivLU<Mat> lu(naa);
      if (!lu.isInvertible()) return std::nullopt;
      const Vec da = lu.solve(rhs);
      if (!da.allFinite()) return std::nullopt;
      for (int i = 0; i < a; ++i) d(active[i]) = da(i);
    }

    double t = 1.0;
    bool accepted = false;
    for (int l = 0; l < 60; ++l) {
      const Vec trial = x + t * d;
      const Vec ht = lcp_min_map(inst, trial);
      const double theta_t = ht.squaredNorm();
      if (theta_t <= (1.0 - 2.0 * kSigma * t) * theta) {
        x = trial;
        h = ht;
        theta = theta_t;
        accepted = true;
        break;
      }
      t *= kBeta;
    }
    if (!accepted) return std::nullopt;
  }
  if (std::sqrt(theta) < tol) {
    return LcpSolution{x, inst.n_mat * x + inst.z_vec,
                       LcpSolver::damped_newton};
  }
  return std::nullopt;
}

LcpSolution lemke(const LcpInstance& inst, double tol, int max_pivots) {
  const int m = static_cast<int>(inst.size());
  if (m == 0) return LcpSolution{Vec(0), Vec(0), LcpSolver::empty};
  if (max_pivots <= 0) max_pivots = 50 * m + 100;

  if (inst.z_vec.minCoeff() >= 0.0) {
    return LcpSolution{Vec::Zero(m), inst.z_vec, LcpSolver::lemke};
  }

  // columns: [I | -N | -e | q]
  Mat tableau(m, 2 * m + 2);
  tableau.leftCols(m) = Mat::Identity(m, m);
  tableau.block(0, m, m, m) = -inst.n_mat;
  tableau.col(2 * m) = -Vec::Ones(m);
  tableau.col(2 * m + 1) = inst.z_vec;
  const int q_col = 2 * m + 1;
  Eigen::VectorXi basis = Eigen::VectorXi::LinSpaced(m, 0, m - 1);

  auto pivot = [&](int row, int col) {
    tableau.row(row) /= tableau(row, col);
    for (int i = 0; i < m; ++i) {
      if (i != row) tableau.row(i) -= tableau(i, col) * tableau.row(row);
    }
    tableau.col(q_col) = tableau.col(q_col).cwiseMax(0.0);
  };

  int entering = 2 * m;
  int leaving_row;
  tableau.col(q_col).minCoeff(&leaving_row);
  pivot(leaving_row, entering);
  const int z0_row = leaving_row;
  basis(leaving_row) = entering;
  entering = leaving_row + m;

  const double ratio_tol = 1e-9;
  for (int it = 0; it < max_pivots; ++it) {
    double min_ratio = std::numeric_limits<double>::infinity();
    int row = -1;
    for (int i = 0; i < m; ++i) {
      if (tableau(i, entering) > ratio_tol) {
        const double ratio = tableau(i, q_col) / tableau(i, entering);
        if (ratio < min_ratio) {
          min_ratio = ratio;
          row = i;
        }
      }
    }
    if (row == -1) {
      throw NumericalError("lemke: ray termination on SPD instance\n" +
                           inst.dump());
    }
    // ties: prefer driving the covering variable out, else lexicographic
    int best = row;
    for (int i = 0; i < m; ++i) {
      if (i == row || tableau(i, entering) <= ratio_tol) continue;
      const double ratio = tableau(i, q_col) / tableau(i, entering);
      if (std::abs(ratio - min_ratio) <= ratio_tol * (1.0 + min_ratio)) {
        if (basis(i) == 2 * m) {
          best = i;
          break;
        }
        best = lexico_smaller_row(tableau, best, i, entering);
      }
    }
    row = best;

    pivot(row, entering);
    const int leaving_var = basis(row);
    basis(row) = entering;
    if (leaving_var == 2 * m) {
      Vec x = Vec::Zero(m);
      for (int i = 0; i < m; ++i) {
        if (basis(i) >= m && basis(i) < 2 * m) {
          x(basis(i) - m) = tableau(i, q_col);
        }
      }
      LcpSolution sol{x, inst.n_mat * x + inst.z_vec, LcpSolver::lemke};
      const double feas_tol = 1e-9 * (1.0 + inst.z_vec.lpNorm<Eigen::Infinity>());
      polish(inst, sol, feas_tol);
      if (lcp_min_map(inst, sol.x).norm() >= tol) {
        throw NumericalError("lemke: complementarity tolerance not met\n" +
                             inst.dump());
      }
      return sol;
    }
    entering = leaving_var < m ? leaving_var + m : leaving_var - m;
  }
  (void)z0_row;
  throw NumericalError("lemke: pivot cap exceeded on SPD instance\n" +
                       inst.dump());
}

LcpSolution brute_force_lcp(const LcpInstance& inst) {
  const int m = static_cast<int>(inst.size());
  if (m == 0) return LcpSolution{Vec(0), Vec(0), LcpSolver::empty};
  if (m > 20) throw InvalidArgument("brute_force_lcp: instance too large");

  const double feas_tol = 1e-9 * (1.0 + inst.z_vec.lpNorm<Eigen::Infinity>());
  LcpSolution best;
  double best_violation = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    Indices support;
    for (int k = 0; k < m; ++k) {
      if (mask & (1ul << k)) support.push_back(k);
    }
    Vec x;
    if (!solve_restricted(inst.n_mat, inst.z_vec, support, x)) continue;
    const Vec y = inst.n_mat * x + inst.z_vec;
    const double violation =
        std::max(-std::min(x.minCoeff(), 0.0), -std::min(y.minCoeff(), 0.0));
    if (violation < best_violation) {
      best_violation = violation;
      best = LcpSolution{x.cwiseMax(0.0), y, LcpSolver::empty};
    }
    if (violation <= feas_tol) break;  // SPD: the feasible candidate is unique
  }
  if (best_violation > feas_tol) {
    throw NumericalError("brute_force_lcp: no feasible active set\n" +
                         inst.dump());
  }
  return best;
}

LcpSolution solve_lcp(const LcpInstance& inst, double tol) {
  if (tol <= 0.0) throw InvalidArgument("solve_lcp: tol must be > 0");
  const int m = static_cast<int>(inst.size());
  if (m == 0) return LcpSolution{Vec(0), Vec(0), LcpSolver::empty};

  // tightened complementarity target; loose inner solves inflate the
  // outer Newton iteration count
  const double ctol =
      std::min(tol, 1e-10 * (1.0 + inst.z_vec.lpNorm<Eigen::Infinity>()));
  const double feas_tol = 1e-9 * (1.0 + inst.z_vec.lpNorm<Eigen::Infinity>());

  if (auto sol = damped_newton_lcp(inst, ctol)) {
    polish(inst, *sol, feas_tol);
    if (lcp_min_map(inst, sol->x).norm() < tol) return *sol;
  }
  return lemke(inst, tol);
}

}  // namespace bssn
