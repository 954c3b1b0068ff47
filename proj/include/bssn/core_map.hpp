#pragma once

#include "bssn/types.hpp"

namespace bssn {

/// Classification of coordinates into active/inactive sets by the
/// relations between u_k and gamma*(grad g)_k +- gamma*w_k, together
/// with the sign-inconsistent subsets and the modified sets excising
/// them. All lists are sorted ascending and derived from a single
/// gradient evaluation.
struct IndexPartition {
  // plain partition
  Indices a_plus, a_minus, i_zero, i_plus, i_minus;
  // sign-inconsistent subsets
  Indices a_plus_plus, a_minus_minus, i_zero_plus, i_zero_minus;
  // modified partition
  Indices mod_a_plus, mod_a_minus, mod_i_zero, mod_i_plus, mod_i_minus;

  Indices active(bool modified) const;   // A+ u A-  (or modified)
  Indices inactive_zero(bool modified) const;
  Indices inactive_plus(bool modified) const;
  Indices inactive_minus(bool modified) const;
};

/// Componentwise shrinkage sign(v_k) * max(|v_k| - beta_k, 0).
Vec soft_threshold(const Vec& v, const Vec& beta);

/// Residual map F(u) = u - S_{gamma*w}(u - gamma*grad g(u)); its unique
/// zero is the minimizer of the penalized problem.
Vec residual_map(const WeightedL1Problem& problem, const Vec& u);

/// Merit functional ||F(u)||_2^2.
double merit(const WeightedL1Problem& problem, const Vec& u);

/// Populate all fifteen index lists at u. boundary_eps widens the
/// equality sets I+- from exact comparison to |.| <= eps.
IndexPartition classify(const WeightedL1Problem& problem, const Vec& u,
                        double boundary_eps = 0.0);

/// Directional derivative F'(u, d), componentwise per the plain sets.
Vec dir_derivative_F(const WeightedL1Problem& problem, const Vec& u,
                     const Vec& d, double boundary_eps = 0.0);

/// Theta'(u, d) = 2 <F'(u,d), F(u)>.
double dir_derivative_merit(const WeightedL1Problem& problem, const Vec& u,
                            const Vec& d, double boundary_eps = 0.0);

namespace detail {
void require_finite(const Vec& v, const char* what);
}

}  // namespace bssn
