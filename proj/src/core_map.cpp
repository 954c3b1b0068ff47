#include "bssn/core_map.hpp"

#include <algorithm>
#include <cmath>

namespace bssn {

namespace detail {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(what) + " contains non-finite entries");
  }
}

}  // namespace detail

Indices IndexPartition::active(bool modified) const {
  const Indices& p = modified ? mod_a_plus : a_plus;
  const Indices& m = modified ? mod_a_minus : a_minus;
  Indices out;
  out.reserve(p.size() + m.size());
  std::merge(p.begin(), p.end(), m.begin(), m.end(), std::back_inserter(out));
  return out;
}

Indices IndexPartition::inactive_zero(bool modified) const {
  return modified ? mod_i_zero : i_zero;
}

Indices IndexPartition::inactive_plus(bool modified) const {
  return modified ? mod_i_plus : i_plus;
}

Indices IndexPartition::inactive_minus(bool modified) const {
  return modified ? mod_i_minus : i_minus;
}

Vec soft_threshold(const Vec& v, const Vec& beta) {
  if (v.size() != beta.size()) {
    throw InvalidArgument("soft_threshold: length mismatch");
  }
  if (beta.size() > 0 && beta.minCoeff() <= 0.0) {
    throw InvalidArgument("soft_threshold: beta must be strictly positive");
  }
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double shrunk = std::abs(v(k)) - beta(k);
    out(k) = shrunk > 0.0 ? (v(k) > 0.0 ? shrunk : -shrunk) : 0.0;
  }
  return out;
}

Vec residual_map(const WeightedL1Problem& problem, const Vec& u) {
  if (u.size() != problem.dimension()) {
    throw InvalidArgument("residual_map: dimension mismatch");
  }
  const Vec grad = problem.objective->gradient(u);
  detail::require_finite(grad, "gradient");
  const Vec beta = problem.gamma * problem.weights.values();
  return u - soft_threshold(u - problem.gamma * grad, beta);
}

double merit(const WeightedL1Problem& problem, const Vec& u) {
  return residual_map(problem, u).squaredNorm();
}

IndexPartition classify(const WeightedL1Problem& problem, const Vec& u,
                        double boundary_eps) {
  detail::require_finite(u, "iterate");
  const Vec grad = problem.objective->gradient(u);
  detail::require_finite(grad, "gradient");
  const double gamma = problem.gamma;

  IndexPartition p;
  for (int k = 0; k < static_cast<int>(u.size()); ++k) {
    const double hi = gamma * grad(k) + gamma * problem.weights[k];
    const double lo = gamma * grad(k) - gamma * problem.weights[k];
    const double uk = u(k);

    const bool on_hi = boundary_eps > 0.0 ? std::abs(uk - hi) <= boundary_eps
                                          : uk == hi;
    const bool on_lo = boundary_eps > 0.0 ? std::abs(uk - lo) <= boundary_eps
                                          : uk == lo;

    if (on_hi) {
      p.i_plus.push_back(k);
      p.mod_i_plus.push_back(k);
    } else if (on_lo) {
      p.i_minus.push_back(k);
      p.mod_i_minus.push_back(k);
    } else if (hi < uk) {
      p.a_plus.push_back(k);
      if (uk < 0.0) {
        p.a_plus_plus.push_back(k);
        p.mod_i_plus.push_back(k);
      } else {
        p.mod_a_plus.push_back(k);
      }
    } else if (uk < lo) {
      p.a_minus.push_back(k);
      if (uk > 0.0) {
        p.a_minus_minus.push_back(k);
        p.mod_i_minus.push_back(k);
      } else {
        p.mod_a_minus.push_back(k);
      }
    } else {
      p.i_zero.push_back(k);
      if (hi < 0.0) {
        p.i_zero_plus.push_back(k);
        p.mod_i_plus.push_back(k);
      } else if (lo > 0.0) {
        p.i_zero_minus.push_back(k);
        p.mod_i_minus.push_back(k);
      } else {
        p.mod_i_zero.push_back(k);
      }
    }
  }
  // membership order above appends A/I leftovers after the boundary
  // indices; restore ascending order for the merged modified lists
  std::sort(p.mod_i_plus.begin(), p.mod_i_plus.end());
  std::sort(p.mod_i_minus.begin(), p.mod_i_minus.end());
  return p;
}

Vec dir_derivative_F(const WeightedL1Problem& problem, const Vec& u,
                     const Vec& d, double boundary_eps) {
  const IndexPartition p = classify(problem, u, boundary_eps);
  const Mat& hess = problem.objective->hessian(u);
  if (!hess.allFinite()) throw NumericalError("hessian has non-finite entries");
  const Vec md = problem.gamma * (hess * d);

  Vec out(u.size());
  for (int k : p.a_plus) out(k) = md(k);
  for (int k : p.a_minus) out(k) = md(k);
  for (int k : p.i_zero) out(k) = d(k);
  for (int k : p.i_plus) out(k) = std::min(md(k), d(k));
  for (int k : p.i_minus) out(k) = std::max(md(k), d(k));
  return out;
}

double dir_derivative_merit(const WeightedL1Problem& problem, const Vec& u,
                            const Vec& d, double boundary_eps) {
  return 2.0 * dir_derivative_F(problem, u, d, boundary_eps)
                   .dot(residual_map(problem, u));
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::bssn: return "bssn";
    case Variant::modbssn: return "modbssn";
    case Variant::hybrid: return "hybrid";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "bssn") return Variant::bssn;
  if (s == "modbssn") return Variant::modbssn;
  if (s == "hybrid") return Variant::hybrid;
  throw InvalidArgument("unknown variant: " + s);
}

}  // namespace bssn
