#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bssn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Indices = std::vector<int>;

// Configuration or input contract violations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or failed numerical subroutines.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated internal invariants (these indicate bugs, not bad input).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Per-coordinate regularization weights, all bounded below by a
/// positive constant.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(Vec w) : w_(std::move(w)) {
    if (w_.size() == 0 || w_.minCoeff() <= 0.0) {
      throw InvalidArgument("WeightVector: weights must be strictly positive");
    }
    lower_bound_ = w_.minCoeff();
  }
  static WeightVector constant(Eigen::Index n, double w) {
    return WeightVector(Vec::Constant(n, w));
  }

  const Vec& values() const { return w_; }
  double lower_bound() const { return lower_bound_; }
  Eigen::Index size() const { return w_.size(); }
  double operator[](Eigen::Index k) const { return w_(k); }

 private:
  Vec w_;
  double lower_bound_ = 0.0;
};

/// Smooth part of the objective: value, gradient and Hessian callbacks.
/// Implementations must be reentrant; hessian() may return a reference
/// to an internal cache (guarded by constant_hessian() for quadratics).
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual double value(const Vec& u) const = 0;
  virtual Vec gradient(const Vec& u) const = 0;
  virtual const Mat& hessian(const Vec& u) const = 0;
  virtual bool constant_hessian() const { return false; }
};

/// The full problem: minimize g(u) + sum_k w_k |u_k|, with the scaling
/// parameter gamma entering only through the residual reformulation.
struct WeightedL1Problem {
  std::shared_ptr<const Objective> objective;
  WeightVector weights;
  double gamma = 1.0;

  WeightedL1Problem() = default;
  WeightedL1Problem(std::shared_ptr<const Objective> obj, WeightVector w,
                    double g)
      : objective(std::move(obj)), weights(std::move(w)), gamma(g) {
    if (gamma <= 0.0) throw InvalidArgument("gamma must be positive");
    if (weights.size() != objective->dimension()) {
      throw InvalidArgument("weight/objective dimension mismatch");
    }
  }

  Eigen::Index dimension() const { return objective->dimension(); }

  double penalized_value(const Vec& u) const {
    return objective->value(u) + weights.values().dot(u.cwiseAbs());
  }
};

enum class Variant { bssn, modbssn, hybrid };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct SolverConfig {
  double gamma = 1.0;
  double armijo_sigma = 0.01;
  double armijo_beta = 0.5;
  double tol = 1e-7;
  Variant variant = Variant::modbssn;
  int j_max = 250;
  double t_min = 1e-5;
  int max_outer = 5000;
  int max_backtracks = 60;
  // Boundary-set widening; 0 means exact floating-point equality.
  double boundary_eps = 0.0;
  // Abort if an iterate norm explodes (unbounded level sets guard).
  double divergence_norm_cap = 1e12;
  bool store_iterates = false;

  void validate() const {
    if (gamma <= 0.0) throw InvalidArgument("gamma must be > 0");
    if (armijo_sigma <= 0.0 || armijo_sigma >= 0.5)
      throw InvalidArgument("armijo_sigma must lie in (0, 1/2)");
    if (armijo_beta <= 0.0 || armijo_beta >= 1.0)
      throw InvalidArgument("armijo_beta must lie in (0, 1)");
    if (tol <= 0.0) throw InvalidArgument("tol must be > 0");
    if (t_min <= 0.0) throw InvalidArgument("t_min must be > 0");
  }
};

struct IterationRecord {
  int j = 0;
  double residual_norm = 0.0;
  double objective = 0.0;
  double step = 0.0;       // stepsize taken to reach this iterate
  int lcp_size = 0;        // complementarity block solved this step
  int sle_size = 0;        // reduced linear-system dimension |A-bar|
  int sle_count = 0;       // factorization-backed solves this step
  Variant variant_active = Variant::bssn;
};

struct SolveResult {
  Vec u_star;
  std::vector<IterationRecord> records;
  bool converged = false;
  std::optional<int> switch_step;
  std::vector<Vec> iterates;  // filled when SolverConfig::store_iterates
};

}  // namespace bssn
