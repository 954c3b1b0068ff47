#pragma once

#include <memory>

#include "bssn/types.hpp"

namespace bssn {

/// Quadratic discrepancy 1/2 ||K u - f||^2 with cached constant
/// Hessian K^T K.
class QuadraticObjective : public Objective {
 public:
  QuadraticObjective(Mat k, Vec f);

  Eigen::Index dimension() const override { return ktk_.rows(); }
  double value(const Vec& u) const override;
  Vec gradient(const Vec& u) const override;
  const Mat& hessian(const Vec& u) const override;
  bool constant_hessian() const override { return true; }

  const Mat& k_matrix() const { return k_; }
  const Vec& data() const { return f_; }

 private:
  Mat k_;
  Vec f_;
  Mat ktk_;
  Vec ktf_;
};

/// Robust L1-L2 regression loss g(u) = (1/m) sum phi(a_k^T u - y_k)
/// with phi(x) = 2(sqrt(1 + x^2/2) - 1).
class RobustObjective : public Objective {
 public:
  RobustObjective(Mat a, Vec y);

  Eigen::Index dimension() const override { return a_.cols(); }
  double value(const Vec& u) const override;
  Vec gradient(const Vec& u) const override;
  const Mat& hessian(const Vec& u) const override;

  static double phi(double x);
  static double phi_prime(double x);
  static double phi_second(double x);

  const Mat& design() const { return a_; }
  const Vec& response() const { return y_; }

 private:
  Mat a_;
  Vec y_;
  mutable Mat hess_cache_;
};

/// Sparse horizontal-motion deblurring instance. Images are flattened
/// column-major: pixel (r, c) of the N x N image sits at index c*N + r.
struct DeblurProblem {
  int image_side = 0;        // N, image is N x N
  double blur_length = 0.1;  // L, fraction of the width
  Vec f_delta;               // noisy blurred image
  double noise_level = 0.0;
};

/// Deblurring discrepancy exploiting the Kronecker structure of the
/// operator; the dense Hessian (T^2 kron I) is materialized lazily for
/// the solver's submatrix slicing.
class BlurObjective : public Objective {
 public:
  /// The Toeplitz factor is exactly singular for some image sizes (its
  /// Dirichlet-kernel eigenvalues hit zeros, e.g. N = 64 at L = 0.1), so
  /// the discrepancy alone is not strictly convex and the Newton theory
  /// does not apply. A tiny Tikhonov term (tikhonov/2)*||u||^2 restores
  /// strict convexity while perturbing the reconstruction negligibly.
  BlurObjective(int image_side, double blur_length, Vec f_delta,
                double tikhonov = 1e-4);

  Eigen::Index dimension() const override;
  double value(const Vec& u) const override;
  Vec gradient(const Vec& u) const override;
  const Mat& hessian(const Vec& u) const override;
  bool constant_hessian() const override { return true; }

  Vec apply_operator(const Vec& u) const;  // K u
  const Mat& toeplitz_factor() const { return t_; }
  double tikhonov() const { return tikhonov_; }

 private:
  int n_side_;
  Mat t_;    // Toeplitz factor
  Mat tt_;   // T^2
  Vec f_;
  double tikhonov_ = 0.0;
  mutable Mat hess_cache_;
};

/// The N x N normalized banded Toeplitz factor of the blur operator.
Mat blur_toeplitz_factor(int image_side, double blur_length);

/// Full N^2 x N^2 operator: Toeplitz factor Kronecker identity.
Mat build_blur_operator(int image_side, double blur_length);

/// Simpson-weighted moving average over the same window; used only to
/// synthesize data so the inversion never sees its own discretization.
Vec forward_blur_simpson(int image_side, double blur_length, const Vec& u);

std::shared_ptr<QuadraticObjective> quadratic_objective(const Mat& k,
                                                        const Vec& f_delta);

struct RegressionProblem {
  Mat a_rows;   // m x n design
  Vec y;        // responses
  Vec u_true;   // ground-truth coefficients (synthesis only)
  double rho = 1.0;
  double outlier_fraction = 0.0;
};

std::shared_ptr<RobustObjective> robust_objective(const RegressionProblem& reg);

}  // namespace bssn
