#include "bssn/objectives.hpp"

#include <cmath>
#include <iostream>

namespace bssn {

QuadraticObjective::QuadraticObjective(Mat k, Vec f)
    : k_(std::move(k)), f_(std::move(f)) {
  if (k_.rows() != f_.size()) {
    throw InvalidArgument("QuadraticObjective: K/f dimension mismatch");
  }
  ktk_ = k_.transpose() * k_;
  ktf_ = k_.transpose() * f_;
}

double QuadraticObjective::value(const Vec& u) const {
  return 0.5 * (k_ * u - f_).squaredNorm();
}

Vec QuadraticObjective::gradient(const Vec& u) const {
  return ktk_ * u - ktf_;
}

const Mat& QuadraticObjective::hessian(const Vec&) const { return ktk_; }

double RobustObjective::phi(double x) {
  return 2.0 * (std::sqrt(1.0 + 0.5 * x * x) - 1.0);
}

double RobustObjective::phi_prime(double x) {
  return x / std::sqrt(1.0 + 0.5 * x * x);
}

double RobustObjective::phi_second(double x) {
  const double q = 1.0 + 0.5 * x * x;
  return 1.0 / (q * std::sqrt(q));
}

RobustObjective::RobustObjective(Mat a, Vec y)
    : a_(std::move(a)), y_(std::move(y)) {
  if (a_.rows() != y_.size()) {
    throw InvalidArgument("RobustObjective: A/y dimension mismatch");
  }
  if (a_.rows() < a_.cols()) {
    throw InvalidArgument("RobustObjective: need m >= n");
  }
}

double RobustObjective::value(const Vec& u) const {
  const Vec r = a_ * u - y_;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) sum += phi(r(k));
  return sum / static_cast<double>(a_.rows());
}

Vec RobustObjective::gradient(const Vec& u) const {
  const Vec r = a_ * u - y_;
  Vec s(r.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) s(k) = phi_prime(r(k));
  return a_.transpose() * s / static_cast<double>(a_.rows());
}

const Mat& RobustObjective::hessian(const Vec& u) const {
  const Vec r = a_ * u - y_;
  Vec d(r.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) d(k) = phi_second(r(k));
  hess_cache_ =
      a_.transpose() * d.asDiagonal() * a_ / static_cast<double>(a_.rows());
  return hess_cache_;
}

Mat blur_toeplitz_factor(int image_side, double blur_length) {
  if (image_side < 2) throw InvalidArgument("blur: image side must be >= 2");
  if (blur_length <= 0.0 || blur_length >= 1.0) {
    throw InvalidArgument("blur: blur length must lie in (0, 1)");
  }
  const int half = static_cast<int>(image_side * blur_length);
  if (half == 0) {
    std::cerr << "warning: blur bandwidth collapsed to 1; operator is the "
                 "identity\n";
  }
  Mat t = Mat::Zero(image_side, image_side);
  const double scale = 1.0 / static_cast<double>(2 * half + 1);
  for (int i = 0; i < image_side; ++i) {
    for (int j = std::max(0, i - half); j <= std::min(image_side - 1, i + half);
         ++j) {
      t(i, j) = scale;
    }
  }
  return t;
}

Mat build_blur_operator(int image_side, double blur_length) {
  const Mat t = blur_toeplitz_factor(image_side, blur_length);
  const int n = image_side;
  Mat k = Mat::Zero(n * n, n * n);
  // kron(T, I): block (i, j) is T(i, j) * I
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (t(i, j) != 0.0) {
        k.block(i * n, j * n, n, n) = t(i, j) * Mat::Identity(n, n);
      }
    }
  }
  return k;
}

Vec forward_blur_simpson(int image_side, double blur_length, const Vec& u) {
  const int n = image_side;
  if (u.size() != static_cast<Eigen::Index>(n) * n) {
    throw InvalidArgument("forward_blur_simpson: image size mismatch");
  }
  const int half = static_cast<int>(n * blur_length);
  Vec weights;
  if (half == 0) {
    std::cerr << "warning: Simpson window too short, using identity weights\n";
    weights = Vec::Ones(1);
  } else {
    // composite Simpson weights 1,4,2,4,...,4,1 over 2*half intervals,
    // renormalized to unit mass
    weights.resize(2 * half + 1);
    weights(0) = 1.0;
    weights(2 * half) = 1.0;
    for (int i = 1; i < 2 * half; ++i) weights(i) = (i % 2 == 1) ? 4.0 : 2.0;
    weights /= weights.sum();
  }

  Eigen::Map<const Mat> img(u.data(), n, n);
  Mat out = Mat::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    double mass = 0.0;
    for (int o = -half; o <= half; ++o) {
      const int cc = c + o;
      if (cc < 0 || cc >= n) continue;
      const double wgt = weights(o + half);
      mass += wgt;
      out.col(c) += wgt * img.col(cc);
    }
    if (mass > 0.0) out.col(c) /= mass;  // truncated windows keep unit mass
  }
  return Eigen::Map<const Vec>(out.data(), n * n);
}

std::shared_ptr<QuadraticObjective> quadratic_objective(const Mat& k,
                                                        const Vec& f_delta) {
  return std::make_shared<QuadraticObjective>(k, f_delta);
}

std::shared_ptr<RobustObjective> robust_objective(const RegressionProblem& reg) {
  return std::make_shared<RobustObjective>(reg.a_rows, reg.y);
}

BlurObjective::BlurObjective(int image_side, double blur_length, Vec f_delta,
                             double tikhonov)
    : n_side_(image_side),
      t_(blur_toeplitz_factor(image_side, blur_length)),
      f_(std::move(f_delta)),
      tikhonov_(tikhonov) {
  if (f_.size() != static_cast<Eigen::Index>(n_side_) * n_side_) {
    throw InvalidArgument("BlurObjective: data size mismatch");
  }
  if (tikhonov_ < 0.0) {
    throw InvalidArgument("BlurObjective: tikhonov must be >= 0");
  }
  tt_ = t_ * t_;
}

Eigen::Index BlurObjective::dimension() const {
  return static_cast<Eigen::Index>(n_side_) * n_side_;
}

Vec BlurObjective::apply_operator(const Vec& u) const {
  // (T kron I) u = vec(U T) for column-major U, T symmetric
  Eigen::Map<const Mat> img(u.data(), n_side_, n_side_);
  const Mat blurred = img * t_;
  return Eigen::Map<const Vec>(blurred.data(), dimension());
}

double BlurObjective::value(const Vec& u) const {
  return 0.5 * (apply_operator(u) - f_).squaredNorm() +
         0.5 * tikhonov_ * u.squaredNorm();
}

Vec BlurObjective::gradient(const Vec& u) const {
  Eigen::Map<const Mat> img(u.data(), n_side_, n_side_);
  Eigen::Map<const Mat> data(f_.data(), n_side_, n_side_);
  const Mat g = (img * t_ - data) * t_;
  return Eigen::Map<const Vec>(g.data(), dimension()) + tikhonov_ * u;
}

const Mat& BlurObjective::hessian(const Vec&) const {
  if (hess_cache_.size() == 0) {
    const Eigen::Index n = dimension();
    hess_cache_ = Mat::Zero(n, n);
    for (int i = 0; i < n_side_; ++i) {
      for (int j = 0; j < n_side_; ++j) {
        if (tt_(i, j) != 0.0) {
          hess_cache_.block(static_cast<Eigen::Index>(i) * n_side_,
                            static_cast<Eigen::Index>(j) * n_side_, n_side_,
                            n_side_) =
              tt_(i, j) * Mat::Identity(n_side_, n_side_);
        }
      }
    }
    hess_cache_.diagonal().array() += tikhonov_;
  }
  return hess_cache_;
}

}  // namespace bssn
