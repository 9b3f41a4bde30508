#pragma once

#include <random>

#include <Eigen/Dense>

#include "affsym/energetics.hpp"

namespace testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  MatrixXd matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * uniform();
    return m;
  }

  VectorXd vector(Eigen::Index n, double scale = 1.0) { return matrix(n, 1, scale); }

  // Well conditioned, positive determinant.
  MatrixXd phi(Eigen::Index n, double spread = 0.4) {
    MatrixXd m = MatrixXd::Identity(n, n) + matrix(n, n, spread);
    if (m.determinant() < 0) m.col(0) *= -1.0;
    return m;
  }

  MatrixXd spd(Eigen::Index n) {
    const MatrixXd a = matrix(n, n, 0.5);
    return MatrixXd::Identity(n, n) + a * a.transpose();
  }

  MatrixXd orthogonal(Eigen::Index n) {
    Eigen::HouseholderQR<MatrixXd> qr(matrix(n, n));
    MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Constants that satisfy every kinetic model at once.
inline affsym::InertiaParameters full_params(Eigen::Index n, Rng& rng) {
  affsym::InertiaParameters p;
  p.m = 1.3;
  p.J = rng.spd(n);
  p.I_scalar = 0.7;
  p.A_coeff = 1.1;
  p.B_coeff = 0.35;
  p.alpha = 1.1;
  return p;
}

}  // namespace testing
