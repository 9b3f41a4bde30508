#pragma once

// Configurations and velocities of an affinely-rigid body.
//
// A material point with label a^K sits at xi^i = x^i + phi^i_K a^K, so the
// configuration is a translation x together with an invertible matrix phi.
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affsym/error.hpp"

namespace affsym {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename Scalar>
struct KinematicState {
  Vec<Scalar> x;       // centre of mass
  Vec<Scalar> v;       // dx/dt
  Mat<Scalar> phi;     // internal configuration phi^i_K
  Mat<Scalar> phidot;  // V^i_K = dphi/dt

  Eigen::Index dim() const { return phi.rows(); }

  static KinematicState internal(const Mat<Scalar>& phi, const Mat<Scalar>& phidot) {
    const auto n = phi.rows();
    return {Vec<Scalar>::Zero(n), Vec<Scalar>::Zero(n), phi, phidot};
  }
};

template <typename Scalar>
struct AffineVelocities {
  Mat<Scalar> omega;      // spatial: phidot phi^-1
  Mat<Scalar> omega_hat;  // material: phi^-1 phidot
  Vec<Scalar> v_hat;      // phi^-1 v
};

template <typename Scalar>
struct DeformationTensors {
  Mat<Scalar> cauchy;  // C_ij = eta_AB phi^-1A_i phi^-1B_j
  Mat<Scalar> green;   // G_AB = g_ij phi^i_A phi^j_B
};

/// phi = L diag(Q) R^-1 with L, R orthogonal, Q sorted descending and
/// det L = +1. q = ln Q.
template <typename Scalar>
struct BipolarDecomposition {
  Mat<Scalar> L;
  Mat<Scalar> R;
  Vec<Scalar> Q;
  Vec<Scalar> q;
  bool degenerate = false;  // two invariants coincide; L, R not unique
};

struct InertiaParameters {
  double m = 1.0;
  MatrixXd J;  // second moment J^AB
  std::optional<double> I_scalar;
  std::optional<double> A_coeff;
  std::optional<double> B_coeff;
  std::optional<double> alpha;  // lattice inertia: C(2) = 2 alpha T; doubly-affine with B = 0 has alpha = A
  // Fourth-order constants stored as n^2 x n^2 arrays over column-major
  // vec indices: Ltensor(A + n*B, C + n*D) multiplies Omega_hat(A,B) Omega_hat(C,D),
  // Rtensor(i + n*j, k + n*l) multiplies Omega(i,j) Omega(k,l).
  std::optional<MatrixXd> Ltensor;
  std::optional<MatrixXd> Rtensor;
};

inline constexpr double kSingularDetFactor = 1e-13;
inline constexpr double kDegenerateInvariantTol = 1e-10;

template <typename Derived>
bool is_singular(const Eigen::MatrixBase<Derived>& phi) {
  using std::abs;
  using std::pow;
  const auto n = static_cast<double>(phi.rows());
  const double scale = pow(static_cast<double>(phi.norm()), n);
  return !(abs(static_cast<double>(phi.determinant())) >= kSingularDetFactor * scale) ||
         scale == 0.0;
}

template <typename Derived>
void require_nonsingular(const Eigen::MatrixBase<Derived>& phi, const char* what) {
  if (phi.rows() != phi.cols() || phi.rows() == 0) {
    fail(ErrorKind::InvalidArgument, std::string(what) + ": configuration must be a nonempty square matrix");
  }
  if (is_singular(phi)) {
    fail(ErrorKind::SingularConfiguration, std::string(what) + ": |det phi| below threshold");
  }
}

template <typename Scalar>
AffineVelocities<Scalar> affine_velocities(const KinematicState<Scalar>& s) {
  require_nonsingular(s.phi, "affine_velocities");
  const Eigen::PartialPivLU<Mat<Scalar>> lu(s.phi);
  AffineVelocities<Scalar> out;
  out.omega_hat = lu.solve(s.phidot);
  // Omega = phidot phi^-1  <=>  phi^T Omega^T = phidot^T
  out.omega = s.phi.transpose().partialPivLu().solve(s.phidot.transpose()).transpose();
  out.v_hat = s.v.size() ? Vec<Scalar>(lu.solve(s.v)) : Vec<Scalar>();
  return out;
}

template <typename Scalar>
DeformationTensors<Scalar> deformation_tensors(const Mat<Scalar>& phi, const Mat<Scalar>& g,
                                               const Mat<Scalar>& eta) {
  require_nonsingular(phi, "deformation_tensors");
  const Mat<Scalar> phi_inv = phi.inverse();
  DeformationTensors<Scalar> out;
  out.cauchy = phi_inv.transpose() * eta * phi_inv;
  out.green = phi.transpose() * g * phi;
  out.cauchy = (out.cauchy + out.cauchy.transpose()) / Scalar(2);
  out.green = (out.green + out.green.transpose()) / Scalar(2);
  return out;
}

template <typename Scalar>
BipolarDecomposition<Scalar> bipolar(const Mat<Scalar>& phi) {
  require_nonsingular(phi, "bipolar");
  const auto n = phi.rows();
  Eigen::JacobiSVD<Mat<Scalar>> svd(phi, Eigen::ComputeFullU | Eigen::ComputeFullV);

  BipolarDecomposition<Scalar> out;
  out.L = svd.matrixU();
  out.R = svd.matrixV();
  out.Q = svd.singularValues();  // already descending
  // Fold a reflection of L into R: flipping u_k and v_k together keeps phi.
  if (out.L.determinant() < Scalar(0)) {
    out.L.col(n - 1) *= Scalar(-1);
    out.R.col(n - 1) *= Scalar(-1);
  }
  out.q = out.Q.array().log().matrix();
  for (Eigen::Index a = 0; a + 1 < n; ++a) {
    if (out.Q(a) - out.Q(a + 1) <= kDegenerateInvariantTol * out.Q(0)) out.degenerate = true;
  }
  return out;
}

inline InertiaParameters inertia_from_point_masses(std::span<const double> masses,
                                                   std::span<const VectorXd> positions) {
  if (masses.empty()) fail(ErrorKind::EmptyBody, "inertia_from_point_masses: no masses");
  if (masses.size() != positions.size()) {
    fail(ErrorKind::InvalidArgument, "inertia_from_point_masses: masses and positions differ in length");
  }
  const auto n = positions.front().size();
  InertiaParameters p;
  p.m = 0.0;
  p.J = MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (masses[k] < 0.0) fail(ErrorKind::InvalidArgument, "inertia_from_point_masses: negative mass");
    if (positions[k].size() != n) fail(ErrorKind::InvalidArgument, "inertia_from_point_masses: ragged positions");
    p.m += masses[k];
    p.J.noalias() += masses[k] * positions[k] * positions[k].transpose();
  }
  return p;
}

/// max_{a,b} |q^a - q^b|
template <typename Derived>
double q_spread(const Eigen::MatrixBase<Derived>& q) {
  return q.size() ? static_cast<double>(q.maxCoeff() - q.minCoeff()) : 0.0;
}

}  // namespace affsym
