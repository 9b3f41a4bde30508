#pragma once

// Bipolar canonical variables and the lattice Hamiltonians they produce.
//
// With phi = L D R^-1, D = diag(exp q), the two orthogonal factors rotate with
// chi_hat = L^-1 dL/dt and theta_hat = R^-1 dR/dt. Spins rho_hat, tau_hat are
// the momenta conjugate to those quasi-velocities under the pairing
//   <rho_hat, chi_hat> = sum_{a<b} rho_hat(a,b) chi_hat(a,b),
// and M = -rho_hat - tau_hat, N = rho_hat - tau_hat.

#include <vector>

#include "affsym/energetics.hpp"

namespace affsym {

struct BipolarQuasiVelocities {
  VectorXd qdot;
  MatrixXd chi_hat;    // antisymmetric
  MatrixXd theta_hat;  // antisymmetric
};

struct BipolarCanonicalState {
  VectorXd q;
  VectorXd p;
  VectorXd Q;
  VectorXd P;  // P_a = p_a / Q^a
  MatrixXd rho_hat;
  MatrixXd tau_hat;
  MatrixXd M;
  MatrixXd N;
};

/// Differentiates phi = L D R^T along phidot. Throws DegenerateInvariants when
/// two invariants coincide.
BipolarQuasiVelocities bipolar_quasi_velocities(const BipolarDecomposition<double>& bp, const MatrixXd& phidot);

/// Inverse of the above: phidot = L (chi_hat D + dD/dt - D theta_hat) R^T.
MatrixXd phidot_from_quasi_velocities(const BipolarDecomposition<double>& bp, const BipolarQuasiVelocities& w);

/// Internal degrees of freedom only; translational motion is ignored.
BipolarCanonicalState to_bipolar_canonical(const KineticModel& model, const KinematicState<double>& state);

inline constexpr double kCoincidentGap = 1e-10;
inline constexpr double kSpinNegligible = 1e-12;

/// sum_a p_a^2 + 1/16 sum_{a!=b} M_ab^2 / sinh^2((q^a-q^b)/2)
///             - 1/16 sum_{a!=b} N_ab^2 / cosh^2((q^a-q^b)/2)
double casimir_C2(const BipolarCanonicalState& s);

/// 1/(2I) sum P_a^2 + 1/(8I) sum_{a!=b} M_ab^2/(Q^a-Q^b)^2 + 1/(8I) sum_{a!=b} N_ab^2/(Q^a+Q^b)^2
double isotropic_hamiltonian(const BipolarCanonicalState& s, double I_scalar);

struct PairInteraction {
  Eigen::Index a = 0;
  Eigen::Index b = 0;
  double repulsive = 0.0;   // >= 0, both orderings of the pair included
  double attractive = 0.0;  // <= 0
};

std::vector<PairInteraction> interaction_profile(const BipolarCanonicalState& s);

}  // namespace affsym
