#pragma once

// Matrix exponential by scaling and squaring with a degree-13 Pade kernel
// (Higham's 2005 parameters), and the exponential geodesics built from it.

#include <cmath>

#include <Eigen/Dense>

#include "affsym/kinematics.hpp"

namespace affsym {

template <typename Derived>
Mat<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& A_in) {
  using Scalar = typename Derived::Scalar;
  using M = Mat<Scalar>;
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const auto n = A_in.rows();
  M A = A_in;
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return M::Identity(n, n);
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  if (s > 0) A /= std::ldexp(1.0, s);

  const M I = M::Identity(n, n);
  const M A2 = A * A;
  const M A4 = A2 * A2;
  const M A6 = A4 * A2;
  M U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  M V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  M E = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) E = E * E;
  return E;
}

/// phi(t) = phi0 exp(t Omega_hat0): geodesics of the doubly-affine kinetic energy.
template <typename Scalar>
Mat<Scalar> exponential_geodesic(const Mat<Scalar>& phi0, const Mat<Scalar>& omega_hat0, Scalar t) {
  return phi0 * expm(t * omega_hat0);
}

}  // namespace affsym
