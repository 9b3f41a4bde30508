#pragma once

// Pointwise geometry of frame fields.
//
// Index conventions, fixed throughout:
//   coframe(A, mu)        = e^A_mu
//   d1(A, mu, nu)         = d_nu e^A_mu
//   d2(A, mu, nu, kappa)  = d_kappa d_nu e^A_mu
//   Gamma(lam, mu, nu)    = Gamma^lam_{mu nu}, nu the derivative slot:
//                           nabla_nu w_mu = d_nu w_mu - Gamma^lam_{mu nu} w_lam
//   S(lam, mu, nu)        = S^lam_{mu nu} = (Gamma^lam_{mu nu} - Gamma^lam_{nu mu}) / 2
//   Omega(C, A, B)        = Omega^C_{AB}, [e_A, e_B] = Omega^C_{AB} e_C

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affsym/dual.hpp"
#include "affsym/error.hpp"
#include "affsym/tensor.hpp"

namespace affsym {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class FrameMode { Analytic, FiniteDifference };

struct FrameField {
  Eigen::Index n = 0;
  std::function<MatrixXd(const VectorXd&)> coframe;
  std::function<Tensor3d(const VectorXd&)> dcoframe;   // Analytic mode
  std::function<Tensor4d(const VectorXd&)> d2coframe;  // optional
  FrameMode mode = FrameMode::Analytic;
  double fd_step = 1e-5;

  /// Derivatives by central differences of `coframe` with spacing `step`.
  static FrameField finite_difference(Eigen::Index n, std::function<MatrixXd(const VectorXd&)> coframe,
                                      double step = 1e-5);
};

/// Wraps a coframe written generically in its scalar type; first and second
/// derivatives come from nested dual numbers.
template <typename F>
FrameField analytic_frame(Eigen::Index n, F coframe) {
  using D1 = Dual<double>;
  using D2 = Dual<D1>;
  FrameField out;
  out.n = n;
  out.mode = FrameMode::Analytic;
  out.coframe = [coframe](const VectorXd& x) -> MatrixXd { return coframe(x); };
  out.dcoframe = [coframe, n](const VectorXd& x) {
    Tensor3d d(n);
    for (Eigen::Index nu = 0; nu < n; ++nu) {
      Eigen::Matrix<D1, Eigen::Dynamic, 1> xd(n);
      for (Eigen::Index i = 0; i < n; ++i) xd(i) = D1(x(i), i == nu ? 1.0 : 0.0);
      const auto E = coframe(xd);
      for (Eigen::Index A = 0; A < n; ++A)
        for (Eigen::Index mu = 0; mu < n; ++mu) d(A, mu, nu) = E(A, mu).d;
    }
    return d;
  };
  out.d2coframe = [coframe, n](const VectorXd& x) {
    Tensor4d d(n);
    for (Eigen::Index nu = 0; nu < n; ++nu)
      for (Eigen::Index ka = nu; ka < n; ++ka) {
        Eigen::Matrix<D2, Eigen::Dynamic, 1> xd(n);
        for (Eigen::Index i = 0; i < n; ++i)
          xd(i) = D2(D1(x(i), i == ka ? 1.0 : 0.0), D1(i == nu ? 1.0 : 0.0, 0.0));
        const auto E = coframe(xd);
        for (Eigen::Index A = 0; A < n; ++A)
          for (Eigen::Index mu = 0; mu < n; ++mu) d(A, mu, nu, ka) = d(A, mu, ka, nu) = E(A, mu).d.d;
      }
    return d;
  };
  return out;
}

struct FrameJet {
  MatrixXd coframe;  // e^A_mu
  MatrixXd frame;    // frame(mu, A) = e^mu_A
  Tensor3d d1;
  std::optional<Tensor4d> d2;
};

/// Throws SingularFrame at a degenerate coframe; SecondDerivativesUnavailable
/// when `need_second` and the frame has no analytic second derivatives.
FrameJet evaluate(const FrameField& frame, const VectorXd& x, bool need_second = false);

MatrixXd minkowski(Eigen::Index n);

Tensor3d teleparallel_connection(const FrameField& frame, const VectorXd& x);

/// Nonholonomy object of the frame at x.
Tensor3d nonholonomy(const FrameField& frame, const VectorXd& x);

struct TorsionResult {
  Tensor3d S;
  Tensor3d omega;          // nonholonomy
  double two_path_residual = 0.0;  // max |S - 1/2 Omega e e e|
};

TorsionResult torsion(const FrameField& frame, const VectorXd& x);

/// g_mu_nu = eta_AB e^A_mu e^B_nu
MatrixXd internal_metric(const MatrixXd& coframe, const MatrixXd& eta);
MatrixXd internal_metric(const FrameField& frame, const VectorXd& x, const MatrixXd& eta);

/// gamma_AB = Omega^K_{LA} Omega^L_{KB}
MatrixXd killing_form(const Tensor3d& omega);

struct KillingResult {
  MatrixXd gamma;     // Killing form of the structure constants
  MatrixXd g_e;       // S^a_{b mu} S^b_{a nu}
  MatrixXd pullback;  // gamma_AB e^A_mu e^B_nu
  double factor = 0.0;  // least-squares c in g_e = c * pullback; NaN if pullback = 0
  double proportionality_residual = 0.0;
};

/// From the frame's own torsion and nonholonomy at x.
KillingResult killing_construction(const FrameField& frame, const VectorXd& x);
/// From constant structure constants; torsion is built from them at the given coframe.
KillingResult killing_construction(const Tensor3d& omega, const MatrixXd& coframe);

struct WeitzenbockInvariants {
  double J1 = 0.0;
  double J2 = 0.0;
  double J3 = 0.0;
  double Lprime = 0.0;  // (J1 + 2 J2 - 4 J3) sqrt|g|
};

WeitzenbockInvariants weitzenbock_invariants(const FrameField& frame, const VectorXd& x, const MatrixXd& eta);
WeitzenbockInvariants weitzenbock_invariants(const Tensor3d& S, const MatrixXd& g);

struct LagrangeTensor {
  MatrixXd L;
  double A = 0.0, B = 0.0, C = 0.0;
  double density = 0.0;  // sqrt|det L|

  MatrixXd symmetric() const { return 0.5 * (L + L.transpose()); }
  MatrixXd antisymmetric() const { return 0.5 * (L - L.transpose()); }
};

LagrangeTensor lagrange_tensor(const FrameField& frame, const VectorXd& x, double A, double B, double C);
LagrangeTensor lagrange_tensor(const Tensor3d& S, double A, double B, double C);

struct ContorsionResult {
  Tensor3d K;                       // K^lam_{mu nu}
  double metric_residual = 0.0;     // max |nabla g| for Levi-Civita + K
  double decomposition_residual = 0.0;  // max |Gamma_tel - (Levi-Civita + K)|
};

ContorsionResult contorsion(const FrameField& frame, const VectorXd& x, const MatrixXd& eta);

struct MetricField {
  Eigen::Index n = 0;
  std::function<MatrixXd(const VectorXd&)> g;
  std::function<Tensor3d(const VectorXd&)> dg;   // (a, b, mu) = d_mu g_ab
  std::function<Tensor4d(const VectorXd&)> d2g;  // (a, b, mu, nu) = d_nu d_mu g_ab
  FrameMode mode = FrameMode::Analytic;
  double fd_step = 1e-4;
};

/// Metric generic in its scalar type, derivatives by nested dual numbers.
template <typename F>
MetricField analytic_metric(Eigen::Index n, F metric) {
  // The coframe machinery already differentiates matrix-valued callables.
  const auto jet = analytic_frame(n, metric);
  MetricField out;
  out.n = n;
  out.g = jet.coframe;
  out.dg = jet.dcoframe;
  out.d2g = jet.d2coframe;
  return out;
}

/// g = eta_AB e^A e^B with derivatives by the product rule.
MetricField metric_field(const FrameField& frame, const MatrixXd& eta);

enum class RiemannSign {
  // R^r_{s m n} = d_m Gamma^r_{n s} - d_n Gamma^r_{m s} + Gamma^r_{m l} Gamma^l_{n s} - Gamma^r_{n l} Gamma^l_{m s};
  // round spheres have R > 0.
  SpherePositive,
  SphereNegative,  // the negative of the above
};

/// Sign under which the teleparallel form of the Hilbert Lagrangian holds.
inline constexpr RiemannSign kHilbertIdentitySign = RiemannSign::SphereNegative;

struct CurvatureSuite {
  Tensor3d christoffel;  // Gamma^l_{m n}, symmetric
  Tensor4d riemann;      // R^r_{s m n}
  MatrixXd ricci;        // R_{s n} = R^r_{s r n}
  double scalar = 0.0;
  double density = 0.0;  // R sqrt|g|
};

/// Throws SingularMetric at a degenerate metric.
CurvatureSuite curvature_suite(const MetricField& metric, const VectorXd& x,
                               RiemannSign sign = RiemannSign::SpherePositive);

/// Curvature R^l_{m k n} = d_k Gamma^l_{m n} - d_n Gamma^l_{m k} + Gamma^l_{s k} Gamma^s_{m n} - Gamma^l_{s n} Gamma^s_{m k}
/// of the teleparallel connection.
Tensor4d teleparallel_curvature(const FrameField& frame, const VectorXd& x);

struct HilbertIdentity {
  double curvature_density = 0.0;    // R sqrt|g|, with kHilbertIdentitySign
  double weitzenbock_density = 0.0;  // (J1 + 2 J2 - 4 J3) sqrt|g|
  double divergence = 0.0;           // 4 d_i (S^a_{ab} g^{bi} sqrt|g|)
  double residual = 0.0;
};

/// Requires analytic second derivatives (SecondDerivativesUnavailable otherwise).
HilbertIdentity hilbert_identity(const FrameField& frame, const VectorXd& x, const MatrixXd& eta);
double hilbert_identity_residual(const FrameField& frame, const VectorXd& x, const MatrixXd& eta);

// Built-in frames. `scale` multiplies the coframe.
//   coordinate         e^A = dx^A (any n)
//   exponential-2d     e^1 = dx, e^2 = exp(x) dy
//   affine-line        e_1 = d_x, e_2 = exp(x) d_y
//   so3-leftinvariant  left-invariant forms of SO(3) in Euler angles (theta, phi, psi)
std::vector<std::string> builtin_frame_names();
FrameField builtin_frame(const std::string& name, Eigen::Index n = 0, double scale = 1.0);
/// Dimension a built-in frame lives in (0 for any).
Eigen::Index builtin_frame_dimension(const std::string& name);

}  // namespace affsym
