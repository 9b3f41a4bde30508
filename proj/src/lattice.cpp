#include "affsym/lattice.hpp"

#include <cmath>

namespace affsym {

BipolarQuasiVelocities bipolar_quasi_velocities(const BipolarDecomposition<double>& bp, const MatrixXd& phidot) {
  if (bp.degenerate) {
    fail(ErrorKind::DegenerateInvariants, "bipolar_quasi_velocities: coincident deformation invariants");
  }
  const auto n = bp.Q.size();
  // K = L^T phidot R = chi_hat D + dD/dt - D theta_hat
  const MatrixXd K = bp.L.transpose() * phidot * bp.R;
  BipolarQuasiVelocities w{VectorXd(n), MatrixXd::Zero(n, n), MatrixXd::Zero(n, n)};
  for (Eigen::Index a = 0; a < n; ++a) w.qdot(a) = K(a, a) / bp.Q(a);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      // K_ab =  Q_b chi - Q_a theta
      // K_ba = -Q_a chi + Q_b theta
      const double Qa = bp.Q(a), Qb = bp.Q(b);
      const double det = Qb * Qb - Qa * Qa;
      const double chi = (Qb * K(a, b) + Qa * K(b, a)) / det;
      const double theta = (Qa * K(a, b) + Qb * K(b, a)) / det;
      w.chi_hat(a, b) = chi;
      w.chi_hat(b, a) = -chi;
      w.theta_hat(a, b) = theta;
      w.theta_hat(b, a) = -theta;
    }
  }
  return w;
}

MatrixXd phidot_from_quasi_velocities(const BipolarDecomposition<double>& bp, const BipolarQuasiVelocities& w) {
  const VectorXd Qdot = bp.Q.cwiseProduct(w.qdot);
  const MatrixXd K = w.chi_hat * bp.Q.asDiagonal() + MatrixXd(Qdot.asDiagonal()) -
                     bp.Q.asDiagonal() * w.theta_hat;
  return bp.L * K * bp.R.transpose();
}

namespace {

// Internal kinetic energy as a function of the bipolar quasi-velocities.
struct QuasiVelocityEnergy {
  const KineticModel& model;
  const BipolarDecomposition<double>& bp;
  const MatrixXd& phi;

  double operator()(const BipolarQuasiVelocities& w) const {
    const auto n = phi.rows();
    KinematicState<double> s{VectorXd::Zero(n), VectorXd::Zero(n), phi, phidot_from_quasi_velocities(bp, w)};
    return kinetic_energy_parts(model, s).internal;
  }
};

// The energy is quadratic in the velocities, so a central difference is exact
// up to rounding for any step; the step only sets the rounding scale.
template <typename Component>
double partial(const QuasiVelocityEnergy& T, BipolarQuasiVelocities w, Component&& component, double h) {
  const double base = component(w);
  component(w) = base + h;
  const double plus = T(w);
  component(w) = base - h;
  const double minus = T(w);
  return (plus - minus) / (2.0 * h);
}

}  // namespace

BipolarCanonicalState to_bipolar_canonical(const KineticModel& model, const KinematicState<double>& state) {
  validate(model);
  const auto bp = bipolar(state.phi);
  const auto w = bipolar_quasi_velocities(bp, state.phidot);
  const auto n = bp.Q.size();

  const double scale = std::max({w.qdot.cwiseAbs().maxCoeff(), w.chi_hat.cwiseAbs().maxCoeff(),
                                 w.theta_hat.cwiseAbs().maxCoeff(), 1e-8});
  const QuasiVelocityEnergy T{model, bp, state.phi};

  BipolarCanonicalState out;
  out.q = bp.q;
  out.Q = bp.Q;
  out.p.resize(n);
  out.rho_hat = MatrixXd::Zero(n, n);
  out.tau_hat = MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    out.p(a) = partial(T, w, [a](BipolarQuasiVelocities& u) -> double& { return u.qdot(a); }, scale);
  }
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      // Perturb the independent component together with its antisymmetric partner.
      auto along = [&](auto member) {
        auto shifted = [&](double delta) {
          BipolarQuasiVelocities u = w;
          (u.*member)(a, b) += delta;
          (u.*member)(b, a) -= delta;
          return T(u);
        };
        return (shifted(scale) - shifted(-scale)) / (2.0 * scale);
      };
      const double rho = along(&BipolarQuasiVelocities::chi_hat);
      const double tau = along(&BipolarQuasiVelocities::theta_hat);
      out.rho_hat(a, b) = rho;
      out.rho_hat(b, a) = -rho;
      out.tau_hat(a, b) = tau;
      out.tau_hat(b, a) = -tau;
    }
  }
  out.P = out.p.cwiseQuotient(out.Q);
  out.M = -out.rho_hat - out.tau_hat;
  out.N = out.rho_hat - out.tau_hat;
  return out;
}

namespace {

double repulsive_term(const BipolarCanonicalState& s, Eigen::Index a, Eigen::Index b) {
  const double M = s.M(a, b);
  const double d = s.q(a) - s.q(b);
  if (std::abs(d) < kCoincidentGap) {
    if (std::abs(M) > kSpinNegligible) {
      fail(ErrorKind::CoincidentInvariants, "casimir_C2: coincident invariants carry a nonzero M spin");
    }
    return 0.0;
  }
  const double sh = std::sinh(0.5 * d);
  return M * M / (16.0 * sh * sh);
}

double attractive_term(const BipolarCanonicalState& s, Eigen::Index a, Eigen::Index b) {
  const double N = s.N(a, b);
  const double ch = std::cosh(0.5 * (s.q(a) - s.q(b)));
  return -N * N / (16.0 * ch * ch);
}

}  // namespace

double casimir_C2(const BipolarCanonicalState& s) {
  const auto n = s.q.size();
  double acc = s.p.squaredNorm();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      acc += repulsive_term(s, a, b) + attractive_term(s, a, b);
    }
  }
  return acc;
}

double isotropic_hamiltonian(const BipolarCanonicalState& s, double I_scalar) {
  const auto n = s.Q.size();
  const double Qmax = s.Q.cwiseAbs().maxCoeff();
  double acc = s.P.squaredNorm() / (2.0 * I_scalar);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      const double diff = s.Q(a) - s.Q(b);
      const double M = s.M(a, b);
      if (std::abs(diff) < kCoincidentGap * Qmax) {
        if (std::abs(M) > kSpinNegligible) {
          fail(ErrorKind::CoincidentInvariants, "isotropic_hamiltonian: coincident invariants carry a nonzero M spin");
        }
      } else {
        acc += M * M / (8.0 * I_scalar * diff * diff);
      }
      const double sum = s.Q(a) + s.Q(b);
      acc += s.N(a, b) * s.N(a, b) / (8.0 * I_scalar * sum * sum);
    }
  }
  return acc;
}

std::vector<PairInteraction> interaction_profile(const BipolarCanonicalState& s) {
  std::vector<PairInteraction> out;
  const auto n = s.q.size();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      out.push_back({a, b, repulsive_term(s, a, b) + repulsive_term(s, b, a),
                     attractive_term(s, a, b) + attractive_term(s, b, a)});
    }
  }
  return out;
}

}  // namespace affsym
