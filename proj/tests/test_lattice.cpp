#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affsym/lattice.hpp"
#include "support.hpp"

using namespace affsym;
using testing::Rng;

namespace {

KineticModel doubly_affine(Eigen::Index n, double alpha) {
  InertiaParameters p;
  p.A_coeff = alpha;
  p.B_coeff = 0.0;
  return KineticModel::euclidean(KineticKind::DoublyAffine, n, p);
}

KineticModel isotropic_dalembert(Eigen::Index n, double I) {
  InertiaParameters p;
  p.J = I * MatrixXd::Identity(n, n);
  return KineticModel::euclidean(KineticKind::DAlembert, n, p);
}

KinematicState<double> random_internal(Rng& rng, Eigen::Index n) {
  return KinematicState<double>::internal(rng.phi(n, 0.7), rng.matrix(n, n));
}

BipolarCanonicalState spin_free(VectorXd q, VectorXd p) {
  const auto n = q.size();
  BipolarCanonicalState s;
  s.Q = q.array().exp();
  s.P = p.cwiseQuotient(s.Q);
  s.q = std::move(q);
  s.p = std::move(p);
  s.rho_hat = s.tau_hat = s.M = s.N = MatrixXd::Zero(n, n);
  return s;
}

MatrixXd antisym(Rng& rng, Eigen::Index n) {
  const MatrixXd X = rng.matrix(n, n);
  return X - X.transpose();
}

}  // namespace

TEST_CASE("diagonal motion has no spin") {
  const Eigen::Vector3d q(0.4, -0.1, -0.6), qdot(0.3, 1.2, -0.5);
  const MatrixXd phi = q.array().exp().matrix().asDiagonal();
  const MatrixXd phidot = (q.array().exp() * qdot.array()).matrix().asDiagonal();
  const double alpha = 1.7;
  const auto s = to_bipolar_canonical(doubly_affine(3, alpha), KinematicState<double>::internal(phi, phidot));
  CHECK(s.rho_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.tau_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.M.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.N.cwiseAbs().maxCoeff() == 0.0);
  for (int a = 0; a < 3; ++a) CHECK(s.p(a) == doctest::Approx(alpha * qdot(a)).epsilon(1e-12));
  CHECK((s.q - q).norm() < 1e-14);

  const auto w = bipolar_quasi_velocities(bipolar(phi), phidot);
  CHECK(w.chi_hat.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(w.theta_hat.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("quasi-velocities round trip and are antisymmetric") {
  Rng rng(61);
  for (Eigen::Index n : {2, 3, 4}) {
    for (int i = 0; i < 50; ++i) {
      const auto s = random_internal(rng, n);
      const auto bp = bipolar(s.phi);
      const auto w = bipolar_quasi_velocities(bp, s.phidot);
      CHECK((w.chi_hat + w.chi_hat.transpose()).norm() == 0.0);
      CHECK((w.theta_hat + w.theta_hat.transpose()).norm() == 0.0);
      CHECK((phidot_from_quasi_velocities(bp, w) - s.phidot).norm() <= 1e-10 * (1.0 + s.phidot.norm()));

      // chi_hat = L^T dL/dt against a finite difference of the decomposition
      const double h = 1e-6;
      const auto plus = bipolar(MatrixXd(s.phi + h * s.phidot));
      const auto minus = bipolar(MatrixXd(s.phi - h * s.phidot));
      if (plus.L.col(0).dot(bp.L.col(0)) > 0.5) {
        // column signs can flip between neighbouring decompositions; align them
        MatrixXd Lp = plus.L, Lm = minus.L, Rp = plus.R, Rm = minus.R;
        for (Eigen::Index a = 0; a < n; ++a) {
          if (Lp.col(a).dot(bp.L.col(a)) < 0) { Lp.col(a) *= -1; Rp.col(a) *= -1; }
          if (Lm.col(a).dot(bp.L.col(a)) < 0) { Lm.col(a) *= -1; Rm.col(a) *= -1; }
        }
        const MatrixXd chi_fd = bp.L.transpose() * (Lp - Lm) / (2 * h);
        const MatrixXd theta_fd = bp.R.transpose() * (Rp - Rm) / (2 * h);
        CHECK((chi_fd - w.chi_hat).norm() <= 1e-5 * (1.0 + w.chi_hat.norm()));
        CHECK((theta_fd - w.theta_hat).norm() <= 1e-5 * (1.0 + w.theta_hat.norm()));
        VectorXd qdot_fd = (plus.q - minus.q) / (2 * h);
        CHECK((qdot_fd - w.qdot).norm() <= 1e-6 * (1.0 + w.qdot.norm()));
      }
    }
  }
}

TEST_CASE("canonical spins are antisymmetric and pair with the quasi-velocities") {
  Rng rng(62);
  for (Eigen::Index n : {2, 3}) {
    for (auto kind : kAllKineticKinds) {
      KineticModel model{kind, testing::full_params(n, rng), MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)};
      for (int i = 0; i < 10; ++i) {
        const auto s = random_internal(rng, n);
        const auto c = to_bipolar_canonical(model, s);
        for (const MatrixXd* X : {&c.rho_hat, &c.tau_hat, &c.M, &c.N}) CHECK((*X + X->transpose()).norm() == 0.0);
        // Euler: for a quadratic form, 2T = sum of momenta times velocities
        const auto w = bipolar_quasi_velocities(bipolar(s.phi), s.phidot);
        double pairing = c.p.dot(w.qdot);
        for (Eigen::Index a = 0; a < n; ++a)
          for (Eigen::Index b = a + 1; b < n; ++b)
            pairing += c.rho_hat(a, b) * w.chi_hat(a, b) + c.tau_hat(a, b) * w.theta_hat(a, b);
        const double T = kinetic_energy_parts(model, s).internal;
        CHECK(std::abs(pairing - 2 * T) <= 1e-8 * (1.0 + std::abs(T)));
      }
    }
  }
}

TEST_CASE("Casimir equals the doubly-affine kinetic energy") {
  Rng rng(63);
  for (Eigen::Index n : {2, 3, 4}) {
    for (int i = 0; i < 100; ++i) {
      const double alpha = rng.uniform(0.2, 3.0);
      const auto model = doubly_affine(n, alpha);
      const auto s = random_internal(rng, n);
      const double T = kinetic_energy_parts(model, s).internal;
      const double C = casimir_C2(to_bipolar_canonical(model, s));
      CHECK(std::abs(C - 2 * alpha * T) <= 1e-8 * std::max(1.0, std::abs(C)));
    }
  }
}

TEST_CASE("isotropic lattice Hamiltonian equals the d'Alembert energy") {
  Rng rng(64);
  for (Eigen::Index n : {2, 3, 4}) {
    for (int i = 0; i < 100; ++i) {
      const double I = rng.uniform(0.2, 3.0);
      const auto model = isotropic_dalembert(n, I);
      const auto s = random_internal(rng, n);
      const double T = kinetic_energy_parts(model, s).internal;
      const double H = isotropic_hamiltonian(to_bipolar_canonical(model, s), I);
      CHECK(std::abs(H - T) <= 1e-8 * std::max(1.0, T));
    }
  }
}

TEST_CASE("spin-free examples") {
  CHECK(casimir_C2(spin_free(Eigen::Vector2d(0.3, -0.2), Eigen::Vector2d(1, 2))) == doctest::Approx(5.0));
  const auto s = spin_free(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0));
  CHECK(isotropic_hamiltonian(s, 1.0) == doctest::Approx(0.5));
  CHECK(isotropic_hamiltonian(spin_free(Eigen::Vector2d(0.2, 0.1), Eigen::Vector2d::Zero()), 1.0) == 0.0);

  auto repel = spin_free(Eigen::Vector2d(0.8, 0.0), Eigen::Vector2d::Zero());
  repel.M(0, 1) = 1.0;
  repel.M(1, 0) = -1.0;
  CHECK(casimir_C2(repel) > 0.0);
  const double sh = std::sinh(0.4);
  CHECK(casimir_C2(repel) == doctest::Approx(2.0 / (16.0 * sh * sh)).epsilon(1e-14));
}

TEST_CASE("interaction profile") {
  Rng rng(65);
  for (int i = 0; i < 20; ++i) {
    auto s = spin_free(rng.vector(4), rng.vector(4));
    s.M = antisym(rng, 4);
    s.N = antisym(rng, 4);
    const auto prof = interaction_profile(s);
    CHECK(prof.size() == 6);
    double sum = s.p.squaredNorm();
    for (const auto& pi : prof) {
      CHECK(pi.a < pi.b);
      CHECK(pi.repulsive >= 0.0);
      CHECK(pi.attractive <= 0.0);
      sum += pi.repulsive + pi.attractive;
    }
    CHECK(std::abs(sum - casimir_C2(s)) <= 1e-12 * std::max(1.0, std::abs(sum)));

    auto no_m = s;
    no_m.M.setZero();
    for (const auto& pi : interaction_profile(no_m)) CHECK(pi.repulsive == 0.0);
    auto no_n = s;
    no_n.N.setZero();
    for (const auto& pi : interaction_profile(no_n)) CHECK(pi.attractive == 0.0);
  }
}

TEST_CASE("Casimir symmetries") {
  Rng rng(66);
  for (int i = 0; i < 20; ++i) {
    auto s = spin_free(rng.vector(4), rng.vector(4));
    s.M = antisym(rng, 4);
    s.N = antisym(rng, 4);
    const double C = casimir_C2(s);

    std::vector<int> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Eigen::PermutationMatrix<Eigen::Dynamic> P(Eigen::Map<Eigen::VectorXi>(perm.data(), 4));
    auto t = s;
    t.q = P * s.q;
    t.p = P * s.p;
    t.M = P * s.M * P.transpose();
    t.N = P * s.N * P.transpose();
    CHECK(casimir_C2(t) == doctest::Approx(C).epsilon(1e-13));

    auto u = s;
    u.q.array() += rng.uniform(-3.0, 3.0);
    CHECK(casimir_C2(u) == doctest::Approx(C).epsilon(1e-12));
  }
}

TEST_CASE("coincident invariants") {
  auto s = spin_free(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 0));
  CHECK(casimir_C2(s) == 1.0);
  s.M(0, 1) = 0.3;
  s.M(1, 0) = -0.3;
  CHECK_THROWS_AS(casimir_C2(s), Error);
  try {
    casimir_C2(s);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CoincidentInvariants);
  }
  try {
    isotropic_hamiltonian(s, 1.0);
    FAIL("expected CoincidentInvariants");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CoincidentInvariants);
  }
  try {
    to_bipolar_canonical(doubly_affine(2, 1.0),
                         KinematicState<double>::internal(MatrixXd::Identity(2, 2), MatrixXd::Ones(2, 2)));
    FAIL("expected DegenerateInvariants");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInvariants);
  }
}
