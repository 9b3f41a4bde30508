#include "doctest.h"

#include <array>
#include <cmath>

#include "affsym/tetrad.hpp"
#include "support.hpp"

using namespace affsym;
using testing::Rng;

namespace {

// e^A_mu = 1.5 delta + 0.3 sin(w.x + p), smooth and safely invertible near the origin.
FrameField random_frame(Rng& rng, Eigen::Index n) {
  std::vector<double> w(n * n * n), p(n * n);
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);
  for (auto& v : p) v = rng.uniform(0.0, 6.0);
  return analytic_frame(n, [n, w, p](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    using std::sin;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> E(n, n);
    for (Eigen::Index A = 0; A < n; ++A)
      for (Eigen::Index mu = 0; mu < n; ++mu) {
        S arg(p[A * n + mu]);
        for (Eigen::Index k = 0; k < n; ++k) arg = arg + w[(A * n + mu) * n + k] * x(k);
        E(A, mu) = (A == mu ? 1.5 : 0.0) + 0.3 * sin(arg);
      }
    return E;
  });
}

// Independent oracle: torsion from central differences of the coframe with
// all three indices lowered, then contracted with explicit inverse metrics.
std::array<double, 3> weitzenbock_oracle(const FrameField& f, const VectorXd& x, const MatrixXd& eta) {
  const auto n = f.n;
  const double h = 1e-5;
  const MatrixXd E = f.coframe(x);
  const MatrixXd g = E.transpose() * eta * E;
  const MatrixXd gi = g.inverse();
  // T_{l mu nu} = eta_AB e^A_l (d_nu e^B_mu - d_mu e^B_nu) / 2
  std::vector<MatrixXd> dE(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    VectorXd a = x, b = x;
    a(k) += h;
    b(k) -= h;
    dE[k] = (f.coframe(a) - f.coframe(b)) / (2 * h);
  }
  auto T = [&](Eigen::Index l, Eigen::Index mu, Eigen::Index nu) {
    double acc = 0;
    for (Eigen::Index A = 0; A < n; ++A)
      for (Eigen::Index B = 0; B < n; ++B) acc += eta(A, B) * E(A, l) * (dE[nu](B, mu) - dE[mu](B, nu));
    return 0.5 * acc;
  };
  double J1 = 0, J2 = 0, J3 = 0;
  std::vector<double> trace(n, 0.0);  // S^a_{a i} = g^{a l} T_{l a i}
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index l = 0; l < n; ++l) trace[i] += gi(a, l) * T(l, a, i);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index a = 0; a < n; ++a)
          for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index c = 0; c < n; ++c) {
              J1 += gi(i, a) * gi(j, b) * gi(k, c) * T(i, j, k) * T(a, b, c);
              // J2 = g^{ij} S^k_{li} S^l_{kj} = g^{ij} g^{ka} g^{cb} T_{a c i} T_{b k j}
              J2 += gi(i, j) * gi(k, a) * gi(c, b) * T(a, c, i) * T(b, k, j);
            }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) J3 += gi(i, j) * trace[i] * trace[j];
  return {J1, J2, J3};
}

Tensor3d so3_constants() {
  Tensor3d W(3);
  for (int c = 0; c < 3; ++c)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        // eps_{cab}
        W(c, a, b) = 0.5 * (c - a) * (a - b) * (b - c);
      }
  return W;
}

}  // namespace

TEST_CASE("constant frames carry no connection or torsion") {
  for (double c : {1.0, 2.5}) {
    const auto f = builtin_frame("coordinate", 3, c);
    const VectorXd x = VectorXd::Constant(3, 0.3);
    CHECK(teleparallel_connection(f, x).max_abs() == 0.0);
    CHECK(torsion(f, x).S.max_abs() == 0.0);
    const auto w = weitzenbock_invariants(f, x, minkowski(3));
    CHECK(w.J1 == 0.0);
    CHECK(w.J2 == 0.0);
    CHECK(w.J3 == 0.0);
    CHECK(w.Lprime == 0.0);
    const auto L = lagrange_tensor(f, x, 1.0, 2.0, 3.0);
    CHECK(L.L.norm() == 0.0);
    CHECK(L.density == 0.0);
    CHECK(contorsion(f, x, minkowski(3)).K.max_abs() == 0.0);
    CHECK(hilbert_identity_residual(f, x, minkowski(3)) == 0.0);
  }
}

TEST_CASE("exponential frame connection at the origin") {
  const auto f = builtin_frame("exponential-2d");
  const auto G = teleparallel_connection(f, VectorXd::Zero(2));
  for (int l = 0; l < 2; ++l)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) CHECK(G(l, m, n) == (l == 1 && m == 1 && n == 0 ? 1.0 : 0.0));
}

TEST_CASE("affine-line nonholonomy") {
  const auto f = builtin_frame("affine-line");
  const VectorXd x = (VectorXd(2) << 0.4, -1.0).finished();
  const auto W = nonholonomy(f, x);
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double expected = (c == 1 && a == 0 && b == 1) ? 1.0 : (c == 1 && a == 1 && b == 0) ? -1.0 : 0.0;
        CHECK(W(c, a, b) == doctest::Approx(expected).epsilon(1e-14));
      }
  CHECK(torsion(f, x).two_path_residual < 1e-14);
}

TEST_CASE("two-path torsion and antisymmetry on random frames") {
  Rng rng(31);
  for (Eigen::Index n : {2, 3, 4}) {
    const auto f = random_frame(rng, n);
    const VectorXd x = rng.vector(n, 0.5);
    const auto t = torsion(f, x);
    CHECK(t.two_path_residual < 1e-9);
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m)
        for (int v = 0; v < n; ++v) CHECK(t.S(l, m, v) + t.S(l, v, m) == 0.0);
  }
}

TEST_CASE("frames are orthonormal in the internal metric") {
  Rng rng(32);
  for (Eigen::Index n : {2, 3, 4}) {
    const auto f = random_frame(rng, n);
    const VectorXd x = rng.vector(n, 0.5);
    for (const MatrixXd& eta : {MatrixXd(MatrixXd::Identity(n, n)), minkowski(n)}) {
      const MatrixXd g = internal_metric(f, x, eta);
      const MatrixXd e = f.coframe(x).inverse();
      CHECK((e.transpose() * g * e - eta).norm() < 1e-12);
    }
  }
  CHECK(internal_metric(MatrixXd::Identity(4, 4), minkowski(4)) == minkowski(4));

  // pointwise eta-orthogonal rotations leave g unchanged
  const double th = 0.7;
  MatrixXd rot = MatrixXd::Identity(3, 3), boost = MatrixXd::Identity(3, 3);
  rot.block(1, 1, 2, 2) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  boost.topLeftCorner(2, 2) << std::cosh(0.4), std::sinh(0.4), std::sinh(0.4), std::cosh(0.4);
  const MatrixXd Lam = boost * rot;
  const MatrixXd eta = minkowski(3);
  REQUIRE((Lam.transpose() * eta * Lam - eta).norm() < 1e-14);
  const MatrixXd E = random_frame(rng, 3).coframe(VectorXd::Zero(3));
  CHECK((internal_metric(Lam * E, eta) - internal_metric(E, eta)).norm() < 1e-12);
}

TEST_CASE("Killing forms of simple algebras") {
  const auto gamma = killing_form(so3_constants());
  CHECK((gamma + 2.0 * MatrixXd::Identity(3, 3)).norm() == 0.0);

  Tensor3d affine(2);
  affine(1, 0, 1) = 1.0;
  affine(1, 1, 0) = -1.0;
  CHECK((killing_form(affine) - MatrixXd(Eigen::Vector2d(1, 0).asDiagonal())).norm() == 0.0);

  const auto abelian = killing_construction(Tensor3d(3), MatrixXd::Identity(3, 3));
  CHECK(abelian.gamma.norm() == 0.0);
  CHECK(abelian.g_e.norm() == 0.0);

  Tensor3d bad(2);
  bad(0, 0, 1) = 1.0;
  CHECK_THROWS_AS(killing_construction(bad, MatrixXd::Identity(2, 2)), Error);
}

TEST_CASE("torsion square is proportional to the Killing pullback") {
  Rng rng(33);
  const auto r = killing_construction(so3_constants(), rng.phi(3));
  CHECK(r.proportionality_residual < 1e-12);
  CHECK(r.factor == doctest::Approx(0.25).epsilon(1e-12));

  const auto f = builtin_frame("so3-leftinvariant");
  const VectorXd x = (VectorXd(3) << 0.9, 0.3, -0.4).finished();
  const auto k = killing_construction(f, x);
  CHECK((k.gamma + 2.0 * MatrixXd::Identity(3, 3)).norm() < 1e-12);
  CHECK(k.proportionality_residual < 1e-12);
  CHECK(k.factor == doctest::Approx(0.25).epsilon(1e-12));

  // the left-invariant frame has constant structure functions
  const auto W1 = nonholonomy(f, x);
  const auto W2 = nonholonomy(f, (VectorXd(3) << 2.0, -1.0, 1.3).finished());
  CHECK((W1 - W2).max_abs() < 1e-12);
  CHECK(std::abs(std::abs(W1(2, 0, 1)) - 1.0) < 1e-12);
}

TEST_CASE("Weitzenbock invariants on the exponential frame") {
  const auto f = builtin_frame("exponential-2d");
  const MatrixXd eta = MatrixXd::Identity(2, 2);
  for (double x0 : {0.0, 0.3, -1.2}) {
    const VectorXd x = (VectorXd(2) << x0, 0.5).finished();
    const auto w = weitzenbock_invariants(f, x, eta);
    CHECK(w.J1 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w.J2 == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(w.J3 == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(w.Lprime) < 1e-14);
    const auto o = weitzenbock_oracle(f, x, eta);
    CHECK(w.J1 == doctest::Approx(o[0]).epsilon(1e-8));
    CHECK(w.J2 == doctest::Approx(o[1]).epsilon(1e-8));
    CHECK(w.J3 == doctest::Approx(o[2]).epsilon(1e-8));
  }
}

TEST_CASE("Weitzenbock invariants match the oracle on random frames") {
  Rng rng(34);
  for (Eigen::Index n : {3, 4}) {
    const auto f = random_frame(rng, n);
    const VectorXd x = rng.vector(n, 0.5);
    const auto eta = minkowski(n);
    const auto w = weitzenbock_invariants(f, x, eta);
    const auto o = weitzenbock_oracle(f, x, eta);
    CHECK(w.J1 == doctest::Approx(o[0]).epsilon(1e-7));
    CHECK(w.J2 == doctest::Approx(o[1]).epsilon(1e-7));
    CHECK(w.J3 == doctest::Approx(o[2]).epsilon(1e-7));
  }
}

TEST_CASE("global linear mixing of the frame") {
  Rng rng(35);
  const Eigen::Index n = 3;
  const auto f = random_frame(rng, n);
  const VectorXd x = rng.vector(n, 0.5);
  const MatrixXd eta = minkowski(n);
  const auto w0 = weitzenbock_invariants(f, x, eta);
  const auto L0 = lagrange_tensor(f, x, 1.0, 0.5, 0.3);
  for (int i = 0; i < 50; ++i) {
    const MatrixXd Lmix = rng.phi(n, 0.6);
    const MatrixXd inv = Lmix.inverse();
    // e_A -> e_B L^B_A, so e^A -> (L^-1)^A_B e^B; eta transforms as an internal tensor
    FrameField g = f;
    g.coframe = [f, inv](const VectorXd& y) { return MatrixXd(inv * f.coframe(y)); };
    g.dcoframe = [f, inv, n](const VectorXd& y) {
      const Tensor3d d = f.dcoframe(y);
      Tensor3d out(n);
      for (Eigen::Index A = 0; A < n; ++A)
        for (Eigen::Index m = 0; m < n; ++m)
          for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index B = 0; B < n; ++B) out(A, m, k) += inv(A, B) * d(B, m, k);
      return out;
    };
    const MatrixXd eta2 = Lmix.transpose() * eta * Lmix;
    const auto w = weitzenbock_invariants(g, x, eta2);
    CHECK(testing::rel(w.J1, w0.J1) < 1e-9);
    CHECK(testing::rel(w.J2, w0.J2) < 1e-9);
    CHECK(testing::rel(w.J3, w0.J3) < 1e-9);
    CHECK(testing::rel(lagrange_tensor(g, x, 1.0, 0.5, 0.3).density, L0.density) < 1e-9);
  }
}

TEST_CASE("Lagrange tensor structure") {
  Rng rng(36);
  const auto f = random_frame(rng, 3);
  const VectorXd x = rng.vector(3, 0.5);
  const auto sym = lagrange_tensor(f, x, 1.3, -0.4, 0.0);
  CHECK((sym.L - sym.L.transpose()).norm() == 0.0);
  const auto full = lagrange_tensor(f, x, 1.3, -0.4, 0.7);
  CHECK((full.symmetric() - sym.L).norm() < 1e-14);
  CHECK(full.antisymmetric().norm() > 1e-3);
  const auto killing = killing_construction(f, x);
  CHECK((lagrange_tensor(f, x, 1.0, 0.0, 0.0).L - killing.g_e).norm() == 0.0);
  CHECK(full.density == doctest::Approx(std::sqrt(std::abs(full.L.determinant()))));
}

TEST_CASE("contorsion restores metric compatibility") {
  Rng rng(37);
  for (Eigen::Index n : {2, 3, 4}) {
    const auto f = random_frame(rng, n);
    const VectorXd x = rng.vector(n, 0.5);
    const auto eta = minkowski(n);
    const auto c = contorsion(f, x, eta);
    CHECK(c.metric_residual < 1e-9);
    CHECK(c.decomposition_residual < 1e-9);
    const MatrixXd g = internal_metric(f, x, eta);
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m)
        for (int v = 0; v < n; ++v) {
          double a = 0, b = 0;
          for (int s = 0; s < n; ++s) {
            a += g(l, s) * c.K(s, m, v);
            b += g(m, s) * c.K(s, l, v);
          }
          CHECK(std::abs(a + b) < 1e-12);
        }
  }
}

TEST_CASE("Levi-Civita curvature") {
  const VectorXd x2 = (VectorXd(2) << 0.8, 0.1).finished();
  const auto flat = analytic_metric(2, [](const auto& y) {
    using S = typename std::decay_t<decltype(y)>::Scalar;
    Eigen::Matrix<S, 2, 2> g;
    g(0, 0) = S(1.0);
    g(0, 1) = S(0.0);
    g(1, 0) = S(0.0);
    g(1, 1) = S(1.0);
    return Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>(g);
  });
  const auto c0 = curvature_suite(flat, x2);
  CHECK(c0.scalar == 0.0);
  CHECK(c0.riemann.max_abs() == 0.0);

  for (double a : {1.0, 2.5}) {
    const auto sphere = analytic_metric(2, [a](const auto& y) {
      using S = typename std::decay_t<decltype(y)>::Scalar;
      using std::sin;
      Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> g(2, 2);
      g(0, 0) = S(a * a);
      g(0, 1) = S(0.0);
      g(1, 0) = S(0.0);
      g(1, 1) = a * a * sin(y(0)) * sin(y(0));
      return g;
    });
    const auto c = curvature_suite(sphere, x2);
    CHECK(c.scalar == doctest::Approx(2.0 / (a * a)).epsilon(1e-12));
    CHECK(c.density == doctest::Approx(2.0 * std::sin(x2(0))).epsilon(1e-12));
    CHECK(curvature_suite(sphere, x2, RiemannSign::SphereNegative).scalar ==
          doctest::Approx(-2.0 / (a * a)).epsilon(1e-12));

    // finite-difference path agrees to derivative tolerance
    MetricField fd = sphere;
    fd.mode = FrameMode::FiniteDifference;
    CHECK(curvature_suite(fd, x2).scalar == doctest::Approx(2.0 / (a * a)).epsilon(1e-5));
  }

  // metric of a constant frame is flat
  const auto m = metric_field(builtin_frame("coordinate", 3, 2.0), minkowski(3));
  CHECK(curvature_suite(m, VectorXd::Zero(3)).scalar == 0.0);

  // dx^2 + exp(2x) dy^2 is the hyperbolic plane
  const auto hyp = metric_field(builtin_frame("exponential-2d"), MatrixXd::Identity(2, 2));
  CHECK(curvature_suite(hyp, x2).scalar == doctest::Approx(-2.0).epsilon(1e-12));

  const auto degenerate = analytic_metric(2, [](const auto& y) {
    using S = typename std::decay_t<decltype(y)>::Scalar;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> g(2, 2);
    g(0, 0) = S(1.0);
    g(0, 1) = S(1.0);
    g(1, 0) = S(1.0);
    g(1, 1) = S(1.0) + 0.0 * y(0);
    return g;
  });
  try {
    curvature_suite(degenerate, x2);
    FAIL("expected SingularMetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularMetric);
  }
}

TEST_CASE("teleparallel connection is flat") {
  Rng rng(38);
  for (Eigen::Index n : {2, 3, 4}) {
    const auto f = random_frame(rng, n);
    const VectorXd x = rng.vector(n, 0.5);
    CHECK(teleparallel_curvature(f, x).max_abs() < 1e-12);
    const auto fd = FrameField::finite_difference(n, f.coframe, 1e-5);
    CHECK(teleparallel_curvature(fd, x).max_abs() < 1e-6);
  }
  CHECK(teleparallel_curvature(builtin_frame("so3-leftinvariant"), (VectorXd(3) << 1.0, 0.2, 0.3).finished())
            .max_abs() < 1e-12);
}

TEST_CASE("Hilbert Lagrangian differs from the Weitzenbock one by a divergence") {
  const auto e2 = builtin_frame("exponential-2d");
  for (double x0 : {-0.7, 0.0, 0.4, 1.1}) {
    const VectorXd x = (VectorXd(2) << x0, 0.3).finished();
    const auto h = hilbert_identity(e2, x, MatrixXd::Identity(2, 2));
    CHECK(std::abs(h.residual) < 1e-9);
    // hand values: curvature density 2 e^x, divergence 2 e^x
    CHECK(h.divergence == doctest::Approx(2.0 * std::exp(x0)).epsilon(1e-12));
  }
  const auto so3 = builtin_frame("so3-leftinvariant");
  for (const VectorXd& x : {VectorXd((VectorXd(3) << 0.9, 0.3, -0.4).finished()),
                            VectorXd((VectorXd(3) << 2.1, -1.0, 0.7).finished())}) {
    CHECK(std::abs(hilbert_identity_residual(so3, x, MatrixXd::Identity(3, 3))) < 1e-8);
    CHECK(std::abs(hilbert_identity_residual(so3, x, minkowski(3))) < 1e-8);
  }
  Rng rng(39);
  for (Eigen::Index n : {2, 3, 4}) {
    const auto f = random_frame(rng, n);
    const VectorXd x = rng.vector(n, 0.5);
    for (const MatrixXd& eta : {MatrixXd(MatrixXd::Identity(n, n)), minkowski(n)}) {
      const auto h = hilbert_identity(f, x, eta);
      CHECK(std::abs(h.residual) < 1e-8 * (1.0 + std::abs(h.curvature_density)));
    }
  }
}

TEST_CASE("finite-difference frames") {
  Rng rng(40);
  const auto f = random_frame(rng, 3);
  const VectorXd x = rng.vector(3, 0.5);
  const auto fd = FrameField::finite_difference(3, f.coframe, 1e-5);
  CHECK((torsion(f, x).S - torsion(fd, x).S).max_abs() < 1e-8);
  try {
    hilbert_identity_residual(fd, x, MatrixXd::Identity(3, 3));
    FAIL("expected SecondDerivativesUnavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SecondDerivativesUnavailable);
  }
}

TEST_CASE("degenerate coframes are rejected") {
  const auto so3 = builtin_frame("so3-leftinvariant");
  try {
    torsion(so3, VectorXd::Zero(3));
    FAIL("expected SingularFrame");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularFrame);
  }
  CHECK_THROWS_AS(builtin_frame("nonexistent"), Error);
  CHECK(builtin_frame_names().size() == 4);
}
