#include "affsym/tetrad.hpp"

#include <cmath>

namespace affsym {

namespace {

using Index = Eigen::Index;

bool nearly_singular(const MatrixXd& M) {
  const double scale = std::pow(M.norm(), static_cast<double>(M.rows()));
  return !(std::abs(M.determinant()) > 1e-13 * scale) || scale == 0.0;
}

Tensor3d central_difference(const std::function<MatrixXd(const VectorXd&)>& f, const VectorXd& x, Index n,
                            double h) {
  Tensor3d d(n);
  for (Index k = 0; k < x.size(); ++k) {
    VectorXd p = x, m = x;
    p(k) += h;
    m(k) -= h;
    const MatrixXd diff = (f(p) - f(m)) / (2.0 * h);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) d(a, b, k) = diff(a, b);
  }
  return d;
}

Tensor4d central_difference(const std::function<Tensor3d(const VectorXd&)>& f, const VectorXd& x, Index n,
                            double h) {
  Tensor4d d(n);
  for (Index k = 0; k < x.size(); ++k) {
    VectorXd p = x, m = x;
    p(k) += h;
    m(k) -= h;
    const Tensor3d fp = f(p), fm = f(m);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        for (Index c = 0; c < n; ++c) d(a, b, c, k) = (fp(a, b, c) - fm(a, b, c)) / (2.0 * h);
  }
  return d;
}

Tensor3d connection_from_jet(const FrameJet& j) {
  const Index n = j.coframe.rows();
  Tensor3d G(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu) {
        double acc = 0.0;
        for (Index A = 0; A < n; ++A) acc += j.frame(l, A) * j.d1(A, mu, nu);
        G(l, mu, nu) = acc;
      }
  return G;
}

Tensor3d torsion_from_connection(const Tensor3d& G) {
  const Index n = G.dim();
  Tensor3d S(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu) S(l, mu, nu) = 0.5 * (G(l, mu, nu) - G(l, nu, mu));
  return S;
}

Tensor3d nonholonomy_from_jet(const FrameJet& j) {
  const Index n = j.coframe.rows();
  Tensor3d W(n);
  for (Index C = 0; C < n; ++C)
    for (Index A = 0; A < n; ++A)
      for (Index B = 0; B < n; ++B) {
        double acc = 0.0;
        for (Index nu = 0; nu < n; ++nu)
          for (Index ka = 0; ka < n; ++ka)
            acc += j.frame(nu, A) * j.frame(ka, B) * (j.d1(C, nu, ka) - j.d1(C, ka, nu));
        W(C, A, B) = acc;
      }
  return W;
}

// 1/2 Omega^C_AB e^l_C e^A_mu e^B_nu
Tensor3d torsion_from_structure(const Tensor3d& W, const MatrixXd& E, const MatrixXd& Einv) {
  const Index n = E.rows();
  Tensor3d S(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu) {
        double acc = 0.0;
        for (Index C = 0; C < n; ++C)
          for (Index A = 0; A < n; ++A)
            for (Index B = 0; B < n; ++B) acc += W(C, A, B) * Einv(l, C) * E(A, mu) * E(B, nu);
        S(l, mu, nu) = 0.5 * acc;
      }
  return S;
}

MatrixXd metric_inverse(const MatrixXd& g, const char* where) {
  if (nearly_singular(g)) fail(ErrorKind::SingularMetric, std::string(where) + ": metric is singular");
  return g.inverse();
}

// T_b = S^a_{ab}
VectorXd torsion_trace(const Tensor3d& S) {
  const Index n = S.dim();
  VectorXd T = VectorXd::Zero(n);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a) T(b) += S(a, a, b);
  return T;
}

// d_k Gamma^l_{mu nu} of the teleparallel connection, analytic when the jet
// carries second derivatives.
Tensor4d connection_derivative(const FrameJet& j, const Tensor3d& G) {
  const Index n = G.dim();
  Tensor4d dG(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu)
        for (Index k = 0; k < n; ++k) {
          // d_k e^l_A = -e^l_B d_k e^B_r e^r_A
          double acc = 0.0;
          for (Index r = 0; r < n; ++r) acc -= G(l, r, k) * G(r, mu, nu);
          for (Index A = 0; A < n; ++A) acc += j.frame(l, A) * (*j.d2)(A, mu, nu, k);
          dG(l, mu, nu, k) = acc;
        }
  return dG;
}

struct MetricJet {
  MatrixXd g;
  Tensor3d dg;
  Tensor4d d2g;
};

MetricJet evaluate_metric(const MetricField& m, const VectorXd& x) {
  MetricJet j;
  j.g = m.g(x);
  if (j.g.rows() != m.n || j.g.cols() != m.n) fail(ErrorKind::InvalidArgument, "metric: wrong shape");
  const bool analytic = m.mode == FrameMode::Analytic;
  if (analytic && m.dg) {
    j.dg = m.dg(x);
  } else {
    j.dg = central_difference(m.g, x, m.n, m.fd_step);
  }
  if (analytic && m.d2g) {
    j.d2g = m.d2g(x);
  } else if (analytic && m.dg) {
    j.d2g = central_difference(m.dg, x, m.n, m.fd_step);
  } else {
    const auto n = m.n;
    const double h = m.fd_step;
    auto first = [&](const VectorXd& y) { return central_difference(m.g, y, n, h); };
    j.d2g = central_difference(std::function<Tensor3d(const VectorXd&)>(first), x, n, h);
  }
  return j;
}

}  // namespace

FrameField FrameField::finite_difference(Eigen::Index n, std::function<MatrixXd(const VectorXd&)> coframe,
                                         double step) {
  if (!(step > 0.0)) fail(ErrorKind::InvalidArgument, "finite-difference frame: step must be positive");
  FrameField f;
  f.n = n;
  f.coframe = std::move(coframe);
  f.mode = FrameMode::FiniteDifference;
  f.fd_step = step;
  return f;
}

FrameJet evaluate(const FrameField& frame, const VectorXd& x, bool need_second) {
  if (x.size() != frame.n) fail(ErrorKind::InvalidArgument, "frame: point has wrong dimension");
  FrameJet j;
  j.coframe = frame.coframe(x);
  if (j.coframe.rows() != frame.n || j.coframe.cols() != frame.n) {
    fail(ErrorKind::InvalidArgument, "frame: coframe has wrong shape");
  }
  if (nearly_singular(j.coframe)) fail(ErrorKind::SingularFrame, "frame: coframe is degenerate at the point");
  j.frame = j.coframe.inverse();

  if (frame.mode == FrameMode::Analytic) {
    if (!frame.dcoframe) fail(ErrorKind::InvalidArgument, "frame: analytic mode needs first derivatives");
    j.d1 = frame.dcoframe(x);
  } else {
    j.d1 = central_difference(frame.coframe, x, frame.n, frame.fd_step);
  }
  if (need_second) {
    if (frame.mode != FrameMode::Analytic || !frame.d2coframe) {
      fail(ErrorKind::SecondDerivativesUnavailable, "frame: analytic second derivatives are required");
    }
    j.d2 = frame.d2coframe(x);
  }
  return j;
}

MatrixXd minkowski(Eigen::Index n) {
  MatrixXd eta = -MatrixXd::Identity(n, n);
  if (n > 0) eta(0, 0) = 1.0;
  return eta;
}

Tensor3d teleparallel_connection(const FrameField& frame, const VectorXd& x) {
  return connection_from_jet(evaluate(frame, x));
}

Tensor3d nonholonomy(const FrameField& frame, const VectorXd& x) { return nonholonomy_from_jet(evaluate(frame, x)); }

TorsionResult torsion(const FrameField& frame, const VectorXd& x) {
  const auto j = evaluate(frame, x);
  TorsionResult r;
  r.S = torsion_from_connection(connection_from_jet(j));
  r.omega = nonholonomy_from_jet(j);
  r.two_path_residual = (r.S - torsion_from_structure(r.omega, j.coframe, j.frame)).max_abs();
  return r;
}

MatrixXd internal_metric(const MatrixXd& coframe, const MatrixXd& eta) {
  if (eta.rows() != coframe.rows() || eta.cols() != coframe.rows()) {
    fail(ErrorKind::InvalidArgument, "internal_metric: eta has wrong shape");
  }
  return coframe.transpose() * eta * coframe;
}

MatrixXd internal_metric(const FrameField& frame, const VectorXd& x, const MatrixXd& eta) {
  return internal_metric(evaluate(frame, x).coframe, eta);
}

MatrixXd killing_form(const Tensor3d& W) {
  const Index n = W.dim();
  MatrixXd gamma = MatrixXd::Zero(n, n);
  for (Index A = 0; A < n; ++A)
    for (Index B = 0; B < n; ++B)
      for (Index K = 0; K < n; ++K)
        for (Index L = 0; L < n; ++L) gamma(A, B) += W(K, L, A) * W(L, K, B);
  return gamma;
}

namespace {

MatrixXd torsion_square(const Tensor3d& S) {
  const Index n = S.dim();
  MatrixXd out = MatrixXd::Zero(n, n);
  for (Index mu = 0; mu < n; ++mu)
    for (Index nu = mu; nu < n; ++nu) {
      for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b) out(mu, nu) += S(a, b, mu) * S(b, a, nu);
      out(nu, mu) = out(mu, nu);  // symmetric by relabelling a <-> b
    }
  return out;
}

KillingResult finish_killing(const Tensor3d& W, const Tensor3d& S, const MatrixXd& E) {
  KillingResult r;
  r.gamma = killing_form(W);
  r.g_e = torsion_square(S);
  r.pullback = E.transpose() * r.gamma * E;
  const double pp = r.pullback.squaredNorm();
  if (pp > 0.0) {
    r.factor = (r.g_e.array() * r.pullback.array()).sum() / pp;
    r.proportionality_residual = (r.g_e - r.factor * r.pullback).norm() / std::max(r.g_e.norm(), 1e-300);
  } else {
    r.factor = std::numeric_limits<double>::quiet_NaN();
    r.proportionality_residual = r.g_e.norm();
  }
  return r;
}

}  // namespace

KillingResult killing_construction(const FrameField& frame, const VectorXd& x) {
  const auto j = evaluate(frame, x);
  return finish_killing(nonholonomy_from_jet(j), torsion_from_connection(connection_from_jet(j)), j.coframe);
}

KillingResult killing_construction(const Tensor3d& W, const MatrixXd& coframe) {
  const Index n = W.dim();
  if (coframe.rows() != n || coframe.cols() != n) fail(ErrorKind::InvalidArgument, "killing: coframe has wrong shape");
  for (Index C = 0; C < n; ++C)
    for (Index A = 0; A < n; ++A)
      for (Index B = 0; B < n; ++B)
        if (std::abs(W(C, A, B) + W(C, B, A)) > 1e-12 * (1.0 + W.max_abs())) {
          fail(ErrorKind::InvalidArgument, "killing: structure constants must be antisymmetric in the lower indices");
        }
  if (nearly_singular(coframe)) fail(ErrorKind::SingularFrame, "killing: coframe is degenerate");
  const MatrixXd Einv = coframe.inverse();
  return finish_killing(W, torsion_from_structure(W, coframe, Einv), coframe);
}

WeitzenbockInvariants weitzenbock_invariants(const Tensor3d& S, const MatrixXd& g) {
  const Index n = S.dim();
  const MatrixXd gi = metric_inverse(g, "weitzenbock_invariants");
  WeitzenbockInvariants w;
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < n; ++a)
      for (Index j = 0; j < n; ++j)
        for (Index b = 0; b < n; ++b)
          for (Index k = 0; k < n; ++k)
            for (Index c = 0; c < n; ++c) w.J1 += g(i, a) * gi(j, b) * gi(k, c) * S(i, j, k) * S(a, b, c);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) w.J2 += gi(i, j) * S(k, l, i) * S(l, k, j);
  const VectorXd T = torsion_trace(S);
  w.J3 = T.dot(gi * T);
  w.Lprime = (w.J1 + 2.0 * w.J2 - 4.0 * w.J3) * std::sqrt(std::abs(g.determinant()));
  return w;
}

WeitzenbockInvariants weitzenbock_invariants(const FrameField& frame, const VectorXd& x, const MatrixXd& eta) {
  const auto j = evaluate(frame, x);
  return weitzenbock_invariants(torsion_from_connection(connection_from_jet(j)), internal_metric(j.coframe, eta));
}

LagrangeTensor lagrange_tensor(const Tensor3d& S, double A, double B, double C) {
  const Index n = S.dim();
  const VectorXd T = torsion_trace(S);
  LagrangeTensor out;
  out.A = A;
  out.B = B;
  out.C = C;
  out.L = A * torsion_square(S) + B * T * T.transpose();
  for (Index mu = 0; mu < n; ++mu)
    for (Index nu = 0; nu < n; ++nu)
      for (Index a = 0; a < n; ++a) out.L(mu, nu) += C * T(a) * S(a, mu, nu);
  out.density = std::sqrt(std::abs(out.L.determinant()));
  return out;
}

LagrangeTensor lagrange_tensor(const FrameField& frame, const VectorXd& x, double A, double B, double C) {
  return lagrange_tensor(torsion_from_connection(teleparallel_connection(frame, x)), A, B, C);
}

namespace {

Tensor3d christoffel(const MatrixXd& gi, const Tensor3d& dg) {
  const Index n = gi.rows();
  Tensor3d G(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu) {
        double acc = 0.0;
        for (Index s = 0; s < n; ++s) acc += gi(l, s) * (dg(s, nu, mu) + dg(s, mu, nu) - dg(mu, nu, s));
        G(l, mu, nu) = 0.5 * acc;
      }
  return G;
}

}  // namespace

ContorsionResult contorsion(const FrameField& frame, const VectorXd& x, const MatrixXd& eta) {
  const auto j = evaluate(frame, x);
  const Index n = frame.n;
  const Tensor3d Gtel = connection_from_jet(j);
  const Tensor3d S = torsion_from_connection(Gtel);
  const MatrixXd g = internal_metric(j.coframe, eta);
  const MatrixXd gi = metric_inverse(g, "contorsion");

  // dg from the frame jet by the product rule
  Tensor3d dg(n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      for (Index m = 0; m < n; ++m) {
        double acc = 0.0;
        for (Index A = 0; A < n; ++A)
          for (Index B = 0; B < n; ++B)
            acc += eta(A, B) * (j.d1(A, a, m) * j.coframe(B, b) + j.coframe(A, a) * j.d1(B, b, m));
        dg(a, b, m) = acc;
      }

  Tensor3d S_low(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu)
        for (Index s = 0; s < n; ++s) S_low(l, mu, nu) += g(l, s) * S(s, mu, nu);

  ContorsionResult r;
  r.K = Tensor3d(n);
  for (Index l = 0; l < n; ++l)
    for (Index mu = 0; mu < n; ++mu)
      for (Index nu = 0; nu < n; ++nu)
        for (Index s = 0; s < n; ++s)
          r.K(l, mu, nu) += gi(l, s) * (S_low(s, mu, nu) + S_low(mu, nu, s) + S_low(nu, mu, s));

  const Tensor3d Gamma = christoffel(gi, dg) + r.K;
  r.decomposition_residual = (Gtel - Gamma).max_abs();
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      for (Index nu = 0; nu < n; ++nu) {
        double v = dg(a, b, nu);
        for (Index l = 0; l < n; ++l) v -= Gamma(l, a, nu) * g(l, b) + Gamma(l, b, nu) * g(a, l);
        r.metric_residual = std::max(r.metric_residual, std::abs(v));
      }
  return r;
}

MetricField metric_field(const FrameField& frame, const MatrixXd& eta) {
  const Index n = frame.n;
  MetricField m;
  m.n = n;
  m.g = [frame, eta](const VectorXd& x) { return internal_metric(frame.coframe(x), eta); };
  if (frame.mode != FrameMode::Analytic) {
    m.mode = FrameMode::FiniteDifference;
    m.fd_step = std::max(frame.fd_step, 1e-4);
    return m;
  }
  m.dg = [frame, eta, n](const VectorXd& x) {
    const auto j = evaluate(frame, x);
    Tensor3d dg(n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        for (Index k = 0; k < n; ++k)
          for (Index A = 0; A < n; ++A)
            for (Index B = 0; B < n; ++B)
              dg(a, b, k) += eta(A, B) * (j.d1(A, a, k) * j.coframe(B, b) + j.coframe(A, a) * j.d1(B, b, k));
    return dg;
  };
  if (frame.d2coframe) {
    m.d2g = [frame, eta, n](const VectorXd& x) {
      const auto j = evaluate(frame, x, true);
      const auto& d2 = *j.d2;
      Tensor4d h(n);
      for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
          for (Index k = 0; k < n; ++k)
            for (Index l = 0; l < n; ++l)
              for (Index A = 0; A < n; ++A)
                for (Index B = 0; B < n; ++B)
                  h(a, b, k, l) += eta(A, B) * (d2(A, a, k, l) * j.coframe(B, b) + j.d1(A, a, k) * j.d1(B, b, l) +
                                                j.d1(A, a, l) * j.d1(B, b, k) + j.coframe(A, a) * d2(B, b, k, l));
      return h;
    };
  }
  return m;
}

CurvatureSuite curvature_suite(const MetricField& metric, const VectorXd& x, RiemannSign sign) {
  const Index n = metric.n;
  if (x.size() != n) fail(ErrorKind::InvalidArgument, "curvature_suite: point has wrong dimension");
  const auto j = evaluate_metric(metric, x);
  const MatrixXd gi = metric_inverse(j.g, "curvature_suite");

  CurvatureSuite c;
  c.christoffel = christoffel(gi, j.dg);
  const auto& G = c.christoffel;

  // d_k Gamma^l_{mu nu}
  Tensor4d dG(n);
  for (Index k = 0; k < n; ++k) {
    MatrixXd dg_k(n, n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) dg_k(a, b) = j.dg(a, b, k);
    const MatrixXd dgi = -gi * dg_k * gi;
    for (Index l = 0; l < n; ++l)
      for (Index mu = 0; mu < n; ++mu)
        for (Index nu = 0; nu < n; ++nu) {
          double acc = 0.0;
          for (Index s = 0; s < n; ++s) {
            acc += dgi(l, s) * (j.dg(s, nu, mu) + j.dg(s, mu, nu) - j.dg(mu, nu, s));
            acc += gi(l, s) * (j.d2g(s, nu, mu, k) + j.d2g(s, mu, nu, k) - j.d2g(mu, nu, s, k));
          }
          dG(l, mu, nu, k) = 0.5 * acc;
        }
  }

  const double sgn = sign == RiemannSign::SpherePositive ? 1.0 : -1.0;
  c.riemann = Tensor4d(n);
  for (Index r = 0; r < n; ++r)
    for (Index s = 0; s < n; ++s)
      for (Index m = 0; m < n; ++m)
        for (Index v = 0; v < n; ++v) {
          double acc = dG(r, v, s, m) - dG(r, m, s, v);
          for (Index l = 0; l < n; ++l) acc += G(r, m, l) * G(l, v, s) - G(r, v, l) * G(l, m, s);
          c.riemann(r, s, m, v) = sgn * acc;
        }
  c.ricci = MatrixXd::Zero(n, n);
  for (Index s = 0; s < n; ++s)
    for (Index v = 0; v < n; ++v)
      for (Index r = 0; r < n; ++r) c.ricci(s, v) += c.riemann(r, s, r, v);
  c.scalar = (gi.array() * c.ricci.array()).sum();
  c.density = c.scalar * std::sqrt(std::abs(j.g.determinant()));
  return c;
}

Tensor4d teleparallel_curvature(const FrameField& frame, const VectorXd& x) {
  const Index n = frame.n;
  const bool analytic = frame.mode == FrameMode::Analytic && frame.d2coframe;
  const auto j = evaluate(frame, x, analytic);
  const Tensor3d G = connection_from_jet(j);
  Tensor4d dG;
  if (analytic) {
    dG = connection_derivative(j, G);
  } else {
    std::function<Tensor3d(const VectorXd&)> conn = [&frame](const VectorXd& y) {
      return teleparallel_connection(frame, y);
    };
    dG = central_difference(conn, x, n, std::max(frame.fd_step, 1e-4));
  }
  Tensor4d R(n);
  for (Index l = 0; l < n; ++l)
    for (Index m = 0; m < n; ++m)
      for (Index k = 0; k < n; ++k)
        for (Index v = 0; v < n; ++v) {
          double acc = dG(l, m, v, k) - dG(l, m, k, v);
          for (Index s = 0; s < n; ++s) acc += G(l, s, k) * G(s, m, v) - G(l, s, v) * G(s, m, k);
          R(l, m, k, v) = acc;
        }
  return R;
}

HilbertIdentity hilbert_identity(const FrameField& frame, const VectorXd& x, const MatrixXd& eta) {
  const Index n = frame.n;
  const auto j = evaluate(frame, x, true);
  const Tensor3d G = connection_from_jet(j);
  const Tensor3d S = torsion_from_connection(G);
  const Tensor4d dG = connection_derivative(j, G);
  const MatrixXd g = internal_metric(j.coframe, eta);
  const MatrixXd gi = metric_inverse(g, "hilbert_identity");
  const double vol = std::sqrt(std::abs(g.determinant()));

  const auto metric = metric_field(frame, eta);
  const Tensor3d dg = metric.dg(x);

  HilbertIdentity h;
  h.curvature_density = curvature_suite(metric, x, kHilbertIdentitySign).density;
  const auto w = weitzenbock_invariants(S, g);
  h.weitzenbock_density = w.Lprime;

  // d_i (T_b g^{bi} sqrt|g|), T_b = S^a_{ab}
  const VectorXd T = torsion_trace(S);
  double div = 0.0;
  for (Index i = 0; i < n; ++i) {
    MatrixXd dg_i(n, n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) dg_i(a, b) = dg(a, b, i);
    const MatrixXd dgi = -gi * dg_i * gi;
    const double dvol = 0.5 * vol * (gi.array() * dg_i.array()).sum();
    for (Index b = 0; b < n; ++b) {
      double dT = 0.0;
      for (Index a = 0; a < n; ++a) dT += 0.5 * (dG(a, a, b, i) - dG(a, b, a, i));
      div += dT * gi(b, i) * vol + T(b) * dgi(b, i) * vol + T(b) * gi(b, i) * dvol;
    }
  }
  h.divergence = 4.0 * div;
  h.residual = h.curvature_density - h.weitzenbock_density - h.divergence;
  return h;
}

double hilbert_identity_residual(const FrameField& frame, const VectorXd& x, const MatrixXd& eta) {
  return hilbert_identity(frame, x, eta).residual;
}

}  // namespace affsym
