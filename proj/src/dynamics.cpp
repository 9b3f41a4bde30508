#include "affsym/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace affsym {

namespace {

using detail::unvec;
using detail::vec;

struct Split {
  Eigen::Index n;
  VectorXd xi;     // (x, vec phi)
  VectorXd xidot;  // (v, vec phidot)
};

Split split(const KinematicState<double>& s) {
  const auto n = s.dim();
  Split out{n, VectorXd(n + n * n), VectorXd(n + n * n)};
  out.xi << (s.x.size() ? s.x : VectorXd::Zero(n)), vec(s.phi);
  out.xidot << (s.v.size() ? s.v : VectorXd::Zero(n)), vec(s.phidot);
  return out;
}

KinematicState<double> join(Eigen::Index n, const VectorXd& xi, const VectorXd& xidot) {
  return {xi.head(n), xidot.head(n), unvec(xi.tail(n * n), n), unvec(xidot.tail(n * n), n)};
}

MatrixXd metric_at(const KineticModel& model, const VectorXd& xi, Eigen::Index n) {
  return config_metric(model, unvec(xi.tail(n * n), n)).matrix;
}

// dT/dxi - (dG/dt) xidot, all analytic.
VectorXd analytic_geodesic_force(const KineticModel& model, const KinematicState<double>& s) {
  const auto n = s.dim();
  const MatrixXd phi_inv = s.phi.inverse();
  const MatrixXd phi_inv_t = phi_inv.transpose();
  const auto form = detail::internal_form(model);

  MatrixXd dT_dphi = MatrixXd::Zero(n, n);
  MatrixXd pdot_phi = MatrixXd::Zero(n, n);  // derivative of p_phi along xidot at fixed velocity
  VectorXd pdot_x = VectorXd::Zero(n);

  switch (form.variable) {
    case detail::VelocityVariable::Raw:
      break;
    case detail::VelocityVariable::Material: {
      // p_phi = phi^-T S_hat, S_hat = K Omega_hat
      const MatrixXd Oh = phi_inv * s.phidot;
      const MatrixXd Sh = unvec(form.K * vec(Oh), n);
      dT_dphi -= phi_inv_t * Sh * Oh.transpose();
      pdot_phi = -phi_inv_t * Oh.transpose() * Sh - phi_inv_t * unvec(form.K * vec(Oh * Oh), n);
      break;
    }
    case detail::VelocityVariable::Spatial: {
      // p_phi = S phi^-T, S = K Omega
      const MatrixXd O = s.phidot * phi_inv;
      const MatrixXd S = unvec(form.K * vec(O), n);
      dT_dphi -= O.transpose() * S * phi_inv_t;
      pdot_phi = -unvec(form.K * vec(O * O), n) * phi_inv_t - S * O.transpose() * phi_inv_t;
      break;
    }
  }

  if (detail::cauchy_translation(model.kind) && s.v.size()) {
    const double m = model.params.m;
    const VectorXd v_hat = phi_inv * s.v;
    const MatrixXd Oh = phi_inv * s.phidot;
    dT_dphi -= m * phi_inv_t * model.eta * v_hat * v_hat.transpose();
    pdot_x = -m * phi_inv_t * (Oh.transpose() * model.eta + model.eta * Oh) * v_hat;
  }

  VectorXd out(n + n * n);
  out << -pdot_x, vec(dT_dphi - pdot_phi);
  return out;
}

// 1/2 xidot^T dG/dxi_i xidot - (dG . xidot) xidot by central differences of G.
VectorXd fd_geodesic_force(const KineticModel& model, const KinematicState<double>& s) {
  const auto n = s.dim();
  const auto [dim_n, xi, xidot] = split(s);
  const double h = 1e-6 * (1.0 + xi.norm());
  const auto N = xi.size();

  VectorXd out(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    VectorXd xp = xi, xm = xi;
    xp(i) += h;
    xm(i) -= h;
    const MatrixXd dG = (metric_at(model, xp, n) - metric_at(model, xm, n)) / (2.0 * h);
    out(i) = 0.5 * xidot.dot(dG * xidot);
  }
  const double eps = h / std::max(1.0, xidot.norm());
  const MatrixXd Gdot =
      (metric_at(model, xi + eps * xidot, n) - metric_at(model, xi - eps * xidot, n)) / (2.0 * eps);
  out -= Gdot * xidot;
  return out;
}

// G is block diagonal and its internal block is P^T K P with P built from phi,
// so it is inverted through phi rather than factored whole; the full matrix
// is far worse conditioned than K once phi is strongly stretched.
VectorXd solve_metric(const KineticModel& model, const MatrixXd& phi, const VectorXd& rhs) {
  const auto n = model.dim();
  const auto form = detail::internal_form(model);
  const Eigen::PartialPivLU<MatrixXd> lu(form.K);
  if (!(lu.rcond() > 1e-13)) fail(ErrorKind::MetricSingular, "derive_accelerations: internal inertia is singular");

  VectorXd out(n + n * n);
  const VectorXd f = rhs.head(n);
  const double m = model.params.m;
  out.head(n) = detail::cauchy_translation(model.kind) ? VectorXd(phi * model.eta.ldlt().solve(phi.transpose() * f) / m)
                                                       : VectorXd(model.g.ldlt().solve(f) / m);

  const MatrixXd R = unvec(rhs.tail(n * n), n);
  switch (form.variable) {
    case detail::VelocityVariable::Raw:
      out.tail(n * n) = lu.solve(vec(R));
      break;
    case detail::VelocityVariable::Material:
      out.tail(n * n) = vec(phi * unvec(lu.solve(vec(phi.transpose() * R)), n));
      break;
    case detail::VelocityVariable::Spatial:
      out.tail(n * n) = vec(unvec(lu.solve(vec(R * phi.transpose())), n) * phi);
      break;
  }
  return out;
}

}  // namespace

MatrixXd potential_force_gradient(const Potential& pot, const MatrixXd& phi) {
  if (pot.kind == PotentialKind::Zero) return MatrixXd::Zero(phi.rows(), phi.cols());
  const auto bp = bipolar(phi);
  // dq^a/dphi = u_a v_a^T / Q^a
  const VectorXd w = potential_gradient(pot, bp.q).cwiseQuotient(bp.Q);
  return bp.L * w.asDiagonal() * bp.R.transpose();
}

VectorXd derive_accelerations(const KineticModel& model, const Potential& pot, const KinematicState<double>& state,
                              DerivativeMode mode) {
  validate(model);
  const auto n = model.dim();
  if (state.phi.rows() != n || state.phidot.rows() != n) {
    fail(ErrorKind::InvalidArgument, "derive_accelerations: state dimension does not match model");
  }
  require_nonsingular(state.phi, "derive_accelerations");

  VectorXd rhs = mode == DerivativeMode::Analytic ? analytic_geodesic_force(model, state)
                                                  : fd_geodesic_force(model, state);
  rhs.tail(n * n) -= vec(potential_force_gradient(pot, state.phi));
  return solve_metric(model, state.phi, rhs);
}

double total_energy(const KineticModel& model, const Potential& pot, const KinematicState<double>& state) {
  double V = 0.0;
  if (pot.kind != PotentialKind::Zero) V = potential_energy(pot, bipolar(state.phi).q);
  return kinetic_energy(model, state) + V;
}

std::string_view to_string(IntegratorMethod m) {
  return m == IntegratorMethod::AdaptiveRungeKutta ? "adaptive" : "symmetric";
}

std::optional<IntegratorMethod> parse_integrator_method(std::string_view name) {
  if (name == "adaptive") return IntegratorMethod::AdaptiveRungeKutta;
  if (name == "symmetric") return IntegratorMethod::FixedStepSymmetric;
  return std::nullopt;
}

double sample_casimir(const KineticModel& model, const KinematicState<double>& state) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (model.kind != KineticKind::DoublyAffine) return nan;
  if (bipolar(state.phi).degenerate) return nan;
  try {
    return casimir_C2(to_bipolar_canonical(model, state));
  } catch (const Error&) {
    return nan;
  }
}

Trajectory make_trajectory(const KineticModel& model, const Potential& pot, std::vector<double> times,
                           std::vector<KinematicState<double>> states) {
  Trajectory t;
  t.times = std::move(times);
  t.states = std::move(states);
  const auto count = t.states.size();
  t.q.reserve(count);
  t.energy.reserve(count);
  t.casimir.reserve(count);
  t.det_phi.reserve(count);
  t.q_spread.reserve(count);
  for (const auto& s : t.states) {
    const auto bp = bipolar(s.phi);
    t.q.push_back(bp.q);
    t.energy.push_back(kinetic_energy(model, s) + potential_energy(pot, bp.q));
    t.casimir.push_back(sample_casimir(model, s));
    t.det_phi.push_back(s.phi.determinant());
    t.q_spread.push_back(q_spread(bp.q));
  }
  return t;
}

namespace {

class Rhs {
 public:
  Rhs(const KineticModel& model, const Potential& pot, DerivativeMode mode, Eigen::Index n)
      : model_(model), pot_(pot), mode_(mode), n_(n), N_(n + n * n) {}

  VectorXd operator()(const VectorXd& y) const {
    VectorXd dy(2 * N_);
    dy.head(N_) = y.tail(N_);
    dy.tail(N_) = derive_accelerations(model_, pot_, state(y), mode_);
    return dy;
  }

  KinematicState<double> state(const VectorXd& y) const { return join(n_, y.head(N_), y.tail(N_)); }

 private:
  const KineticModel& model_;
  const Potential& pot_;
  DerivativeMode mode_;
  Eigen::Index n_;
  Eigen::Index N_;
};

void check_guard(const KinematicState<double>& s, double guard, double t) {
  if (!(guard > 0.0)) return;
  const auto bp = bipolar(s.phi);
  const auto n = bp.q.size();
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a + 1 < n; ++a) gap = std::min(gap, bp.q(a) - bp.q(a + 1));
  if (gap >= guard) return;
  const MatrixXd K = bp.L.transpose() * s.phidot * bp.R;
  const double off = (K - MatrixXd(K.diagonal().asDiagonal())).norm();
  if (off > 1e-9 * (K.norm() + 1e-300)) {
    fail(ErrorKind::SingularityApproached,
         "integrate: deformation invariants within " + std::to_string(gap) + " at t=" + std::to_string(t) +
             " while the bipolar factors rotate");
  }
}

double error_norm(const VectorXd& err, const VectorXd& y0, const VectorXd& y1, double rtol, double atol) {
  const VectorXd scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
  return std::sqrt(err.cwiseQuotient(scale).squaredNorm() / static_cast<double>(err.size()));
}

struct Samples {
  std::vector<double> times;
  std::vector<KinematicState<double>> states;
};

// Dormand-Prince 5(4) with FSAL.
void run_dopri5(const Rhs& f, VectorXd y, double t, double t1, const IntegratorConfig& cfg, Samples& out) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;

  const double span = t1 - t;
  VectorXd k1 = f(y);

  // Hairer's starting step.
  double h;
  {
    const VectorXd sc = (cfg.abs_tol + cfg.rel_tol * y.cwiseAbs().array()).matrix();
    const double d0 = y.cwiseQuotient(sc).norm() / std::sqrt(double(y.size()));
    const double d1 = k1.cwiseQuotient(sc).norm() / std::sqrt(double(y.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, span, cfg.max_step});
    const VectorXd k2 = f(y + h0 * k1);
    const double d2 = (k2 - k1).cwiseQuotient(sc).norm() / std::sqrt(double(y.size())) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, span, cfg.max_step});
  }

  bool last_rejected = false;
  long steps = 0;
  while (t < t1) {
    if (++steps > cfg.max_steps) fail(ErrorKind::StepSizeUnderflow, "integrate: step budget exhausted");
    h = std::min({h, t1 - t, cfg.max_step});
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      fail(ErrorKind::StepSizeUnderflow, "integrate: step size underflow at t=" + std::to_string(t));
    }

    VectorXd y_new, k7, err;
    double err_norm;
    try {
      const VectorXd k2 = f(y + h * a21 * k1);
      const VectorXd k3 = f(y + h * (a31 * k1 + a32 * k2));
      const VectorXd k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const VectorXd k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const VectorXd k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = f(y_new);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      err_norm = error_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol);
    } catch (const Error& e) {
      // A trial stage left the admissible region; retry with a smaller step.
      if (e.kind() == ErrorKind::InvalidArgument) throw;
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    if (err_norm <= 1.0) {
      t = (t1 - t - h <= 1e-14 * std::abs(t1)) ? t1 : t + h;
      y = std::move(y_new);
      k1 = std::move(k7);
      const auto s = f.state(y);
      check_guard(s, cfg.singularity_guard, t);
      out.times.push_back(t);
      out.states.push_back(s);
      double fac = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      last_rejected = true;
    }
  }
}

// Two-stage Gauss-Legendre collocation: symmetric, order 4.
void run_gauss_legendre(const Rhs& f, VectorXd y, double t, double t1, const IntegratorConfig& cfg, Samples& out) {
  if (!(cfg.fixed_step > 0.0)) fail(ErrorKind::InvalidArgument, "integrate: fixed_step must be positive");
  const double r3 = std::sqrt(3.0);
  const double a11 = 0.25, a12 = 0.25 - r3 / 6.0, a21 = 0.25 + r3 / 6.0, a22 = 0.25;
  const auto steps = static_cast<long>(std::ceil((t1 - t) / cfg.fixed_step - 1e-9));
  if (steps > cfg.max_steps) fail(ErrorKind::StepSizeUnderflow, "integrate: step budget exhausted");
  const double h = (t1 - t) / static_cast<double>(steps);
  const double t0 = t;

  for (long k = 1; k <= steps; ++k) {
    VectorXd K1 = f(y), K2 = K1;
    double prev = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const VectorXd N1 = f(y + h * (a11 * K1 + a12 * K2));
      const VectorXd N2 = f(y + h * (a21 * K1 + a22 * K2));
      const double delta = std::max((N1 - K1).cwiseAbs().maxCoeff(), (N2 - K2).cwiseAbs().maxCoeff());
      const double size = 1.0 + std::max(N1.cwiseAbs().maxCoeff(), N2.cwiseAbs().maxCoeff());
      K1 = N1;
      K2 = N2;
      if (delta <= 1e-15 * size || (delta <= 1e-12 * size && delta >= prev)) {
        converged = true;
        break;
      }
      prev = delta;
    }
    if (!converged) {
      fail(ErrorKind::StepSizeUnderflow, "integrate: implicit stages did not converge; reduce fixed_step");
    }
    y += 0.5 * h * (K1 + K2);
    t = k == steps ? t1 : t0 + static_cast<double>(k) * h;
    const auto s = f.state(y);
    check_guard(s, cfg.singularity_guard, t);
    out.times.push_back(t);
    out.states.push_back(s);
  }
}

}  // namespace

Trajectory integrate(const KineticModel& model, const Potential& pot, const KinematicState<double>& state0,
                     double t0, double t1, const IntegratorConfig& cfg) {
  validate(model);
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) fail(ErrorKind::InvalidArgument, "integrate: tolerances must be positive");
  if (!(t1 > t0)) fail(ErrorKind::InvalidArgument, "integrate: require t1 > t0");
  require_nonsingular(state0.phi, "integrate");

  const auto n = model.dim();
  const Rhs f(model, pot, cfg.derivatives, n);
  const auto [dim_n, xi, xidot] = split(state0);
  VectorXd y(2 * xi.size());
  y << xi, xidot;

  Samples samples;
  samples.times.push_back(t0);
  samples.states.push_back(f.state(y));
  check_guard(samples.states.front(), cfg.singularity_guard, t0);

  if (cfg.method == IntegratorMethod::AdaptiveRungeKutta) {
    run_dopri5(f, y, t0, t1, cfg, samples);
  } else {
    run_gauss_legendre(f, y, t0, t1, cfg, samples);
  }
  return make_trajectory(model, pot, std::move(samples.times), std::move(samples.states));
}

ConservationReport conservation_report(const Trajectory& traj, const KineticModel& model, bool volume_preserving) {
  ConservationReport r;
  if (traj.size() == 0) return r;

  auto drift = [](const std::vector<double>& values) -> std::optional<double> {
    std::optional<double> ref;
    double worst = 0.0;
    for (double v : values) {
      if (!std::isfinite(v)) continue;
      if (!ref) {
        ref = v;
        continue;
      }
      worst = std::max(worst, std::abs(v - *ref));
    }
    if (!ref) return std::nullopt;
    return *ref != 0.0 ? worst / std::abs(*ref) : worst;
  };

  r.energy_drift = *drift(traj.energy);
  for (double e : traj.energy) r.energy_drift_abs = std::max(r.energy_drift_abs, std::abs(e - traj.energy.front()));

  if (model.kind == KineticKind::DoublyAffine) {
    std::vector<double> full, shear, traces_drift;
    const auto n = model.dim();
    const MatrixXd Oh0 = traj.states.front().phi.partialPivLu().solve(traj.states.front().phidot);
    const double scale = Oh0.norm();
    std::vector<double> traces0(n);
    {
      MatrixXd P = MatrixXd::Identity(n, n);
      for (Eigen::Index k = 0; k < n; ++k) {
        P = P * Oh0;
        traces0[k] = P.trace();
      }
    }
    double spectrum = 0.0;
    for (const auto& s : traj.states) {
      const MatrixXd Oh = s.phi.partialPivLu().solve(s.phidot);
      MatrixXd P = MatrixXd::Identity(n, n);
      for (Eigen::Index k = 0; k < n; ++k) {
        P = P * Oh;
        const double denom = std::pow(scale, double(k + 1)) + 1e-300;
        spectrum = std::max(spectrum, std::abs(P.trace() - traces0[k]) / denom);
      }
      if (bipolar(s.phi).degenerate) continue;
      try {
        const auto c = to_bipolar_canonical(model, s);
        const double C = casimir_C2(c);
        full.push_back(C);
        shear.push_back(C - c.p.sum() * c.p.sum() / double(n));
      } catch (const Error&) {
      }
    }
    r.spectrum_drift = spectrum;
    r.casimir_drift = drift(full);
    r.shear_casimir_drift = drift(shear);
  }
  if (volume_preserving) r.det_drift = drift(traj.det_phi);
  return r;
}

std::string_view to_string(MotionClass c) {
  switch (c) {
    case MotionClass::Bounded: return "bounded";
    case MotionClass::Scattering: return "scattering";
    case MotionClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

MotionClass classify_motion(const Trajectory& traj, const ClassifierConfig& cfg) {
  if (traj.size() < 8) return MotionClass::Undetermined;
  const double t_begin = traj.times.front();
  const double t_end = traj.times.back();
  if (t_end - t_begin < cfg.min_horizon) return MotionClass::Undetermined;

  std::vector<double> s(traj.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = traj.q[i].cwiseAbs().maxCoeff();

  // Linear least squares over the late half.
  const double t_mid = 0.5 * (t_begin + t_end);
  double sw = 0, st = 0, ss = 0, stt = 0, sts = 0, sss = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (traj.times[i] < t_mid) continue;
    const double t = traj.times[i];
    sw += 1;
    st += t;
    ss += s[i];
    stt += t * t;
    sts += t * s[i];
    sss += s[i] * s[i];
  }
  if (sw >= 3) {
    const double var_t = stt - st * st / sw;
    const double var_s = sss - ss * ss / sw;
    const double cov = sts - st * ss / sw;
    const double slope = var_t > 0 ? cov / var_t : 0.0;
    const double r2 = (var_t > 0 && var_s > 0) ? cov * cov / (var_t * var_s) : 0.0;
    if (slope > cfg.slope_min && r2 > cfg.r2_min && s.back() - s.front() > cfg.growth_threshold) {
      return MotionClass::Scattering;
    }
  }

  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  if (*hi - *lo <= 1e-12) return MotionClass::Undetermined;
  const double level = 0.5 * (*lo + *hi);
  double early_max = 0.0, late_max = 0.0;
  int recurrences = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (traj.times[i] < t_mid ? early_max : late_max) = std::max(traj.times[i] < t_mid ? early_max : late_max, s[i]);
    if (i > 0 && s[i - 1] >= level && s[i] < level) ++recurrences;
  }
  if (recurrences >= cfg.min_recurrences && late_max <= 1.5 * early_max + 1e-12) return MotionClass::Bounded;
  return MotionClass::Undetermined;
}

}  // namespace affsym
