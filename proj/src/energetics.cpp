#include "affsym/energetics.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace affsym {

namespace {

constexpr struct {
  KineticKind kind;
  std::string_view name;
} kKineticNames[] = {
    {KineticKind::DAlembert, "DAlembert"},       {KineticKind::LeftAffine, "LeftAffine"},
    {KineticKind::RightAffine, "RightAffine"},   {KineticKind::DoublyAffine, "DoublyAffine"},
    {KineticKind::AffMetr, "AffMetr"},           {KineticKind::MetrAff, "MetrAff"},
};

void check_square(const MatrixXd& M, Eigen::Index n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    fail(ErrorKind::InvalidArgument, std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

// A Tr(X^2) + B (Tr X)^2 part shared by the two-sided terms.
double doubly_affine_part(const InertiaParameters& p, const MatrixXd& X) {
  const double tr = X.trace();
  return 0.5 * *p.A_coeff * (X * X).trace() + 0.5 * *p.B_coeff * tr * tr;
}

// 1/2 T^{ab}{}^{cd} X_ab X_cd by explicit index summation.
double tensor_form(const MatrixXd& T, const MatrixXd& X) {
  const auto n = X.rows();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index d = 0; d < n; ++d) acc += T(a + n * b, c + n * d) * X(a, b) * X(c, d);
  return 0.5 * acc;
}

// (I/2) h_ac h^bd X^a_b X^c_d = (I/2) tr(h X h^-1 X^T)
double metric_part(double I, const MatrixXd& h, const MatrixXd& X) {
  return 0.5 * I * (h * X * h.inverse() * X.transpose()).trace();
}

}  // namespace

std::string_view to_string(KineticKind kind) {
  for (const auto& e : kKineticNames)
    if (e.kind == kind) return e.name;
  return "Unknown";
}

std::optional<KineticKind> parse_kinetic_kind(std::string_view name) {
  for (const auto& e : kKineticNames)
    if (e.name == name) return e.kind;
  return std::nullopt;
}

KineticModel KineticModel::euclidean(KineticKind kind, Eigen::Index n, InertiaParameters params) {
  return {kind, std::move(params), MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)};
}

std::vector<std::string> missing_constants(KineticKind kind, const InertiaParameters& p) {
  std::vector<std::string> out;
  auto need = [&](bool present, const char* name) {
    if (!present) out.emplace_back(name);
  };
  const bool scalars = p.I_scalar && p.A_coeff && p.B_coeff;
  switch (kind) {
    case KineticKind::DAlembert:
      need(p.J.size() > 0, "J");
      break;
    case KineticKind::LeftAffine:
      if (!p.Ltensor && !scalars) {
        need(p.I_scalar.has_value(), "I");
        need(p.A_coeff.has_value(), "A");
        need(p.B_coeff.has_value(), "B");
      }
      break;
    case KineticKind::RightAffine:
      if (!p.Rtensor && !scalars) {
        need(p.I_scalar.has_value(), "I");
        need(p.A_coeff.has_value(), "A");
        need(p.B_coeff.has_value(), "B");
      }
      break;
    case KineticKind::DoublyAffine:
      need(p.A_coeff.has_value(), "A");
      need(p.B_coeff.has_value(), "B");
      break;
    case KineticKind::AffMetr:
    case KineticKind::MetrAff:
      need(p.I_scalar.has_value(), "I");
      need(p.A_coeff.has_value(), "A");
      need(p.B_coeff.has_value(), "B");
      break;
  }
  return out;
}

void validate(const KineticModel& model) {
  const auto n = model.dim();
  if (n < 1) fail(ErrorKind::InvalidArgument, "model dimension must be positive");
  check_square(model.g, n, "g");
  check_square(model.eta, n, "eta");
  if (!(model.params.m > 0.0)) fail(ErrorKind::InvalidArgument, "mass m must be positive");
  if (const auto missing = missing_constants(model.kind, model.params); !missing.empty()) {
    fail(ErrorKind::MissingConstant,
         std::string(to_string(model.kind)) + " model requires constant " + missing.front());
  }
  if (model.kind == KineticKind::DAlembert) check_square(model.params.J, n, "J");
  if (model.params.Ltensor) check_square(*model.params.Ltensor, n * n, "Ltensor");
  if (model.params.Rtensor) check_square(*model.params.Rtensor, n * n, "Rtensor");
}

KineticParts kinetic_energy_parts(const KineticModel& model, const KinematicState<double>& s) {
  validate(model);
  const auto& p = model.params;
  KineticParts out;

  if (model.kind == KineticKind::DAlembert) {
    if (s.v.size()) out.translational = 0.5 * p.m * s.v.dot(model.g * s.v);
    out.internal = 0.5 * (s.phidot.transpose() * model.g * s.phidot * p.J).trace();
    return out;
  }

  const auto vel = affine_velocities(s);
  if (s.v.size()) {
    out.translational = detail::cauchy_translation(model.kind)
                            ? 0.5 * p.m * vel.v_hat.dot(model.eta * vel.v_hat)
                            : 0.5 * p.m * s.v.dot(model.g * s.v);
  }

  switch (model.kind) {
    case KineticKind::LeftAffine:
      out.internal = p.Ltensor ? tensor_form(*p.Ltensor, vel.omega_hat)
                               : metric_part(*p.I_scalar, model.eta, vel.omega_hat) +
                                     doubly_affine_part(p, vel.omega_hat);
      break;
    case KineticKind::RightAffine:
      out.internal = p.Rtensor ? tensor_form(*p.Rtensor, vel.omega)
                               : metric_part(*p.I_scalar, model.g, vel.omega) +
                                     doubly_affine_part(p, vel.omega);
      break;
    case KineticKind::DoublyAffine:
      out.internal = doubly_affine_part(p, vel.omega);
      break;
    case KineticKind::AffMetr:
      out.internal = metric_part(*p.I_scalar, model.eta, vel.omega_hat) + doubly_affine_part(p, vel.omega_hat);
      break;
    case KineticKind::MetrAff:
      out.internal = metric_part(*p.I_scalar, model.g, vel.omega) + doubly_affine_part(p, vel.omega);
      break;
    case KineticKind::DAlembert:
      break;
  }
  return out;
}

double kinetic_energy(const KineticModel& model, const KinematicState<double>& state) {
  return kinetic_energy_parts(model, state).total();
}

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Zero: return "Zero";
    case PotentialKind::DilatationHarmonic: return "DilatationHarmonic";
    case PotentialKind::IsotropicPolynomial: return "IsotropicPolynomial";
  }
  return "Unknown";
}

std::optional<PotentialKind> parse_potential_kind(std::string_view name) {
  for (auto k : {PotentialKind::Zero, PotentialKind::DilatationHarmonic, PotentialKind::IsotropicPolynomial})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

double potential_energy(const Potential& pot, const VectorXd& q) {
  switch (pot.kind) {
    case PotentialKind::Zero:
      return 0.0;
    case PotentialKind::DilatationHarmonic: {
      const double s = q.sum();
      return 0.5 * pot.k * s * s;
    }
    case PotentialKind::IsotropicPolynomial: {
      double acc = 0.0;
      for (Eigen::Index a = 0; a < q.size(); ++a) {
        double h = 0.0;  // Horner
        for (auto c = pot.coefficients.rbegin(); c != pot.coefficients.rend(); ++c) h = h * q(a) + *c;
        acc += h;
      }
      return acc;
    }
  }
  return 0.0;
}

VectorXd potential_gradient(const Potential& pot, const VectorXd& q) {
  VectorXd grad = VectorXd::Zero(q.size());
  switch (pot.kind) {
    case PotentialKind::Zero:
      break;
    case PotentialKind::DilatationHarmonic:
      grad.setConstant(pot.k * q.sum());
      break;
    case PotentialKind::IsotropicPolynomial:
      for (Eigen::Index a = 0; a < q.size(); ++a) {
        double h = 0.0;
        for (std::size_t j = pot.coefficients.size(); j-- > 1;) h = h * q(a) + static_cast<double>(j) * pot.coefficients[j];
        grad(a) = h;
      }
      break;
  }
  return grad;
}

namespace detail {

bool cauchy_translation(KineticKind kind) {
  return kind == KineticKind::LeftAffine || kind == KineticKind::DoublyAffine || kind == KineticKind::AffMetr;
}

MatrixXd commutation_matrix(Eigen::Index n) {
  // vec(X^T) = K vec(X)
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) K(a + n * b, b + n * a) = 1.0;
  return K;
}

InternalForm internal_form(const KineticModel& model) {
  const auto n = model.dim();
  const auto& p = model.params;
  const VectorXd d = vec(MatrixXd::Identity(n, n));
  auto two_sided = [&] { return MatrixXd(*p.A_coeff * commutation_matrix(n) + *p.B_coeff * d * d.transpose()); };
  auto metric_block = [&](const MatrixXd& h) {
    return MatrixXd(*p.I_scalar * Eigen::kroneckerProduct(MatrixXd(h.inverse()), h).eval());
  };

  InternalForm out{VelocityVariable::Raw, {}};
  switch (model.kind) {
    case KineticKind::DAlembert:
      out = {VelocityVariable::Raw, Eigen::kroneckerProduct(p.J, model.g).eval()};
      break;
    case KineticKind::LeftAffine:
      out = {VelocityVariable::Material, p.Ltensor ? *p.Ltensor : MatrixXd(metric_block(model.eta) + two_sided())};
      break;
    case KineticKind::RightAffine:
      out = {VelocityVariable::Spatial, p.Rtensor ? *p.Rtensor : MatrixXd(metric_block(model.g) + two_sided())};
      break;
    case KineticKind::DoublyAffine:
      out = {VelocityVariable::Material, two_sided()};
      break;
    case KineticKind::AffMetr:
      out = {VelocityVariable::Material, metric_block(model.eta) + two_sided()};
      break;
    case KineticKind::MetrAff:
      out = {VelocityVariable::Spatial, metric_block(model.g) + two_sided()};
      break;
  }
  out.K = 0.5 * (out.K + out.K.transpose());
  return out;
}

}  // namespace detail

ConfigMetric config_metric(const KineticModel& model, const MatrixXd& phi) {
  validate(model);
  const auto n = model.dim();
  check_square(phi, n, "phi");
  require_nonsingular(phi, "config_metric");
  const MatrixXd phi_inv = phi.inverse();
  const MatrixXd I = MatrixXd::Identity(n, n);

  ConfigMetric out;
  out.dim = n + n * n;
  out.matrix = MatrixXd::Zero(out.dim, out.dim);

  const auto& p = model.params;
  out.matrix.topLeftCorner(n, n) = detail::cauchy_translation(model.kind)
                                       ? MatrixXd(p.m * phi_inv.transpose() * model.eta * phi_inv)
                                       : MatrixXd(p.m * model.g);

  const auto form = detail::internal_form(model);
  MatrixXd P;  // vec(velocity variable) = P vec(phidot)
  switch (form.variable) {
    case detail::VelocityVariable::Raw: P = MatrixXd::Identity(n * n, n * n); break;
    case detail::VelocityVariable::Material: P = Eigen::kroneckerProduct(I, phi_inv).eval(); break;
    case detail::VelocityVariable::Spatial: P = Eigen::kroneckerProduct(phi_inv.transpose(), I).eval(); break;
  }
  out.matrix.bottomRightCorner(n * n, n * n) = P.transpose() * form.K * P;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

KinematicState<double> act(const MatrixXd& A, Side side, const KinematicState<double>& s) {
  require_nonsingular(A, "act");
  KinematicState<double> out = s;
  if (side == Side::Left) {
    if (s.x.size()) out.x = A * s.x;
    if (s.v.size()) out.v = A * s.v;
    out.phi = A * s.phi;
    out.phidot = A * s.phidot;
  } else {
    out.phi = s.phi * A;
    out.phidot = s.phidot * A;
  }
  return out;
}

double invariance_residual(const KineticModel& model, const MatrixXd& A, Side side,
                           const KinematicState<double>& state) {
  const double before = kinetic_energy(model, state);
  const double after = kinetic_energy(model, act(A, side, state));
  return std::abs(after - before) / (1.0 + std::abs(before));
}

}  // namespace affsym
