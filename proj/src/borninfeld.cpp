#include "affsym/borninfeld.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace affsym {

namespace {

int levi_civita(std::array<int, 4> idx) {
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) sign = -sign;
    }
  return sign;
}

const Eigen::Matrix4d& minkowski() {
  static const Eigen::Matrix4d eta = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return eta;
}

void require_positive(double b, const char* where) {
  if (!(b > 0.0)) fail(ErrorKind::InvalidArgument, std::string(where) + ": b must be positive");
}

// 1 - 2S/b^2 - P^2/b^4, written as 1 - excess.
double born_infeld_excess(const FieldInvariants& inv, double b) {
  return 2.0 * inv.S / (b * b) + inv.P * inv.P / (b * b * b * b);
}

}  // namespace

FieldPoint FieldPoint::from_tensor(const Eigen::Matrix4d& F) {
  FieldPoint fp;
  fp.E = F.block<1, 3>(0, 1).transpose();
  fp.B = {-F(2, 3), -F(3, 1), -F(1, 2)};
  return fp;
}

Eigen::Matrix4d FieldPoint::to_tensor() const {
  Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 3; ++i) {
    F(0, i + 1) = E(i);
    F(i + 1, 0) = -E(i);
  }
  F(2, 3) = -B(0);
  F(3, 1) = -B(1);
  F(1, 2) = -B(2);
  F(3, 2) = B(0);
  F(1, 3) = B(1);
  F(2, 1) = B(2);
  return F;
}

FieldInvariants field_invariants(const FieldPoint& fp) {
  return {0.5 * (fp.E.squaredNorm() - fp.B.squaredNorm()), fp.E.dot(fp.B)};
}

FieldInvariants field_invariants(const Eigen::Matrix4d& F) {
  const auto& g = minkowski();  // its own inverse
  const Eigen::Matrix4d F_up = g * F * g;
  double FF = 0.0, FdF = 0.0;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      FF += F(m, n) * F_up(m, n);
      double dual = 0.0;
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) dual += 0.5 * levi_civita({m, n, r, s}) * F(r, s);
      FdF += F(m, n) * dual;
    }
  return {-0.25 * FF, -0.25 * FdF};
}

std::string_view to_string(LagrangianKind kind) {
  switch (kind) {
    case LagrangianKind::Maxwell: return "Maxwell";
    case LagrangianKind::BornInfeld: return "BornInfeld";
    case LagrangianKind::BornOriginal: return "BornOriginal";
  }
  return "Maxwell";
}

std::optional<LagrangianKind> parse_lagrangian_kind(std::string_view name) {
  for (auto k : {LagrangianKind::Maxwell, LagrangianKind::BornInfeld, LagrangianKind::BornOriginal})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

double lagrangian(LagrangianKind kind, const FieldPoint& fp, double b) {
  const auto inv = field_invariants(fp);
  if (kind == LagrangianKind::Maxwell) return inv.S;
  require_positive(b, "lagrangian");
  if (kind == LagrangianKind::BornInfeld) {
    // b^2 (1 - sqrt R) = b^2 (1 - R) / (1 + sqrt R)
    const double excess = born_infeld_excess(inv, b);
    const double R = 1.0 - excess;
    if (R < 0.0) fail(ErrorKind::SaturationExceeded, "lagrangian: field beyond the Born-Infeld bound");
    return b * b * excess / (1.0 + std::sqrt(R));
  }
  const double x = (fp.B.squaredNorm() - fp.E.squaredNorm()) / (b * b);
  if (1.0 + x < 0.0) fail(ErrorKind::SaturationExceeded, "lagrangian: |E| exceeds b");
  return b * b * x / (std::sqrt(1.0 + x) + 1.0);
}

double lagrangian_determinant_form(const Eigen::Matrix4d& F, const Eigen::Matrix4d& g, double b) {
  require_positive(b, "lagrangian_determinant_form");
  return b * b * std::sqrt(std::abs(g.determinant())) - std::sqrt(std::abs((b * g + F).determinant()));
}

Eigen::Vector3d electric_induction(LagrangianKind kind, const FieldPoint& fp, double b) {
  if (kind == LagrangianKind::Maxwell) return fp.E;
  require_positive(b, "electric_induction");
  const auto inv = field_invariants(fp);
  if (kind == LagrangianKind::BornInfeld) {
    const double R = 1.0 - born_infeld_excess(inv, b);
    if (!(R > 0.0)) fail(ErrorKind::SaturationExceeded, "electric_induction: field at or beyond the Born-Infeld bound");
    return (fp.E + inv.P / (b * b) * fp.B) / std::sqrt(R);
  }
  const double radicand = 1.0 + (fp.B.squaredNorm() - fp.E.squaredNorm()) / (b * b);
  if (!(radicand > 0.0)) fail(ErrorKind::SaturationExceeded, "electric_induction: |E| at or beyond b");
  return -fp.E / std::sqrt(radicand);
}

double energy_density(LagrangianKind kind, const FieldPoint& fp, double b) {
  return fp.E.dot(electric_induction(kind, fp, b)) - lagrangian(kind, fp, b);
}

RadialBIField::RadialBIField(double e, double b_) : e_charge(e), b(b_) {
  if (!(e > 0.0) || !(b_ > 0.0)) fail(ErrorKind::InvalidArgument, "RadialBIField: e and b must be positive");
}

namespace {

// phi r0 / e = int_s^inf dt / sqrt(1 + t^4); beyond t = 1 the substitution
// u = 1/t maps the tail onto int_0^{1/t} du / sqrt(1 + u^4).
double reduced_potential(double s) {
  auto f = [](double t) { return 1.0 / std::sqrt(1.0 + t * t * t * t); };
  const QuadratureOptions opt{1e-14, 1e-14, 2000};
  if (s >= 1.0) return integrate_adaptive(f, 0.0, 1.0 / s, opt).value;
  return integrate_adaptive(f, s, 1.0, opt).value + integrate_adaptive(f, 0.0, 1.0, opt).value;
}

// omega at reduced radius t = r/r0 in units of b^2. On the solution the
// radicand is 1 - E^2/b^2 = t^4 / (1 + t^4), evaluated in closed form so the
// core and the far tail keep full precision.
double reduced_density(double t) {
  const double t2 = t * t;
  const double w = 1.0 + t2 * t2;
  const double E = 1.0 / std::sqrt(w);
  const double sqrtR = t2 / std::sqrt(w);
  const double D = 1.0 / t2;          // E / sqrt R
  const double L = (1.0 / w) / (1.0 + sqrtR);  // (1 - R) / (1 + sqrt R)
  return E * D - L;
}

}  // namespace

RadialSample radial_solution(const RadialBIField& field, double r) {
  if (!(r >= 0.0)) fail(ErrorKind::InvalidArgument, "radial_solution: r must be non-negative");
  const double r0 = field.r0();
  if (std::isinf(r)) return {0.0, 0.0};
  const double t = r / r0;
  return {field.b / std::sqrt(1.0 + t * t * t * t), field.e_charge / r0 * reduced_potential(t)};
}

double radial_energy_density(const RadialBIField& field, double r) {
  if (!(r >= 0.0)) fail(ErrorKind::InvalidArgument, "radial_energy_density: r must be nonnegative");
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return field.b * field.b * reduced_density(r / field.r0());
}

double total_energy(const RadialBIField& field, double r_max, double r_min) {
  if (!(r_max > 0.0) || !(r_min >= 0.0) || !(r_min < r_max)) {
    fail(ErrorKind::InvalidArgument, "total_energy: require 0 <= r_min < r_max");
  }
  const double r0 = field.r0();
  const double t_min = r_min / r0, t_max = r_max / r0;
  const QuadratureOptions opt{1e-14, 1e-13, 4000};

  auto core = [](double t) { return t * t * reduced_density(t); };
  auto tail = [](double u) {
    const double t = 1.0 / u;
    return t * t * reduced_density(t) / (u * u);
  };
  double acc = 0.0;
  if (t_min < 1.0) acc += integrate_adaptive(core, t_min, std::min(1.0, t_max), opt).value;
  if (t_max > 1.0) {
    const double u_lo = std::isinf(t_max) ? 0.0 : 1.0 / t_max;
    const double u_hi = 1.0 / std::max(1.0, t_min);
    acc += integrate_adaptive(tail, u_lo, u_hi, opt).value;
  }
  return 4.0 * std::numbers::pi * r0 * r0 * r0 * field.b * field.b * acc;
}

}  // namespace affsym
