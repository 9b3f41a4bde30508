#pragma once

// Born-Infeld electrostatics in natural units.
//
// Tensor convention: metric diag(1,-1,-1,-1), F_{0i} = E_i,
// F_{ij} = -eps_{ijk} B_k, eps^{0123} = +1.

#include <limits>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "affsym/error.hpp"
#include "affsym/quadrature.hpp"

namespace affsym {

struct FieldPoint {
  Eigen::Vector3d E = Eigen::Vector3d::Zero();
  Eigen::Vector3d B = Eigen::Vector3d::Zero();

  static FieldPoint from_tensor(const Eigen::Matrix4d& F);
  Eigen::Matrix4d to_tensor() const;
};

struct FieldInvariants {
  double S = 0.0;  // (E^2 - B^2) / 2
  double P = 0.0;  // E . B
};

FieldInvariants field_invariants(const FieldPoint& fp);
/// S = -F_mn F^mn / 4 and P = -F_mn *F^mn / 4 by explicit index contraction.
FieldInvariants field_invariants(const Eigen::Matrix4d& F);

enum class LagrangianKind { Maxwell, BornInfeld, BornOriginal };

std::string_view to_string(LagrangianKind kind);
std::optional<LagrangianKind> parse_lagrangian_kind(std::string_view name);

/// Throws SaturationExceeded when the square-root radicand is negative.
double lagrangian(LagrangianKind kind, const FieldPoint& fp, double b);

/// b^2 sqrt|det g| - sqrt|det(b g + F)|.
double lagrangian_determinant_form(const Eigen::Matrix4d& F, const Eigen::Matrix4d& g, double b);

/// D = dL/dE.
Eigen::Vector3d electric_induction(LagrangianKind kind, const FieldPoint& fp, double b);

/// Canonical density omega = E . D - L.
double energy_density(LagrangianKind kind, const FieldPoint& fp, double b);

struct RadialBIField {
  double e_charge = 1.0;
  double b = 1.0;

  RadialBIField(double e_charge, double b);
  double r0() const { return std::sqrt(e_charge / b); }
};

struct RadialSample {
  double E = 0.0;    // |E(r)|
  double phi = 0.0;  // electrostatic potential, zero at infinity
};

/// E = e / sqrt(r0^4 + r^4), phi = int_r^inf e dx / sqrt(r0^4 + x^4).
RadialSample radial_solution(const RadialBIField& field, double r);

/// Density omega on the radial solution (BornInfeld Lagrangian); +inf at r = 0.
double radial_energy_density(const RadialBIField& field, double r);

/// int_{r_min}^{r_max} omega 4 pi r^2 dr; r_max may be infinite.
double total_energy(const RadialBIField& field, double r_max = std::numeric_limits<double>::infinity(),
                    double r_min = 0.0);

}  // namespace affsym
