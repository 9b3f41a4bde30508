#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affsym/kinematics.hpp"

namespace affsym {

enum class KineticKind {
  DAlembert,     // m/2 g(v,v) + 1/2 g_ij V^i_A V^j_B J^AB
  LeftAffine,    // affine-invariant in physical space, Cauchy translational part
  RightAffine,   // affine-invariant in material space, flat translational part
  DoublyAffine,  // A/2 Tr(Omega^2) + B/2 (Tr Omega)^2
  AffMetr,       // I/2 eta_AC eta^BD Omega_hat^A_B Omega_hat^C_D + DoublyAffine
  MetrAff,       // I/2 g_ik g^jl Omega^i_j Omega^k_l + DoublyAffine
};

inline constexpr KineticKind kAllKineticKinds[] = {
    KineticKind::DAlembert, KineticKind::LeftAffine, KineticKind::RightAffine,
    KineticKind::DoublyAffine, KineticKind::AffMetr, KineticKind::MetrAff};

std::string_view to_string(KineticKind kind);
std::optional<KineticKind> parse_kinetic_kind(std::string_view name);

struct KineticModel {
  KineticKind kind = KineticKind::DAlembert;
  InertiaParameters params;
  MatrixXd g;    // spatial metric
  MatrixXd eta;  // material metric

  Eigen::Index dim() const { return g.rows(); }

  /// Model with Euclidean g and eta.
  static KineticModel euclidean(KineticKind kind, Eigen::Index n, InertiaParameters params);
};

/// Throws MissingConstant naming the first absent constant, InvalidArgument on shape errors.
void validate(const KineticModel& model);

/// Names of every constant `kind` needs that `params` lacks.
std::vector<std::string> missing_constants(KineticKind kind, const InertiaParameters& params);

struct KineticParts {
  double translational = 0.0;
  double internal = 0.0;
  double total() const { return translational + internal; }
};

KineticParts kinetic_energy_parts(const KineticModel& model, const KinematicState<double>& state);
double kinetic_energy(const KineticModel& model, const KinematicState<double>& state);

enum class PotentialKind { Zero, DilatationHarmonic, IsotropicPolynomial };

std::string_view to_string(PotentialKind kind);
std::optional<PotentialKind> parse_potential_kind(std::string_view name);

/// Isotropic potential acting on the logarithmic deformation invariants only.
/// DilatationHarmonic: (k/2) (sum_a q^a)^2.
/// IsotropicPolynomial: sum_a sum_j coefficients[j] (q^a)^j.
struct Potential {
  PotentialKind kind = PotentialKind::Zero;
  double k = 0.0;
  std::vector<double> coefficients;

  static Potential zero() { return {}; }
  static Potential dilatation_harmonic(double k) { return {PotentialKind::DilatationHarmonic, k, {}}; }
  static Potential isotropic_polynomial(std::vector<double> c) {
    return {PotentialKind::IsotropicPolynomial, 0.0, std::move(c)};
  }
};

double potential_energy(const Potential& pot, const VectorXd& q);
/// dV/dq^a
VectorXd potential_gradient(const Potential& pot, const VectorXd& q);

/// T = 1/2 xidot^T G xidot over xi = (x, vec phi), vec column-major.
struct ConfigMetric {
  Eigen::Index dim = 0;
  MatrixXd matrix;
};

ConfigMetric config_metric(const KineticModel& model, const MatrixXd& phi);

enum class Side { Left, Right };

/// |T(g.state) - T(state)| / (1 + |T(state)|). Left acts by phi -> A phi,
/// x -> A x, v -> A v; right acts by phi -> phi A.
double invariance_residual(const KineticModel& model, const MatrixXd& A, Side side,
                           const KinematicState<double>& state);

KinematicState<double> act(const MatrixXd& A, Side side, const KinematicState<double>& state);

namespace detail {

// Internal kinetic energy as 1/2 w^T K w with w = vec of the velocity below.
enum class VelocityVariable { Raw, Material, Spatial };

struct InternalForm {
  VelocityVariable variable;
  MatrixXd K;  // symmetric n^2 x n^2
};

InternalForm internal_form(const KineticModel& model);

// Translational energy uses the Cauchy tensor (m/2 eta(v_hat, v_hat)) or the spatial metric.
bool cauchy_translation(KineticKind kind);

MatrixXd commutation_matrix(Eigen::Index n);

inline VectorXd vec(const MatrixXd& M) { return Eigen::Map<const VectorXd>(M.data(), M.size()); }
inline MatrixXd unvec(const VectorXd& w, Eigen::Index n) { return Eigen::Map<const MatrixXd>(w.data(), n, n); }

}  // namespace detail

}  // namespace affsym
