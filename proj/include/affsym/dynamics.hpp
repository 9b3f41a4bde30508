#pragma once

// Geodesic (plus potential) motion of an affinely-rigid body.
//
// Every kinetic model is a quadratic form T = 1/2 xidot^T G(xi) xidot over
// xi = (x, vec phi), so one set of Euler-Lagrange equations covers them all:
//   G xiddot = dT/dxi - (d/dt G) xidot - grad V.

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "affsym/energetics.hpp"
#include "affsym/lattice.hpp"
#include "affsym/matrix_exp.hpp"

namespace affsym {

enum class DerivativeMode {
  Analytic,          // closed-form derivatives of the velocity variables
  FiniteDifference,  // central differences of G(xi), h = 1e-6 (1 + |xi|)
};

/// Stacked configuration acceleration (xddot, vec phiddot), column-major.
VectorXd derive_accelerations(const KineticModel& model, const Potential& pot, const KinematicState<double>& state,
                              DerivativeMode mode = DerivativeMode::Analytic);

/// dV/dphi for a potential of the logarithmic invariants.
MatrixXd potential_force_gradient(const Potential& pot, const MatrixXd& phi);

double total_energy(const KineticModel& model, const Potential& pot, const KinematicState<double>& state);

enum class IntegratorMethod {
  AdaptiveRungeKutta,  // Dormand-Prince 5(4)
  FixedStepSymmetric,  // two-stage Gauss-Legendre, order 4
};

std::string_view to_string(IntegratorMethod m);
std::optional<IntegratorMethod> parse_integrator_method(std::string_view name);

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::AdaptiveRungeKutta;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 1e-2;  // FixedStepSymmetric only
  // Halt when min_{a!=b} |q^a - q^b| drops below this while the bipolar
  // factors rotate; <= 0 disables the check.
  double singularity_guard = 1e-6;
  long max_steps = 50'000'000;
  DerivativeMode derivatives = DerivativeMode::Analytic;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<KinematicState<double>> states;
  std::vector<VectorXd> q;
  std::vector<double> energy;
  std::vector<double> casimir;  // NaN where undefined
  std::vector<double> det_phi;
  std::vector<double> q_spread;

  std::size_t size() const { return times.size(); }
};

/// Fills the derived columns for given samples.
Trajectory make_trajectory(const KineticModel& model, const Potential& pot, std::vector<double> times,
                           std::vector<KinematicState<double>> states);

/// Casimir C(2) for the doubly-affine model; NaN for other models or
/// coincident invariants.
double sample_casimir(const KineticModel& model, const KinematicState<double>& state);

Trajectory integrate(const KineticModel& model, const Potential& pot, const KinematicState<double>& state0,
                     double t0, double t1, const IntegratorConfig& cfg = {});

struct ConservationReport {
  double energy_drift = 0.0;  // max |E - E0| / |E0|
  double energy_drift_abs = 0.0;
  std::optional<double> casimir_drift;        // full C(2)
  std::optional<double> shear_casimir_drift;  // C(2) - (sum_a p_a)^2 / n
  std::optional<double> spectrum_drift;       // of Omega_hat via power traces
  std::optional<double> det_drift;            // only when volume preservation is declared
};

ConservationReport conservation_report(const Trajectory& traj, const KineticModel& model,
                                       bool volume_preserving = false);

enum class MotionClass { Bounded, Scattering, Undetermined };

std::string_view to_string(MotionClass c);

struct ClassifierConfig {
  double min_horizon = 10.0;
  double slope_min = 1e-3;
  double r2_min = 0.99;
  double growth_threshold = 0.5;  // late growth of the deformation extent
  int min_recurrences = 2;
};

/// Works on the deformation extent max_a |q^a|, which contains the q-spread
/// (spread <= 2 extent) and also sees pure dilatations.
MotionClass classify_motion(const Trajectory& traj, const ClassifierConfig& cfg = {});

}  // namespace affsym
