#pragma once

// Scenario files for the batch front end.
//
// A scenario is a JSON object whose "kind" selects one block:
//   affine_sim   model, potential, initial, integrator
//   born_infeld  e, b, grid, energy
//   tetrad_eval  frame, eta, constants, points

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "affsym/dynamics.hpp"
#include "affsym/tetrad.hpp"

namespace affsym::cli {

enum class ScenarioKind { AffineSim, BornInfeld, TetradEval };

std::string_view to_string(ScenarioKind kind);

struct AffineSimSpec {
  KineticModel model;
  Potential potential;
  std::optional<KinematicState<double>> initial;  // absent: drawn from the seed
  double random_spread = 0.3;
  double random_speed = 0.5;
  double t0 = 0.0;
  double t1 = 1.0;
  IntegratorConfig integrator;
  ClassifierConfig classifier;
  bool volume_preserving = false;
};

struct BornInfeldSpec {
  double e = 1.0;
  double b = 1.0;
  std::vector<double> radii;
  double energy_r_min = 0.0;
  double energy_r_max = std::numeric_limits<double>::infinity();
};

struct TetradSpec {
  std::string frame;
  Eigen::Index n = 0;
  double scale = 1.0;
  MatrixXd eta;
  double A = 0.0, B = 0.0, C = 0.0;
  std::vector<VectorXd> points;  // empty: drawn from the seed
  int random_count = 0;
  double random_lo = -1.0;
  double random_hi = 1.0;
};

struct Scenario {
  std::string name;  // output file stem
  std::filesystem::path source;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output;
  std::variant<AffineSimSpec, BornInfeldSpec, TetradSpec> spec;

  ScenarioKind kind() const { return static_cast<ScenarioKind>(spec.index()); }
};

/// Throws ParseError for malformed JSON or mistyped fields and SemanticError
/// listing every violated constraint.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& name);
Scenario parse_scenario_text(const std::string& text, const std::string& name);
/// IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

struct RunResult {
  std::vector<std::filesystem::path> files;
  nlohmann::ordered_json summary;
};

/// Writes `<name>_*.csv` and `<name>_summary.json` into `out_dir`.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Shortest decimal that reads back to the same double.
std::string format_number(double x);

nlohmann::ordered_json builtins_json();
std::string builtins_text();

}  // namespace affsym::cli
