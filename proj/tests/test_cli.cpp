#include "doctest.h"

#include <fstream>
#include <sstream>

#include "scenario.hpp"

using namespace affsym;
using namespace affsym::cli;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_scenario_text(text, "t");
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_scenario_text(text, "t");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("affsym_test_cli_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const char* kMinimal = R"({
  "kind": "affine_sim",
  "model": {"kind": "DoublyAffine", "n": 2, "A": 1.0, "B": 0.0},
  "initial": {"omega_hat": [[0.0, 0.2], [0.2, 0.0]]},
  "integrator": {"t1": 2.0, "singularity_guard": 0.0}
})";

}  // namespace

TEST_CASE("minimal scenario validates") {
  const auto sc = parse_scenario_text(kMinimal, "minimal");
  CHECK(sc.kind() == ScenarioKind::AffineSim);
  const auto& spec = std::get<AffineSimSpec>(sc.spec);
  CHECK(spec.model.kind == KineticKind::DoublyAffine);
  CHECK(spec.initial->phi == MatrixXd::Identity(2, 2));
  CHECK(spec.t1 == 2.0);
}

TEST_CASE("semantic errors name every violation") {
  const std::string text = R"({
    "kind": "affine_sim",
    "model": {"kind": "DoublyAffine", "n": 2, "B": 0.0, "colour": 1},
    "initial": {},
    "integrator": {"t1": 1.0, "rel_tol": -1.0}
  })";
  CHECK(kind_of(text) == ErrorKind::SemanticError);
  const auto msg = message_of(text);
  CHECK(msg.find("'A'") != std::string::npos);
  CHECK(msg.find("rel_tol") != std::string::npos);
  CHECK(msg.find("model.colour") != std::string::npos);
  CHECK(exit_code(ErrorKind::SemanticError) == 3);
}

TEST_CASE("malformed files are parse errors") {
  CHECK(kind_of(R"({"kind": "affine_sim", )") == ErrorKind::ParseError);
  CHECK(message_of("{\n\"kind\": }").find("line 2") != std::string::npos);
  CHECK(kind_of(R"({"kind": "born_infeld", "e": "one", "b": 1})") == ErrorKind::ParseError);
  CHECK(message_of(R"({"kind": "born_infeld", "e": "one", "b": 1})").find("'e'") != std::string::npos);
  CHECK(kind_of(R"({"kind": "tetrad_eval", "frame": "torus"})") == ErrorKind::SemanticError);
  CHECK(kind_of(R"({"kind": "fluid"})") == ErrorKind::SemanticError);
  CHECK(exit_code(ErrorKind::ParseError) == 2);
  try {
    load_scenario("/nonexistent/scenario.json");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
    CHECK(exit_code(e.kind()) == 5);
  }
}

TEST_CASE("doubly-affine scenario reports drift and classification") {
  const auto dir = scratch("sim");
  const auto res = run_scenario(parse_scenario_text(kMinimal, "minimal"), dir);
  CHECK(res.files.size() == 2);
  CHECK(res.summary["energy_drift"].get<double>() < 1e-8);
  CHECK(res.summary["classification"].is_string());
  std::istringstream csv(slurp(dir / "minimal_trajectory.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,x1,x2,phi_1_1,phi_1_2,phi_2_1,phi_2_2,q1,q2,energy,casimir,det_phi,q_spread");
  std::filesystem::remove_all(dir);
}

TEST_CASE("numerical failures surface with their own code") {
  const auto sc = parse_scenario_text(R"({
    "kind": "affine_sim",
    "model": {"kind": "DoublyAffine", "n": 2, "A": 1.0, "B": 0.0},
    "initial": {"phidot": [[0.0, -1.0], [1.0, 0.0]]},
    "integrator": {"t1": 1.0}
  })", "guard");
  const auto dir = scratch("guard");
  try {
    run_scenario(sc, dir);
    FAIL("expected SingularityApproached");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularityApproached);
    CHECK(exit_code(e.kind()) == 4);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("Born-Infeld scenario starts at E = b") {
  const auto dir = scratch("bi");
  run_scenario(parse_scenario_text(R"({"kind": "born_infeld", "e": 1, "b": 1, "radii": [0, 1, 20]})", "bi"), dir);
  std::istringstream csv(slurp(dir / "bi_radial.csv"));
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "r,E,phi,omega");
  CHECK(first.rfind("0,1,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coordinate frame gives zero invariants") {
  const auto dir = scratch("tetrad");
  run_scenario(parse_scenario_text(R"({"kind": "tetrad_eval", "frame": "coordinate", "n": 3,
      "constants": {"A": 1, "B": 2, "C": 3}, "random_points": {"count": 5}, "seed": 3})", "flat"),
               dir);
  std::istringstream csv(slurp(dir / "flat_invariants.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x1,x2,x3,J1,J2,J3,Lprime,L_density,residual37");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string f;
    for (int i = 0; std::getline(fields, f, ','); ++i) {
      if (i >= 3) CHECK(std::stod(f) == 0.0);
    }
  }
  CHECK(rows == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("built-in listing") {
  const auto js = builtins_json();
  CHECK(js["kinetic_models"].size() == 6);
  CHECK(js["frames"].size() == 4);
  const auto text = builtins_text();
  for (auto kind : kAllKineticKinds) CHECK(text.find(std::string(to_string(kind))) != std::string::npos);
  for (const auto& f : builtin_frame_names()) CHECK(text.find(f) != std::string::npos);
}

TEST_CASE("seeded random scenarios are reproducible") {
  const std::string text = R"({"kind": "affine_sim", "seed": 99,
    "model": {"kind": "LeftAffine", "n": 2, "I": 1.0, "A": 0.2, "B": 0.1},
    "initial": {"random": {"spread": 0.3, "speed": 0.3}},
    "integrator": {"t1": 1.0, "singularity_guard": 0.0}})";
  const auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  run_scenario(parse_scenario_text(text, "r"), a);
  run_scenario(parse_scenario_text(text, "r"), b);
  auto other = parse_scenario_text(text, "r");
  other.seed = 100;
  run_scenario(other, c);
  CHECK(slurp(a / "r_trajectory.csv") == slurp(b / "r_trajectory.csv"));
  CHECK(slurp(a / "r_trajectory.csv") != slurp(c / "r_trajectory.csv"));
  for (const auto& d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST_CASE("numbers round-trip") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(1.0) == "1");
}
