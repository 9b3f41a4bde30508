#include "scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>

#include "affsym/borninfeld.hpp"
#include "affsym/lattice.hpp"

namespace affsym::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::AffineSim:
      return "affine_sim";
    case ScenarioKind::BornInfeld:
      return "born_infeld";
    case ScenarioKind::TetradEval:
      return "tetrad_eval";
  }
  return "?";
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

// Mistyped fields are parse errors; values of the right type that break a
// constraint are collected and reported together.
struct Issues {
  std::vector<std::string> list;

  void add(std::string msg) { list.push_back(std::move(msg)); }

  void raise() const {
    if (list.empty()) return;
    std::string msg;
    for (const auto& m : list) msg += (msg.empty() ? "" : "; ") + m;
    fail(ErrorKind::SemanticError, msg);
  }
};

[[noreturn]] void mistyped(const std::string& field, const char* expected) {
  fail(ErrorKind::ParseError, "field '" + field + "': expected " + expected);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed, Issues& issues) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) issues.add("unknown field '" + join(path, key) + "'");
  }
}

const json& object_at(const json& obj, const std::string& path) {
  if (!obj.is_object()) mistyped(path, "object");
  return obj;
}

const json* member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) mistyped(field, "number");
  return j.get<double>();
}

std::optional<double> opt_number(const json& obj, const std::string& path, const char* key) {
  const json* j = member(obj, key);
  if (!j || j->is_null()) return std::nullopt;
  return number(*j, join(path, key));
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) mistyped(field, "string");
  return j.get<std::string>();
}

VectorXd vector_of(const json& j, const std::string& field) {
  if (!j.is_array()) mistyped(field, "array of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

MatrixXd matrix_of(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) mistyped(field, "nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  MatrixXd M;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const VectorXd row = vector_of(j[std::size_t(r)], field + "[" + std::to_string(r) + "]");
    if (cols < 0) {
      cols = row.size();
      M.resize(rows, cols);
    } else if (row.size() != cols) {
      mistyped(field, "rows of equal length");
    }
    M.row(r) = row.transpose();
  }
  return M;
}

void expect_square(const MatrixXd& M, Eigen::Index n, const std::string& field, Issues& issues) {
  if (M.rows() != n || M.cols() != n) {
    issues.add("field '" + field + "': expected " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
}

void expect_positive(double v, const std::string& field, Issues& issues) {
  if (!(v > 0.0) || !std::isfinite(v)) issues.add("field '" + field + "' must be positive and finite");
}

MatrixXd metric_of(const json& obj, const std::string& path, const char* key, Eigen::Index n, Issues& issues) {
  const json* j = member(obj, key);
  if (!j) return MatrixXd::Identity(n, n);
  const auto field = join(path, key);
  if (j->is_string()) {
    const auto name = j->get<std::string>();
    if (name == "euclidean") return MatrixXd::Identity(n, n);
    if (name == "minkowski") return minkowski(n);
    issues.add("field '" + field + "': unknown metric '" + name + "'");
    return MatrixXd::Identity(n, n);
  }
  MatrixXd M = matrix_of(*j, field);
  expect_square(M, n, field, issues);
  if (M.rows() == n && M.cols() == n) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 0.0) issues.add("field '" + field + "' must be symmetric");
    if (std::abs(M.determinant()) < 1e-13 * std::pow(std::max(M.norm(), 1e-300), double(n))) {
      issues.add("field '" + field + "' is singular");
    }
  }
  return M;
}

// 53 random bits in [0, 1); unlike the standard distributions the sequence is
// fixed across standard library implementations.
struct Uniform {
  std::mt19937_64 engine;

  explicit Uniform(std::uint64_t seed) : engine(seed) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * double(engine() >> 11) * 0x1.0p-53; }
  MatrixXd matrix(Eigen::Index r, Eigen::Index c, double lo, double hi) {
    MatrixXd M(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) M(i, j) = (*this)(lo, hi);
    return M;
  }
};

// ---------------------------------------------------------------- affine_sim

KineticModel parse_model(const json& obj, Issues& issues) {
  const std::string path = "model";
  object_at(obj, path);
  check_keys(obj, path, {"kind", "n", "m", "J", "I", "A", "B", "g", "eta", "Ltensor", "Rtensor", "point_masses"},
             issues);
  KineticModel model;
  const json* kind = member(obj, "kind");
  if (!kind) {
    issues.add("field 'model.kind' is required");
  } else if (const auto k = parse_kinetic_kind(text(*kind, "model.kind"))) {
    model.kind = *k;
  } else {
    issues.add("field 'model.kind': unknown kinetic model '" + kind->get<std::string>() + "'");
  }
  Eigen::Index n = 0;
  if (const json* jn = member(obj, "n")) {
    if (!jn->is_number_integer()) mistyped("model.n", "integer");
    n = jn->get<Eigen::Index>();
  } else {
    issues.add("field 'model.n' is required");
  }
  if (n < 1 || n > 16) {
    issues.add("field 'model.n' must lie in 1..16");
    n = std::clamp<Eigen::Index>(n, 1, 16);
  }
  auto& p = model.params;
  if (const json* pm = member(obj, "point_masses")) {
    object_at(*pm, "model.point_masses");
    const auto before = issues.list.size();
    check_keys(*pm, "model.point_masses", {"masses", "positions"}, issues);
    std::vector<double> masses;
    std::vector<VectorXd> positions;
    if (const json* jm = member(*pm, "masses")) {
      const VectorXd m = vector_of(*jm, "model.point_masses.masses");
      masses.assign(m.data(), m.data() + m.size());
    }
    if (const json* jp = member(*pm, "positions")) {
      if (!jp->is_array()) mistyped("model.point_masses.positions", "array of vectors");
      for (std::size_t i = 0; i < jp->size(); ++i) {
        positions.push_back(vector_of((*jp)[i], "model.point_masses.positions[" + std::to_string(i) + "]"));
      }
    }
    for (const auto& x : positions) {
      if (x.size() != n) issues.add("field 'model.point_masses.positions': every position needs n components");
    }
    if (member(obj, "m") || member(obj, "J")) issues.add("give either 'model.point_masses' or 'model.m'/'model.J'");
    if (issues.list.size() == before) p = inertia_from_point_masses(masses, positions);
  }
  if (const auto m = opt_number(obj, path, "m")) {
    p.m = *m;
    expect_positive(*m, "model.m", issues);
  }
  if (const json* J = member(obj, "J")) {
    p.J = matrix_of(*J, "model.J");
    expect_square(p.J, n, "model.J", issues);
  }
  p.I_scalar = opt_number(obj, path, "I");
  p.A_coeff = opt_number(obj, path, "A");
  p.B_coeff = opt_number(obj, path, "B");
  for (const char* key : {"Ltensor", "Rtensor"}) {
    if (const json* T = member(obj, key)) {
      MatrixXd M = matrix_of(*T, join(path, key));
      expect_square(M, n * n, join(path, key), issues);
      (key[0] == 'L' ? p.Ltensor : p.Rtensor) = std::move(M);
    }
  }
  model.g = metric_of(obj, path, "g", n, issues);
  model.eta = metric_of(obj, path, "eta", n, issues);
  if (kind && parse_kinetic_kind(kind->get<std::string>())) {
    for (const auto& c : missing_constants(model.kind, p)) {
      issues.add("model " + std::string(to_string(model.kind)) + " requires constant '" + c + "'");
    }
  }
  return model;
}

Potential parse_potential(const json* obj, Issues& issues) {
  if (!obj) return Potential::zero();
  const std::string path = "potential";
  object_at(*obj, path);
  check_keys(*obj, path, {"kind", "k", "coefficients"}, issues);
  const json* kind = member(*obj, "kind");
  if (!kind) {
    issues.add("field 'potential.kind' is required");
    return Potential::zero();
  }
  const auto k = parse_potential_kind(text(*kind, "potential.kind"));
  if (!k) {
    issues.add("field 'potential.kind': unknown potential '" + kind->get<std::string>() + "'");
    return Potential::zero();
  }
  switch (*k) {
    case PotentialKind::Zero:
      return Potential::zero();
    case PotentialKind::DilatationHarmonic: {
      const auto strength = opt_number(*obj, path, "k");
      if (!strength) issues.add("potential DilatationHarmonic requires 'potential.k'");
      return Potential::dilatation_harmonic(strength.value_or(0.0));
    }
    case PotentialKind::IsotropicPolynomial: {
      const json* c = member(*obj, "coefficients");
      if (!c) {
        issues.add("potential IsotropicPolynomial requires 'potential.coefficients'");
        return Potential::zero();
      }
      const VectorXd v = vector_of(*c, "potential.coefficients");
      if (v.size() == 0) issues.add("field 'potential.coefficients' must not be empty");
      return Potential::isotropic_polynomial(std::vector<double>(v.data(), v.data() + v.size()));
    }
  }
  return Potential::zero();
}

void parse_initial(const json* obj, Eigen::Index n, AffineSimSpec& spec, Issues& issues) {
  if (!obj) {
    issues.add("field 'initial' is required");
    return;
  }
  const std::string path = "initial";
  object_at(*obj, path);
  check_keys(*obj, path, {"x", "v", "phi", "phidot", "omega_hat", "random"}, issues);
  if (const json* r = member(*obj, "random")) {
    object_at(*r, "initial.random");
    check_keys(*r, "initial.random", {"spread", "speed"}, issues);
    spec.random_spread = opt_number(*r, "initial.random", "spread").value_or(spec.random_spread);
    spec.random_speed = opt_number(*r, "initial.random", "speed").value_or(spec.random_speed);
    if (!(spec.random_spread >= 0.0 && spec.random_spread < 1.0)) {
      issues.add("field 'initial.random.spread' must lie in [0, 1)");
    }
    if (!(spec.random_speed >= 0.0)) issues.add("field 'initial.random.speed' must be nonnegative");
    if (obj->size() > 1) issues.add("'initial.random' excludes explicit initial values");
    return;
  }
  KinematicState<double> s{VectorXd::Zero(n), VectorXd::Zero(n), MatrixXd::Identity(n, n), MatrixXd::Zero(n, n)};
  for (const char* key : {"x", "v"}) {
    if (const json* j = member(*obj, key)) {
      VectorXd v = vector_of(*j, join(path, key));
      if (v.size() != n) {
        issues.add("field '" + join(path, key) + "' needs " + std::to_string(n) + " components");
      } else {
        (key[0] == 'x' ? s.x : s.v) = std::move(v);
      }
    }
  }
  if (const json* j = member(*obj, "phi")) {
    MatrixXd phi = matrix_of(*j, "initial.phi");
    expect_square(phi, n, "initial.phi", issues);
    if (phi.rows() == n && phi.cols() == n) {
      if (is_singular(phi)) issues.add("field 'initial.phi' is singular");
      s.phi = std::move(phi);
    }
  }
  const json* pd = member(*obj, "phidot");
  const json* oh = member(*obj, "omega_hat");
  if (pd && oh) issues.add("give either 'initial.phidot' or 'initial.omega_hat'");
  if (pd || oh) {
    const std::string field = pd ? "initial.phidot" : "initial.omega_hat";
    MatrixXd W = matrix_of(pd ? *pd : *oh, field);
    expect_square(W, n, field, issues);
    if (W.rows() == n && W.cols() == n) s.phidot = pd ? W : MatrixXd(s.phi * W);
  }
  spec.initial = std::move(s);
}

void parse_integrator(const json* obj, AffineSimSpec& spec, Issues& issues) {
  if (!obj) {
    issues.add("field 'integrator' is required");
    return;
  }
  const std::string path = "integrator";
  object_at(*obj, path);
  check_keys(*obj, path,
             {"method", "t0", "t1", "rel_tol", "abs_tol", "max_step", "fixed_step", "singularity_guard", "max_steps",
              "derivatives"},
             issues);
  auto& cfg = spec.integrator;
  if (const json* m = member(*obj, "method")) {
    if (const auto method = parse_integrator_method(text(*m, "integrator.method"))) {
      cfg.method = *method;
    } else {
      issues.add("field 'integrator.method': expected 'adaptive' or 'symmetric'");
    }
  }
  if (const json* d = member(*obj, "derivatives")) {
    const auto mode = text(*d, "integrator.derivatives");
    if (mode == "analytic") {
      cfg.derivatives = DerivativeMode::Analytic;
    } else if (mode == "finite_difference") {
      cfg.derivatives = DerivativeMode::FiniteDifference;
    } else {
      issues.add("field 'integrator.derivatives': expected 'analytic' or 'finite_difference'");
    }
  }
  spec.t0 = opt_number(*obj, path, "t0").value_or(0.0);
  if (const auto t1 = opt_number(*obj, path, "t1")) {
    spec.t1 = *t1;
  } else {
    issues.add("field 'integrator.t1' is required");
  }
  if (!(spec.t1 > spec.t0) || !std::isfinite(spec.t1)) issues.add("'integrator.t1' must exceed 'integrator.t0'");
  cfg.rel_tol = opt_number(*obj, path, "rel_tol").value_or(cfg.rel_tol);
  cfg.abs_tol = opt_number(*obj, path, "abs_tol").value_or(cfg.abs_tol);
  cfg.max_step = opt_number(*obj, path, "max_step").value_or(cfg.max_step);
  cfg.fixed_step = opt_number(*obj, path, "fixed_step").value_or(cfg.fixed_step);
  cfg.singularity_guard = opt_number(*obj, path, "singularity_guard").value_or(cfg.singularity_guard);
  expect_positive(cfg.rel_tol, "integrator.rel_tol", issues);
  expect_positive(cfg.abs_tol, "integrator.abs_tol", issues);
  if (!(cfg.max_step > 0.0)) issues.add("field 'integrator.max_step' must be positive");
  expect_positive(cfg.fixed_step, "integrator.fixed_step", issues);
  if (std::isnan(cfg.singularity_guard)) issues.add("field 'integrator.singularity_guard' must be a number");
  if (const json* ms = member(*obj, "max_steps")) {
    if (!ms->is_number_integer()) mistyped("integrator.max_steps", "integer");
    cfg.max_steps = ms->get<long>();
    if (cfg.max_steps < 1) issues.add("field 'integrator.max_steps' must be positive");
  }
}

void parse_classifier(const json* obj, AffineSimSpec& spec, Issues& issues) {
  if (!obj) return;
  const std::string path = "classifier";
  object_at(*obj, path);
  check_keys(*obj, path, {"min_horizon", "slope_min", "r2_min", "growth_threshold", "min_recurrences"}, issues);
  auto& c = spec.classifier;
  c.min_horizon = opt_number(*obj, path, "min_horizon").value_or(c.min_horizon);
  c.slope_min = opt_number(*obj, path, "slope_min").value_or(c.slope_min);
  c.r2_min = opt_number(*obj, path, "r2_min").value_or(c.r2_min);
  c.growth_threshold = opt_number(*obj, path, "growth_threshold").value_or(c.growth_threshold);
  if (const json* r = member(*obj, "min_recurrences")) {
    if (!r->is_number_integer()) mistyped("classifier.min_recurrences", "integer");
    c.min_recurrences = r->get<int>();
  }
  if (!(c.min_horizon >= 0.0)) issues.add("field 'classifier.min_horizon' must be nonnegative");
  if (!(c.r2_min > 0.0 && c.r2_min <= 1.0)) issues.add("field 'classifier.r2_min' must lie in (0, 1]");
  if (c.min_recurrences < 1) issues.add("field 'classifier.min_recurrences' must be positive");
}

AffineSimSpec parse_affine(const json& doc, Issues& issues) {
  AffineSimSpec spec;
  const json* model = member(doc, "model");
  if (!model) {
    issues.add("field 'model' is required");
    issues.raise();
  }
  spec.model = parse_model(*model, issues);
  spec.potential = parse_potential(member(doc, "potential"), issues);
  parse_initial(member(doc, "initial"), spec.model.dim(), spec, issues);
  parse_integrator(member(doc, "integrator"), spec, issues);
  parse_classifier(member(doc, "classifier"), spec, issues);
  if (const json* vp = member(doc, "volume_preserving")) {
    if (!vp->is_boolean()) mistyped("volume_preserving", "boolean");
    spec.volume_preserving = vp->get<bool>();
  }
  return spec;
}

// --------------------------------------------------------------- born_infeld

BornInfeldSpec parse_born_infeld(const json& doc, Issues& issues) {
  BornInfeldSpec spec;
  for (const char* key : {"e", "b"}) {
    if (const auto v = opt_number(doc, "", key)) {
      (key[0] == 'e' ? spec.e : spec.b) = *v;
      expect_positive(*v, key, issues);
    } else {
      issues.add(std::string("field '") + key + "' is required");
    }
  }
  const double r0 = std::sqrt(spec.e / spec.b);
  const json* grid = member(doc, "grid");
  const json* radii = member(doc, "radii");
  const auto before = issues.list.size();
  if (grid && radii) issues.add("give either 'grid' or 'radii'");
  if (radii) {
    const VectorXd r = vector_of(*radii, "radii");
    spec.radii.assign(r.data(), r.data() + r.size());
  } else {
    double lo = 0.0, hi = 10.0 * r0;
    long count = 101;
    if (grid) {
      object_at(*grid, "grid");
      check_keys(*grid, "grid", {"r_min", "r_max", "count"}, issues);
      lo = opt_number(*grid, "grid", "r_min").value_or(lo);
      hi = opt_number(*grid, "grid", "r_max").value_or(hi);
      if (const json* c = member(*grid, "count")) {
        if (!c->is_number_integer()) mistyped("grid.count", "integer");
        count = c->get<long>();
      }
    }
    if (count < 2 || count > 10'000'000) issues.add("field 'grid.count' must lie in 2..10000000");
    if (!(hi > lo) || !std::isfinite(hi)) issues.add("'grid.r_max' must exceed 'grid.r_min'");
    if (issues.list.size() == before) {
      for (long i = 0; i < count; ++i) spec.radii.push_back(lo + (hi - lo) * double(i) / double(count - 1));
    }
  }
  for (double r : spec.radii) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      issues.add("radii must be finite and nonnegative");
      break;
    }
  }
  if (const json* en = member(doc, "energy")) {
    object_at(*en, "energy");
    check_keys(*en, "energy", {"r_min", "r_max"}, issues);
    spec.energy_r_min = opt_number(*en, "energy", "r_min").value_or(0.0);
    spec.energy_r_max = opt_number(*en, "energy", "r_max").value_or(spec.energy_r_max);
    if (!(spec.energy_r_min >= 0.0) || !(spec.energy_r_max > spec.energy_r_min)) {
      issues.add("'energy' needs 0 <= r_min < r_max");
    }
  }
  return spec;
}

// --------------------------------------------------------------- tetrad_eval

TetradSpec parse_tetrad(const json& doc, Issues& issues) {
  TetradSpec spec;
  const json* frame = member(doc, "frame");
  if (!frame) {
    issues.add("field 'frame' is required");
    issues.raise();
  }
  spec.frame = text(*frame, "frame");
  const auto names = builtin_frame_names();
  if (std::find(names.begin(), names.end(), spec.frame) == names.end()) {
    issues.add("field 'frame': unknown frame '" + spec.frame + "'");
    issues.raise();
  }
  const Eigen::Index fixed = builtin_frame_dimension(spec.frame);
  if (const json* jn = member(doc, "n")) {
    if (!jn->is_number_integer()) mistyped("n", "integer");
    spec.n = jn->get<Eigen::Index>();
    if (fixed != 0 && spec.n != fixed) issues.add("frame '" + spec.frame + "' is " + std::to_string(fixed) + "-dimensional");
  } else {
    spec.n = fixed;
    if (fixed == 0) issues.add("frame '" + spec.frame + "' requires field 'n'");
  }
  if (spec.n < 1 || spec.n > 16) {
    issues.add("field 'n' must lie in 1..16");
    issues.raise();
  }
  spec.scale = opt_number(doc, "", "scale").value_or(1.0);
  expect_positive(spec.scale, "scale", issues);
  spec.eta = metric_of(doc, "", "eta", spec.n, issues);
  if (const json* c = member(doc, "constants")) {
    object_at(*c, "constants");
    check_keys(*c, "constants", {"A", "B", "C"}, issues);
    for (auto [key, dst] : {std::pair{"A", &spec.A}, std::pair{"B", &spec.B}, std::pair{"C", &spec.C}}) {
      if (const auto v = opt_number(*c, "constants", key)) {
        *dst = *v;
      } else {
        issues.add(std::string("tetrad_eval requires constant 'constants.") + key + "'");
      }
    }
  } else {
    issues.add("field 'constants' is required");
  }
  const json* points = member(doc, "points");
  const json* random = member(doc, "random_points");
  if (points && random) issues.add("give either 'points' or 'random_points'");
  if (points) {
    if (!points->is_array() || points->empty()) mistyped("points", "nonempty array of coordinate vectors");
    for (std::size_t i = 0; i < points->size(); ++i) {
      VectorXd x = vector_of((*points)[i], "points[" + std::to_string(i) + "]");
      if (x.size() != spec.n) issues.add("field 'points[" + std::to_string(i) + "]' needs n components");
      spec.points.push_back(std::move(x));
    }
  } else if (random) {
    object_at(*random, "random_points");
    check_keys(*random, "random_points", {"count", "lo", "hi"}, issues);
    if (const json* c = member(*random, "count")) {
      if (!c->is_number_integer()) mistyped("random_points.count", "integer");
      spec.random_count = c->get<int>();
    }
    spec.random_lo = opt_number(*random, "random_points", "lo").value_or(spec.random_lo);
    spec.random_hi = opt_number(*random, "random_points", "hi").value_or(spec.random_hi);
    if (spec.random_count < 1) issues.add("field 'random_points.count' must be positive");
    if (!(spec.random_hi > spec.random_lo)) issues.add("'random_points.hi' must exceed 'random_points.lo'");
  } else {
    issues.add("field 'points' or 'random_points' is required");
  }
  return spec;
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::string& name) {
  object_at(doc, "<root>");
  Issues issues;
  Scenario sc;
  sc.name = name;
  const json* kind = member(doc, "kind");
  if (!kind) fail(ErrorKind::SemanticError, "field 'kind' is required");
  const auto k = text(*kind, "kind");
  if (const json* n = member(doc, "name")) sc.name = text(*n, "name");
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos) {
    issues.add("field 'name' must be a nonempty file stem");
  }
  if (const json* s = member(doc, "seed")) {
    if (!s->is_number_unsigned()) mistyped("seed", "unsigned integer");
    sc.seed = s->get<std::uint64_t>();
  }
  if (const json* o = member(doc, "output")) sc.output = text(*o, "output");

  if (k == "affine_sim") {
    check_keys(doc, "",
               {"kind", "name", "seed", "output", "model", "potential", "initial", "integrator", "classifier",
                "volume_preserving"},
               issues);
    sc.spec = parse_affine(doc, issues);
  } else if (k == "born_infeld") {
    check_keys(doc, "", {"kind", "name", "seed", "output", "e", "b", "grid", "radii", "energy"}, issues);
    sc.spec = parse_born_infeld(doc, issues);
  } else if (k == "tetrad_eval") {
    check_keys(doc, "",
               {"kind", "name", "seed", "output", "frame", "n", "scale", "eta", "constants", "points",
                "random_points"},
               issues);
    sc.spec = parse_tetrad(doc, issues);
  } else {
    issues.add("field 'kind': expected affine_sim, born_infeld or tetrad_eval");
  }
  issues.raise();
  return sc;
}

Scenario parse_scenario_text(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, e.what());
  }
  try {
    return parse_scenario(doc, name);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot read scenario '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto sc = parse_scenario_text(buf.str(), path.stem().string());
  sc.source = path;
  return sc;
}

// ----------------------------------------------------------------- running

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  }

  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) fail(ErrorKind::IoError, "failed writing '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) fail(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

ordered_json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
}

KinematicState<double> random_initial(const AffineSimSpec& spec, std::uint64_t seed) {
  const auto n = spec.model.dim();
  Uniform u(seed);
  KinematicState<double> s;
  s.x = VectorXd::Zero(n);
  s.v = u.matrix(n, 1, -spec.random_speed, spec.random_speed);
  // redraw until phi is comfortably orientation preserving
  do {
    s.phi = MatrixXd::Identity(n, n) + u.matrix(n, n, -spec.random_spread, spec.random_spread);
  } while (!(s.phi.determinant() > 0.1));
  s.phidot = u.matrix(n, n, -spec.random_speed, spec.random_speed);
  return s;
}

RunResult run_affine(const Scenario& sc, const AffineSimSpec& spec, const std::filesystem::path& dir) {
  const auto n = spec.model.dim();
  const auto s0 = spec.initial ? *spec.initial : random_initial(spec, sc.seed);
  const auto traj = integrate(spec.model, spec.potential, s0, spec.t0, spec.t1, spec.integrator);

  RunResult res;
  const auto csv_path = dir / (sc.name + "_trajectory.csv");
  CsvWriter csv(csv_path);
  std::vector<std::string> cols{"t"};
  for (Eigen::Index i = 0; i < n; ++i) cols.push_back("x" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index K = 0; K < n; ++K) cols.push_back("phi_" + std::to_string(i + 1) + "_" + std::to_string(K + 1));
  for (Eigen::Index a = 0; a < n; ++a) cols.push_back("q" + std::to_string(a + 1));
  for (const char* c : {"energy", "casimir", "det_phi", "q_spread"}) cols.emplace_back(c);
  csv.header(cols);
  std::vector<double> row;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj.states[k];
    row.assign({traj.times[k]});
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(s.x(i));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index K = 0; K < n; ++K) row.push_back(s.phi(i, K));
    for (Eigen::Index a = 0; a < n; ++a) row.push_back(traj.q[k](a));
    row.insert(row.end(), {traj.energy[k], traj.casimir[k], traj.det_phi[k], traj.q_spread[k]});
    csv.row(row);
  }
  csv.close();
  res.files.push_back(csv_path);

  const auto rep = conservation_report(traj, spec.model, spec.volume_preserving);
  auto& js = res.summary;
  js["scenario"] = sc.name;
  js["kind"] = to_string(sc.kind());
  js["seed"] = sc.seed;
  js["model"] = to_string(spec.model.kind);
  js["potential"] = to_string(spec.potential.kind);
  js["integrator"] = to_string(spec.integrator.method);
  js["n"] = n;
  js["samples"] = traj.size();
  js["t_final"] = traj.times.back();
  js["energy_initial"] = traj.energy.front();
  js["energy_drift"] = rep.energy_drift;
  js["energy_drift_abs"] = rep.energy_drift_abs;
  js["casimir_drift"] = optional_number(rep.casimir_drift);
  js["shear_casimir_drift"] = optional_number(rep.shear_casimir_drift);
  // the spectrum of Omega_hat is conserved on free geodesics only
  js["spectrum_drift"] =
      spec.potential.kind == PotentialKind::Zero ? optional_number(rep.spectrum_drift) : ordered_json(nullptr);
  js["det_drift"] = optional_number(rep.det_drift);
  js["q_spread_final"] = traj.q_spread.back();
  js["classification"] = to_string(classify_motion(traj, spec.classifier));
  return res;
}

RunResult run_born_infeld(const Scenario& sc, const BornInfeldSpec& spec, const std::filesystem::path& dir) {
  const RadialBIField field(spec.e, spec.b);
  RunResult res;
  const auto csv_path = dir / (sc.name + "_radial.csv");
  CsvWriter csv(csv_path);
  csv.header({"r", "E", "phi", "omega"});
  for (double r : spec.radii) {
    const auto s = radial_solution(field, r);
    csv.row({r, s.E, s.phi, radial_energy_density(field, r)});
  }
  csv.close();
  res.files.push_back(csv_path);

  const auto origin = radial_solution(field, 0.0);
  auto& js = res.summary;
  js["scenario"] = sc.name;
  js["kind"] = to_string(sc.kind());
  js["e"] = spec.e;
  js["b"] = spec.b;
  js["r0"] = field.r0();
  js["E_at_origin"] = origin.E;
  js["phi_at_origin"] = origin.phi;
  js["energy_r_min"] = spec.energy_r_min;
  js["energy_r_max"] = std::isfinite(spec.energy_r_max) ? ordered_json(spec.energy_r_max) : ordered_json("inf");
  js["total_energy"] = total_energy(field, spec.energy_r_max, spec.energy_r_min);
  js["samples"] = spec.radii.size();
  return res;
}

RunResult run_tetrad(const Scenario& sc, const TetradSpec& spec, const std::filesystem::path& dir) {
  const auto frame = builtin_frame(spec.frame, spec.n, spec.scale);
  std::vector<VectorXd> points = spec.points;
  if (points.empty()) {
    Uniform u(sc.seed);
    for (int i = 0; i < spec.random_count; ++i) points.push_back(u.matrix(spec.n, 1, spec.random_lo, spec.random_hi));
  }

  RunResult res;
  const auto csv_path = dir / (sc.name + "_invariants.csv");
  CsvWriter csv(csv_path);
  std::vector<std::string> cols;
  for (Eigen::Index i = 0; i < spec.n; ++i) cols.push_back("x" + std::to_string(i + 1));
  for (const char* c : {"J1", "J2", "J3", "Lprime", "L_density", "residual37"}) cols.emplace_back(c);
  csv.header(cols);
  double max_residual = 0.0, max_two_path = 0.0;
  std::vector<double> row;
  for (const auto& x : points) {
    const auto w = weitzenbock_invariants(frame, x, spec.eta);
    const auto L = lagrange_tensor(frame, x, spec.A, spec.B, spec.C);
    const double r37 = hilbert_identity_residual(frame, x, spec.eta);
    max_residual = std::max(max_residual, std::abs(r37));
    max_two_path = std::max(max_two_path, torsion(frame, x).two_path_residual);
    row.assign(x.data(), x.data() + x.size());
    row.insert(row.end(), {w.J1, w.J2, w.J3, w.Lprime, L.density, r37});
    csv.row(row);
  }
  csv.close();
  res.files.push_back(csv_path);

  const auto killing = killing_construction(frame, points.front());
  auto& js = res.summary;
  js["scenario"] = sc.name;
  js["kind"] = to_string(sc.kind());
  js["seed"] = sc.seed;
  js["frame"] = spec.frame;
  js["n"] = spec.n;
  js["points"] = points.size();
  js["max_abs_residual37"] = max_residual;
  js["max_two_path_torsion_residual"] = max_two_path;
  js["killing_factor"] = optional_number(killing.factor);
  js["killing_proportionality_residual"] = optional_number(killing.proportionality_residual);
  return res;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
  RunResult res = std::visit(
      [&](const auto& spec) -> RunResult {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, AffineSimSpec>) return run_affine(scenario, spec, out_dir);
        if constexpr (std::is_same_v<T, BornInfeldSpec>) return run_born_infeld(scenario, spec, out_dir);
        if constexpr (std::is_same_v<T, TetradSpec>) return run_tetrad(scenario, spec, out_dir);
      },
      scenario.spec);
  const auto summary_path = out_dir / (scenario.name + "_summary.json");
  write_json(summary_path, res.summary);
  res.files.push_back(summary_path);
  return res;
}

ordered_json builtins_json() {
  ordered_json js;
  js["scenario_kinds"] = {"affine_sim", "born_infeld", "tetrad_eval"};
  ordered_json models = ordered_json::array();
  for (auto kind : kAllKineticKinds) {
    models.push_back({{"name", to_string(kind)}, {"constants", missing_constants(kind, {})}});
  }
  js["kinetic_models"] = models;
  js["potentials"] = ordered_json::array();
  for (auto kind : {PotentialKind::Zero, PotentialKind::DilatationHarmonic, PotentialKind::IsotropicPolynomial}) {
    js["potentials"].push_back(to_string(kind));
  }
  js["integrators"] = {to_string(IntegratorMethod::AdaptiveRungeKutta), to_string(IntegratorMethod::FixedStepSymmetric)};
  ordered_json frames = ordered_json::array();
  for (const auto& name : builtin_frame_names()) {
    const auto n = builtin_frame_dimension(name);
    frames.push_back({{"name", name}, {"dimension", n == 0 ? ordered_json("any") : ordered_json(n)}});
  }
  js["frames"] = frames;
  return js;
}

std::string builtins_text() {
  const auto js = builtins_json();
  std::ostringstream out;
  out << "scenario kinds:\n";
  for (const auto& k : js["scenario_kinds"]) out << "  " << k.get<std::string>() << '\n';
  out << "kinetic models (required constants):\n";
  for (const auto& m : js["kinetic_models"]) {
    out << "  " << m["name"].get<std::string>();
    for (const auto& c : m["constants"]) out << ' ' << c.get<std::string>();
    out << '\n';
  }
  out << "potentials:\n";
  for (const auto& p : js["potentials"]) out << "  " << p.get<std::string>() << '\n';
  out << "integrators:\n";
  for (const auto& p : js["integrators"]) out << "  " << p.get<std::string>() << '\n';
  out << "frames (dimension):\n";
  for (const auto& f : js["frames"]) out << "  " << f["name"].get<std::string>() << ' ' << f["dimension"].dump() << '\n';
  return out.str();
}

}  // namespace affsym::cli
