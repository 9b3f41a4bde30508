#include <algorithm>
#include <atomic>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scenario.hpp"

namespace {

using namespace affsym;
using namespace affsym::cli;

struct Outcome {
  std::string lines;
  int code = 0;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string error_line(std::string_view kind, int code, const std::string& scenario, const std::string& message) {
  return "error: kind=" + std::string(kind) + " code=" + std::to_string(code) + " scenario=" + scenario +
         " message=" + one_line(message) + "\n";
}

struct Options {
  std::vector<std::string> scenarios;
  std::string out = ".";
  unsigned batch = 1;
  std::optional<std::uint64_t> seed;
};

Outcome process(const std::string& path, const Options& opt, std::optional<ScenarioKind> expected, bool run) {
  Outcome o;
  try {
    auto sc = load_scenario(path);
    if (opt.seed) sc.seed = *opt.seed;
    if (expected && sc.kind() != *expected) {
      fail(ErrorKind::SemanticError, "scenario kind " + std::string(to_string(sc.kind())) +
                                         " does not fit this subcommand, which runs " +
                                         std::string(to_string(*expected)));
    }
    if (!run) {
      o.lines = "ok: scenario=" + path + " kind=" + std::string(to_string(sc.kind())) + "\n";
      return o;
    }
    const auto dir = sc.output ? std::filesystem::path(opt.out) / *sc.output : std::filesystem::path(opt.out);
    const auto res = run_scenario(sc, dir);
    o.lines = "ok: scenario=" + path + " kind=" + std::string(to_string(sc.kind()));
    for (const auto& f : res.files) o.lines += " wrote=" + f.string();
    o.lines += "\n";
  } catch (const Error& e) {
    o.code = exit_code(e.kind());
    o.lines = error_line(to_string(e.kind()), o.code, path, e.what());
  } catch (const std::exception& e) {
    o.code = 4;
    o.lines = error_line("InternalError", o.code, path, e.what());
  }
  return o;
}

// Scenarios run on `opt.batch` workers; reports come out in input order.
int process_all(const Options& opt, std::optional<ScenarioKind> expected, bool run) {
  std::vector<Outcome> outcomes(opt.scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < opt.scenarios.size();) {
      outcomes[i] = process(opt.scenarios[i], opt, expected, run);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.batch, unsigned(opt.scenarios.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  int code = 0;
  for (const auto& o : outcomes) {
    (o.code ? std::cerr : std::cout) << o.lines;
    if (!code) code = o.code;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affinely-rigid bodies, Born-Infeld electrostatics and tetrad invariants"};
  app.require_subcommand(1);

  Options opt;
  bool list_json = false;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenarios, "Scenario file (repeatable)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--batch", opt.batch, "Worker threads for independent scenarios")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Override the scenario seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Integrate affine_sim scenarios");
  auto* borninfeld = app.add_subcommand("borninfeld", "Evaluate born_infeld scenarios");
  auto* tetrad = app.add_subcommand("tetrad", "Evaluate tetrad_eval scenarios");
  auto* validate = app.add_subcommand("validate", "Check scenarios without running them");
  for (auto* sub : {simulate, borninfeld, tetrad, validate}) add_run_options(sub);
  auto* list = app.add_subcommand("list", "Built-in models, potentials and frames");
  list->add_flag("--json", list_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // a missing scenario file is an I/O failure, everything else a usage error
    const bool io = std::string(e.what()).find("File does not exist") != std::string::npos;
    std::cerr << error_line(io ? "IoError" : "UsageError", io ? 5 : 2, "-", e.what());
    return io ? 5 : 2;
  }

  if (list->parsed()) {
    if (list_json) {
      std::cout << builtins_json().dump(2) << '\n';
    } else {
      std::cout << builtins_text();
    }
    return 0;
  }
  if (validate->parsed()) return process_all(opt, std::nullopt, false);
  if (simulate->parsed()) return process_all(opt, ScenarioKind::AffineSim, true);
  if (borninfeld->parsed()) return process_all(opt, ScenarioKind::BornInfeld, true);
  return process_all(opt, ScenarioKind::TetradEval, true);
}
