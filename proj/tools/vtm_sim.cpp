// vtm-sim: run, compare and validate joint-locking scenarios.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vtm/commands.hpp"
#include "vtm/errors.hpp"

namespace {

constexpr int kValidationExit = 2;
constexpr int kNumericalExit = 3;

unsigned thread_cap() {
  const char* env = std::getenv("VTM_SIM_THREADS");
  if (env == nullptr) return 0;
  try {
    const int v = std::stoi(env);
    return v > 0 ? static_cast<unsigned>(v) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward dynamics of planar chains with scheduled joint locking"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string transition;
  std::string formulation;
  double dt = 0.0;
  std::string methods;

  auto* run = app.add_subcommand("run", "Simulate one scenario and write a CSV trajectory");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_option("--transition", transition, "general|partitioned|redundant|minimal|naive");
  run->add_option("--formulation", formulation, "index1|projected|voronets");
  run->add_option("--dt", dt, "Time step in seconds");

  auto* compare = app.add_subcommand("compare", "Run several transition methods and compare trajectories");
  compare->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  compare->add_option("--methods", methods, "Comma-separated transition methods")->required();
  compare->add_option("--out", out_path, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Check the schedule's regularity assumptions");
  validate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  try {
    vtm::Scenario sc = vtm::parse_scenario(scenario_path);
    if (*run) {
      if (!transition.empty()) sc.transition = vtm::parse_transition_method(transition);
      if (!formulation.empty()) sc.formulation = vtm::parse_formulation(formulation);
      if (dt > 0.0) {
        sc.dt = dt;
        vtm::validate_scenario(sc);
      } else if (run->count("--dt") > 0) {
        throw vtm::ValidationError("--dt: must be > 0");
      }
      vtm::cmd_run(sc, out_path, std::cout);
      return 0;
    }
    if (*compare) {
      const auto list = vtm::parse_method_list(methods);
      const auto report = vtm::cmd_compare(sc, list, out_path, std::cout, thread_cap());
      return report.ok ? 0 : kNumericalExit;
    }
    if (*validate) {
      const auto report = vtm::cmd_validate(sc, std::cout);
      return report.ok ? 0 : kValidationExit;
    }
  } catch (const vtm::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidationExit;
  } catch (const vtm::DimensionError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalExit;
  }
  return 0;
}
