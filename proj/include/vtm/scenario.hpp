#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vtm/chain_model.hpp"
#include "vtm/constraint_schedule.hpp"
#include "vtm/simulate.hpp"
#include "vtm/transition.hpp"

namespace vtm {

struct ScenarioEvent {
  double time_s = 0.0;
  int joint = 1;
};

/// A simulation case as read from a JSON scenario file.
struct Scenario {
  std::vector<LinkParams> links;
  double gravity = 9.81;
  VectorXd q0;
  VectorXd qd0;
  double t_end = 0.0;
  double dt = 1e-4;
  std::vector<ScenarioEvent> events;
  Formulation formulation = Formulation::index1_dae;
  TransitionMethod transition = TransitionMethod::minimal;
  /// Empty, or one applied impulse vector per event.
  std::vector<VectorXd> impulses;
  int sample_stride = 10;

  ChainModel model() const;
  ConstraintSchedule schedule() const;
  State initial_state() const;
  RunOptions run_options() const;
};

/// Checks every scenario invariant; throws ValidationError naming the field.
void validate_scenario(const Scenario& sc);

/// Parses and validates. Parse errors report the line and column, field
/// errors the JSON path of the field.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::filesystem::path& path);

}  // namespace vtm
