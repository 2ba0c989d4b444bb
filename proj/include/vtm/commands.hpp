#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vtm/scenario.hpp"

namespace vtm {

/// Absolute tolerance on momentum continuity across an event.
inline constexpr double kMomentumTolerance = 1e-8;
/// Max trajectory deviation allowed between momentum-consistent methods.
inline constexpr double kCompareTolerance = 1e-7;

struct EventSummary {
  double time = 0.0;
  int joint = 0;
  double kinetic_drop = 0.0;
  VectorXd impulse;
  double momentum_jump = 0.0;
};

struct RunSummary {
  TransitionMethod method = TransitionMethod::minimal;
  Formulation formulation = Formulation::index1_dae;
  std::vector<EventSummary> events;
  std::vector<double> phase_energy_drift;
  double max_constraint_drift = 0.0;
  double wall_time_s = 0.0;
  /// True when any event's momentum jump exceeds kMomentumTolerance.
  bool momentum_discontinuity = false;
};

RunSummary summarize(const RunResult& result, TransitionMethod method, Formulation formulation,
                     double wall_time_s);
void print_summary(std::ostream& out, const RunSummary& s);

/// Runs the scenario, writes the CSV trajectory to `out_path`, prints the
/// summary.
RunSummary cmd_run(const Scenario& sc, const std::filesystem::path& out_path, std::ostream& log);

struct PairDeviation {
  TransitionMethod a;
  TransitionMethod b;
  double max_deviation = 0.0;
  bool gated = false;  // both methods momentum-consistent
};

struct CompareReport {
  std::vector<TransitionMethod> methods;
  std::vector<RunSummary> runs;
  std::vector<PairDeviation> pairs;
  bool ok = false;
};

/// Max-norm deviation of q and qd over aligned rows; +inf if the sample
/// grids differ.
double trajectory_deviation(const Trajectory& a, const Trajectory& b);

/// Runs every method on the same scenario (in parallel, capped by
/// `max_threads`), writes `<out_dir>/<method>.csv`, and gates on the
/// momentum-consistent pairs.
CompareReport cmd_compare(const Scenario& sc, const std::vector<TransitionMethod>& methods,
                          const std::filesystem::path& out_dir, std::ostream& log,
                          unsigned max_threads = 0);

struct ValidateReport {
  std::vector<RegularityReport> events;
  std::vector<std::string> failures;
  bool ok = false;
};

/// Regularity checks for every event at the initial configuration.
ValidateReport cmd_validate(const Scenario& sc, std::ostream& log);

std::vector<TransitionMethod> parse_method_list(const std::string& csv);

}  // namespace vtm
