#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string_view>
#include <vector>

#include "vtm/chain_model.hpp"
#include "vtm/constraint_schedule.hpp"
#include "vtm/projection.hpp"
#include "vtm/transition.hpp"

namespace vtm {

/// Equations of motion used between events.
enum class Formulation {
  index1_dae,       // bordered mass matrix with multipliers
  projected_ode,    // M-weighted null-space projection, redundant coordinates
  voronets_minimal  // reduced to independent coordinates via F
};

std::string_view to_string(Formulation f);
/// Accepts both the long tags and the short CLI names (index1, projected, voronets).
Formulation parse_formulation(std::string_view s);

struct ConstrainedAccel {
  VectorXd qdd;
  VectorXd lambda;
};

/// Solves [[M, J^T], [J, 0]] [qdd; lambda] = [u - C qd - P - Q; -Jdot qd].
ConstrainedAccel accel_index1(const ChainModel& model, const ForceLaw& forces,
                              const ConstraintSet& constraints, const State& s);

/// qdd = M^{-1} N^T (u - C qd - P - Q) - J_M^+ Jdot qd.
VectorXd accel_projected(const ChainModel& model, const ForceLaw& forces,
                         const ConstraintSet& constraints, const State& s);

/// Fdot sd by central differences of F along qd (step 1e-6). Exactly zero
/// for constant Jacobians.
VectorXd fdot_sdot(const ConstraintSet& constraints, const Partition& part, const State& s);

/// Independent accelerations sdd from the reduced equations
/// (F^T M F) sdd = F^T (u - C qd - P - Q - M Fdot sd).
VectorXd accel_voronets(const ChainModel& model, const ForceLaw& forces,
                        const ConstraintSet& constraints, const Partition& part, const State& s);

/// Full-coordinate acceleration qdd = F sdd + Fdot sd from accel_voronets.
VectorXd lift_voronets(const ConstraintSet& constraints, const Partition& part, const State& s,
                       const VectorXd& sdd);

using AccelFn = std::function<VectorXd(const State&)>;

/// One classical RK4 step of qdd = accel(t, q, qd).
State rk4_step(const AccelFn& accel, const State& s, double dt);

struct TrajectoryRow {
  double t = 0.0;
  VectorXd q;
  VectorXd qd;
  /// Joints whose momentum components are reported, in column order.
  std::vector<int> free_joints;
  /// F^T M qd for the phase's F; one entry per free joint.
  VectorXd momentum;
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
  /// max(|h(q)|_inf, |J qd|_inf)
  double drift = 0.0;
  bool event = false;
};

/// Sampled run. Times are non-decreasing; the only repeated times are the
/// (pre, post) row pairs written at events.
struct Trajectory {
  int dof = 0;
  std::vector<TrajectoryRow> rows;
};

TrajectoryRow diagnostics_row(const ChainModel& model, const PhaseConstraints& phase,
                              const Partition& part, const State& s);

struct EventRecord {
  double time = 0.0;
  int joint = 0;  // 1-based
  double lock_value = 0.0;
  RegularityReport regularity;
  TransitionResult transition;
  /// Momenta before/after, both taken with the post-event F.
  VectorXd momentum_minus;
  VectorXd momentum_plus;
  double momentum_jump = 0.0;
  double energy_minus = 0.0;
  double energy_plus = 0.0;
};

struct PhaseRecord {
  double t_begin = 0.0;
  double t_end = 0.0;
  int locked = 0;
  double energy_begin = 0.0;
  /// max |E(t) - E(t_begin)| over every step, relative to the largest
  /// T + |V| seen in the phase.
  double energy_drift = 0.0;
  /// max |q_j - lock value| over locked joints and steps.
  double lock_deviation = 0.0;
};

struct RunOptions {
  double t_end = 1.0;
  double dt = 1e-4;
  Formulation formulation = Formulation::index1_dae;
  TransitionMethod method = TransitionMethod::minimal;
  int sample_stride = 10;
  /// Optional applied impulse U per event; empty means zero everywhere.
  std::vector<VectorXd> impulses;
};

struct RunResult {
  Trajectory trajectory;
  std::vector<EventRecord> events;
  std::vector<PhaseRecord> phases;
  ConstraintSchedule schedule;  // with captured lock values
  double max_constraint_drift = 0.0;
};

/// Events must lie on the grid t0 + k dt to within 1e-12 s.
void check_on_grid(double t, double t0, double dt, const char* what);

/// Integrates phase by phase with RK4, applying the chosen transition at
/// every scheduled lock. Locked coordinates are held at their captured
/// values and their rates at zero.
RunResult run_scenario(const ChainModel& model, const ForceLaw& forces, ConstraintSchedule schedule,
                       const State& s0, const RunOptions& options);

}  // namespace vtm
