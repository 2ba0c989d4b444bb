#include "vtm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

constexpr double kGridTolerance = 1e-12;
constexpr double kFdStep = 1e-6;

struct Dynamics {
  MatrixXd mass;
  VectorXd forces;  // u - C qd - P - Q
};

Dynamics evaluate(const ChainModel& model, const ForceLaw& forces, const State& s) {
  detail::require_size(s.q.size(), model.dof(), "state q");
  detail::require_size(s.qd.size(), model.dof(), "state qd");
  return {mass_matrix(model, s.q), forces.control(s) - coriolis_vector(model, s.q, s.qd) -
                                       gravity_vector(model, s.q) - forces.inherent(s)};
}

double phase_drift(const PhaseConstraints& phase, const State& s) {
  if (phase.count() == 0) return 0.0;
  return std::max(phase.residual(s.q).cwiseAbs().maxCoeff(),
                  (phase.selector() * s.qd).cwiseAbs().maxCoeff());
}

}  // namespace

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::index1_dae: return "index1_dae";
    case Formulation::projected_ode: return "projected_ode";
    case Formulation::voronets_minimal: return "voronets_minimal";
  }
  return "unknown";
}

Formulation parse_formulation(std::string_view s) {
  if (s == "index1_dae" || s == "index1") return Formulation::index1_dae;
  if (s == "projected_ode" || s == "projected") return Formulation::projected_ode;
  if (s == "voronets_minimal" || s == "voronets") return Formulation::voronets_minimal;
  throw ValidationError("formulation: unknown tag '" + std::string(s) +
                        "' (expected index1|projected|voronets)");
}

ConstrainedAccel accel_index1(const ChainModel& model, const ForceLaw& forces,
                              const ConstraintSet& constraints, const State& s) {
  const Dynamics d = evaluate(model, forces, s);
  const int n = model.dof();
  const int m = constraints.count();
  if (m == 0) return {d.mass.llt().solve(d.forces), VectorXd(0)};

  const MatrixXd j = constraints.jacobian(s.q);
  MatrixXd k = MatrixXd::Zero(n + m, n + m);
  k.topLeftCorner(n, n) = d.mass;
  k.topRightCorner(n, m) = j.transpose();
  k.bottomLeftCorner(m, n) = j;
  VectorXd rhs(n + m);
  rhs.head(n) = d.forces;
  rhs.tail(m) = -constraints.jacobian_rate_product(s.q, s.qd);
  const Eigen::FullPivLU<MatrixXd> lu(k);
  if (!lu.isInvertible()) throw RankError("accel_index1: constraint Jacobian is rank deficient");
  const VectorXd x = lu.solve(rhs);
  // Remove the roundoff left in J qdd + Jdot qd through the dependent
  // coordinates; for selector rows this makes locked accelerations exact zeros.
  VectorXd qdd = x.head(n);
  const Partition part = select_partition(j);
  MatrixXd jp(m, m);
  for (int k = 0; k < m; ++k) jp.col(k) = j.col(part.dependent[k]);
  const VectorXd fix = jp.fullPivLu().solve(j * qdd - rhs.tail(m));
  for (int k = 0; k < m; ++k) qdd(part.dependent[k]) -= fix(k);
  return {qdd, x.tail(m)};
}

VectorXd accel_projected(const ChainModel& model, const ForceLaw& forces,
                         const ConstraintSet& constraints, const State& s) {
  const Dynamics d = evaluate(model, forces, s);
  const Eigen::LLT<MatrixXd> llt(d.mass);
  if (constraints.count() == 0) return llt.solve(d.forces);
  const MatrixXd j = constraints.jacobian(s.q);
  const MatrixXd pinv = weighted_pseudoinverse(j, d.mass);
  const MatrixXd proj = MatrixXd::Identity(model.dof(), model.dof()) - pinv * j;
  return llt.solve(proj.transpose() * d.forces) - pinv * constraints.jacobian_rate_product(s.q, s.qd);
}

VectorXd fdot_sdot(const ConstraintSet& constraints, const Partition& part, const State& s) {
  const Eigen::Index n = s.q.size();
  if (constraints.count() == 0) return VectorXd::Zero(n);
  const MatrixXd f_plus = orthogonal_complement(constraints.jacobian(s.q + kFdStep * s.qd), part);
  const MatrixXd f_minus = orthogonal_complement(constraints.jacobian(s.q - kFdStep * s.qd), part);
  VectorXd sd(static_cast<Eigen::Index>(part.independent.size()));
  for (std::size_t k = 0; k < part.independent.size(); ++k) sd(k) = s.qd(part.independent[k]);
  return (f_plus - f_minus) * sd / (2.0 * kFdStep);
}

VectorXd accel_voronets(const ChainModel& model, const ForceLaw& forces,
                        const ConstraintSet& constraints, const Partition& part, const State& s) {
  detail::require_size(part.dof(), model.dof(), "accel_voronets partition");
  const MatrixXd f = orthogonal_complement(constraints.jacobian(s.q), part);
  const VectorXd zero = VectorXd::Zero(model.dof());
  const ReducedSystem r =
      reduced_system(f, mass_matrix(model, s.q), coriolis_vector(model, s.q, s.qd),
                     gravity_vector(model, s.q), forces.inherent(s), forces.control(s),
                     fdot_sdot(constraints, part, s));
  const Eigen::LLT<MatrixXd> llt(r.mass);
  if (llt.info() != Eigen::Success) throw NumericalError("accel_voronets: reduced mass matrix not SPD");
  return llt.solve(r.rhs);
}

VectorXd lift_voronets(const ConstraintSet& constraints, const Partition& part, const State& s,
                       const VectorXd& sdd) {
  const MatrixXd f = orthogonal_complement(constraints.jacobian(s.q), part);
  return f * sdd + fdot_sdot(constraints, part, s);
}

State rk4_step(const AccelFn& accel, const State& s, double dt) {
  if (!(dt > 0.0)) throw ValidationError("rk4_step: dt must be > 0");
  auto eval = [&](const State& st) {
    VectorXd a = accel(st);
    if (!a.allFinite()) throw NumericalError("rk4_step: non-finite acceleration at t = " + std::to_string(st.t));
    return a;
  };
  const double h = 0.5 * dt;
  const VectorXd v1 = s.qd;
  const VectorXd a1 = eval(s);
  const VectorXd v2 = s.qd + h * a1;
  const VectorXd a2 = eval({s.t + h, s.q + h * v1, v2});
  const VectorXd v3 = s.qd + h * a2;
  const VectorXd a3 = eval({s.t + h, s.q + h * v2, v3});
  const VectorXd v4 = s.qd + dt * a3;
  const VectorXd a4 = eval({s.t + dt, s.q + dt * v3, v4});

  State out;
  out.t = s.t + dt;
  out.q = s.q + (dt / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
  out.qd = s.qd + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  return out;
}

TrajectoryRow diagnostics_row(const ChainModel& model, const PhaseConstraints& phase,
                              const Partition& part, const State& s) {
  const MatrixXd mass = mass_matrix(model, s.q);
  const MatrixXd f = orthogonal_complement(phase.jacobian(s.q), part);
  TrajectoryRow row;
  row.t = s.t;
  row.q = s.q;
  row.qd = s.qd;
  row.free_joints = part.independent;
  row.momentum = f.transpose() * mass * s.qd;
  row.kinetic = 0.5 * s.qd.dot(mass * s.qd);
  row.potential = potential_energy(model, s.q);
  row.total = row.kinetic + row.potential;
  row.drift = phase_drift(phase, s);
  return row;
}

void check_on_grid(double t, double t0, double dt, const char* what) {
  const double k = std::round((t - t0) / dt);
  if (std::abs(t0 + k * dt - t) > kGridTolerance) {
    throw ValidationError(std::string(what) + ": t = " + std::to_string(t) +
                          " is not an integer multiple of dt = " + std::to_string(dt));
  }
}

namespace {

long grid_index(double t, double t0, double dt) { return std::lround((t - t0) / dt); }

class Runner {
 public:
  Runner(const ChainModel& model, const ForceLaw& forces, ConstraintSchedule schedule, const State& s0,
         const RunOptions& opt)
      : model_(model),
        forces_(forces),
        opt_(opt),
        result_{Trajectory{model.dof(), {}}, {}, {}, std::move(schedule), 0.0},
        state_(s0),
        t0_(s0.t),
        phase_(model.dof(), {}, VectorXd(0)),
        part_(locking_partition(model.dof(), {})) {}

  RunResult run() {
    validate();
    const long steps = grid_index(opt_.t_end, t0_, opt_.dt);
    std::vector<long> event_steps;
    for (const auto& e : result_.schedule.events()) event_steps.push_back(grid_index(e.time, t0_, opt_.dt));

    std::size_t next_event = 0;
    begin_phase();
    for (long k = 0; k <= steps; ++k) {
      if (k > 0) {
        State next = rk4_step([this](const State& st) { return acceleration(st); }, state_, opt_.dt);
        next.t = t0_ + static_cast<double>(k) * opt_.dt;
        clamp_locked(next);
        if (!next.q.allFinite() || !next.qd.allFinite()) {
          throw NumericalError("run: non-finite state at t = " + std::to_string(next.t));
        }
        state_ = std::move(next);
        track_phase();
      }
      if (next_event < event_steps.size() && event_steps[next_event] == k) {
        handle_event(next_event++);
      } else if (k % opt_.sample_stride == 0 || k == steps) {
        result_.trajectory.rows.push_back(diagnostics_row(model_, phase_, part_, state_));
      }
    }
    close_phase();
    return std::move(result_);
  }

 private:
  void validate() {
    const int n = model_.dof();
    detail::require_size(state_.q.size(), n, "initial q");
    detail::require_size(state_.qd.size(), n, "initial qd");
    if (result_.schedule.dof() != n) throw DimensionError("run: schedule and model dimensions differ");
    if (!(opt_.dt > 0.0)) throw ValidationError("dt: must be > 0");
    if (opt_.sample_stride < 1) throw ValidationError("sample_stride: must be >= 1");
    if (!(opt_.t_end >= t0_)) throw ValidationError("t_end: must not precede the initial time");
    check_on_grid(opt_.t_end, t0_, opt_.dt, "t_end");
    for (const auto& e : result_.schedule.events()) {
      if (e.time < t0_ || e.time > opt_.t_end) {
        throw ValidationError("events: t = " + std::to_string(e.time) + " outside [t0, t_end]");
      }
      check_on_grid(e.time, t0_, opt_.dt, "events.time_s");
    }
    if (!opt_.impulses.empty()) {
      if (opt_.impulses.size() != result_.schedule.events().size()) {
        throw ValidationError("impulses: need one vector per event");
      }
      for (const auto& u : opt_.impulses) detail::require_size(u.size(), n, "impulses entry");
    }
  }

  VectorXd acceleration(const State& st) const {
    VectorXd a;
    switch (opt_.formulation) {
      case Formulation::index1_dae:
        a = accel_index1(model_, forces_, phase_, st).qdd;
        break;
      case Formulation::projected_ode:
        a = accel_projected(model_, forces_, phase_, st);
        break;
      case Formulation::voronets_minimal:
        a = lift_voronets(phase_, part_, st, accel_voronets(model_, forces_, phase_, part_, st));
        break;
    }
    for (const int j : phase_.locked()) a(j) = 0.0;
    return a;
  }

  void clamp_locked(State& st) const {
    for (int k = 0; k < phase_.count(); ++k) {
      st.q(phase_.locked()[k]) = phase_.h_values()(k);
      st.qd(phase_.locked()[k]) = 0.0;
    }
  }

  void begin_phase() {
    PhaseRecord p;
    p.t_begin = state_.t;
    p.locked = phase_.count();
    p.energy_begin = energies(model_, state_).total;
    result_.phases.push_back(p);
    scale_ = 0.0;
    track_phase();
  }

  void track_phase() {
    PhaseRecord& p = result_.phases.back();
    const Energies e = energies(model_, state_);
    scale_ = std::max(scale_, e.kinetic + std::abs(e.potential));
    max_energy_dev_ = std::max(max_energy_dev_, std::abs(e.total - p.energy_begin));
    p.energy_drift = scale_ > 0.0 ? max_energy_dev_ / scale_ : 0.0;
    p.t_end = state_.t;
    for (int k = 0; k < phase_.count(); ++k) {
      p.lock_deviation =
          std::max(p.lock_deviation, std::abs(state_.q(phase_.locked()[k]) - phase_.h_values()(k)));
    }
    result_.max_constraint_drift = std::max(result_.max_constraint_drift, phase_drift(phase_, state_));
  }

  void close_phase() { max_energy_dev_ = 0.0; }

  void handle_event(std::size_t index) {
    close_phase();
    const PhaseConstraints before = phase_;
    result_.schedule.capture(index, state_, 0.5 * opt_.dt);
    const LockEvent& ev = result_.schedule.events()[index];
    const EventSplit split = result_.schedule.split_at_event(index);
    const MatrixXd mass = mass_matrix(model_, state_.q);

    EventRecord rec;
    rec.time = state_.t;
    rec.joint = ev.joint;
    rec.lock_value = *ev.lock_value;
    rec.regularity = validate_regularity(split.persistent, split.added, mass);
    if (!rec.regularity.ok) {
      throw NumericalError("run: lock of joint " + std::to_string(ev.joint) + " at t = " +
                           std::to_string(ev.time) + " is not a regular topology change");
    }

    TransitionInput in{mass, split.persistent, split.added, state_.qd,
                       opt_.impulses.empty() ? VectorXd() : opt_.impulses[index]};
    rec.transition = solve_transition(opt_.method, in);

    const PhaseConstraints after = result_.schedule.active_constraints_at(state_.t);
    const Partition after_part = locking_partition(model_.dof(), after.locked());

    TrajectoryRow pre = diagnostics_row(model_, after, after_part, state_);
    pre.drift = phase_drift(before, state_);
    pre.event = true;
    rec.momentum_minus = pre.momentum;
    rec.energy_minus = pre.total;
    result_.trajectory.rows.push_back(std::move(pre));

    state_.qd = rec.transition.qd_plus;
    phase_ = after;
    part_ = after_part;
    clamp_locked(state_);

    TrajectoryRow post = diagnostics_row(model_, phase_, part_, state_);
    post.event = true;
    rec.momentum_plus = post.momentum;
    rec.energy_plus = post.total;
    rec.momentum_jump =
        rec.momentum_plus.size() > 0 ? (rec.momentum_plus - rec.momentum_minus).cwiseAbs().maxCoeff() : 0.0;
    result_.trajectory.rows.push_back(std::move(post));
    result_.events.push_back(std::move(rec));
    begin_phase();
  }

  const ChainModel& model_;
  const ForceLaw& forces_;
  RunOptions opt_;
  RunResult result_;
  State state_;
  double t0_;
  PhaseConstraints phase_;
  Partition part_;
  double scale_ = 0.0;
  double max_energy_dev_ = 0.0;
};

}  // namespace

RunResult run_scenario(const ChainModel& model, const ForceLaw& forces, ConstraintSchedule schedule,
                       const State& s0, const RunOptions& options) {
  return Runner(model, forces, std::move(schedule), s0, options).run();
}

}  // namespace vtm
