#include <doctest.h>

#include "support.hpp"
#include "vtm/commands.hpp"
#include "vtm/errors.hpp"
#include "vtm/scenario.hpp"
#include "vtm/simulate.hpp"

using namespace vtm;
using namespace vtm::testing;

namespace {

Scenario locking_scenario() { return parse_scenario(VTM_SCENARIO_DIR "/3r_locking.json"); }

RunResult run(const Scenario& sc, TransitionMethod method, Formulation f) {
  RunOptions opt = sc.run_options();
  opt.method = method;
  opt.formulation = f;
  return run_scenario(sc.model(), ForceLaw{}, sc.schedule(), sc.initial_state(), opt);
}

const RunResult& golden() {
  static const RunResult r = run(locking_scenario(), TransitionMethod::minimal, Formulation::voronets_minimal);
  return r;
}

State random_state(std::mt19937& rng, int n, const std::vector<int>& locked) {
  State s;
  s.q = random_vector(rng, n);
  s.qd = random_vector(rng, n);
  for (int j : locked) s.qd(j) = 0.0;
  return s;
}

// Event rows come in (pre, post) pairs.
std::vector<std::pair<TrajectoryRow, TrajectoryRow>> event_pairs(const Trajectory& t) {
  std::vector<std::pair<TrajectoryRow, TrajectoryRow>> out;
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i)
    if (t.rows[i].event && t.rows[i + 1].event && t.rows[i].t == t.rows[i + 1].t) {
      out.emplace_back(t.rows[i], t.rows[i + 1]);
      ++i;
    }
  return out;
}

}  // namespace

TEST_CASE("constrained accelerations agree across formulations") {
  const ChainModel model = irregular_chain(5);
  std::mt19937 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto [locked, unused] = random_locks(rng, 5, trial % 4, 0);
    const PhaseConstraints phase(5, locked, VectorXd::Zero(static_cast<int>(locked.size())));
    const Partition part = locking_partition(5, locked);
    const State s = random_state(rng, 5, locked);

    const ConstrainedAccel a = accel_index1(model, ForceLaw{}, phase, s);
    const VectorXd b = accel_projected(model, ForceLaw{}, phase, s);
    const VectorXd c = lift_voronets(phase, part, s, accel_voronets(model, ForceLaw{}, phase, part, s));
    const double scale = 1.0 + a.qdd.cwiseAbs().maxCoeff();
    CHECK((a.qdd - b).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK((a.qdd - c).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    for (int j : locked) {
      CHECK(a.qdd(j) == 0.0);
      CHECK(c(j) == 0.0);
    }

    // Index-1 residuals.
    const MatrixXd m = mass_matrix(model, s.q);
    const MatrixXd jac = phase.jacobian(s.q);
    const VectorXd rhs = -coriolis_vector(model, s.q, s.qd) - gravity_vector(model, s.q);
    CHECK((m * a.qdd + jac.transpose() * a.lambda - rhs).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("unconstrained phase matches free dynamics") {
  const ChainModel model = irregular_chain(4);
  std::mt19937 rng(3);
  const State s = random_state(rng, 4, {});
  const PhaseConstraints none(4, {}, VectorXd(0));
  const VectorXd free = unconstrained_accel(model, ForceLaw{}, s);
  const ConstrainedAccel a = accel_index1(model, ForceLaw{}, none, s);
  CHECK(a.lambda.size() == 0);
  CHECK((a.qdd - free).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + free.cwiseAbs().maxCoeff()));
  CHECK((accel_projected(model, ForceLaw{}, none, s) - free).cwiseAbs().maxCoeff() <= 1e-10);
  const Partition all = locking_partition(4, {});
  CHECK((accel_voronets(model, ForceLaw{}, none, all, s) - free).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fdot_sdot(none, all, s) == VectorXd::Zero(4));
}

TEST_CASE("reduced mass of the locked 3R is the outer submatrix") {
  const ChainModel model = three_link();
  const PhaseConstraints phase(3, {1}, VectorXd::Constant(1, 0.5));
  const Partition part = locking_partition(3, {1});
  CHECK(part.independent == std::vector<int>{0, 2});
  const MatrixXd f = orthogonal_complement(phase.jacobian(VectorXd::Zero(3)), part);
  const MatrixXd m = mass_matrix(model, VectorXd::Constant(3, 0.5));
  const MatrixXd mbar = f.transpose() * m * f;
  CHECK(mbar(0, 0) == m(0, 0));
  CHECK(mbar(1, 1) == m(2, 2));
  CHECK(mbar(0, 1) == m(0, 2));
}

TEST_CASE("rk4 step") {
  SUBCASE("zero acceleration is exact linear motion") {
    State s{0.0, Eigen::Vector2d(0.25, -1.0), Eigen::Vector2d(2.0, 0.5)};
    const State next = rk4_step([](const State& x) { return VectorXd::Zero(x.q.size()); }, s, 0.125);
    CHECK(next.q == Eigen::Vector2d(0.5, -0.9375));
    CHECK(next.qd == s.qd);
    CHECK(next.t == 0.125);
  }
  SUBCASE("harmonic oscillator over one period") {
    const int steps = 6283;
    const double dt = 2.0 * kPi / steps;
    State s{0.0, VectorXd::Constant(1, 1.0), VectorXd::Zero(1)};
    for (int k = 0; k < steps; ++k) s = rk4_step([](const State& x) { return VectorXd(-x.q); }, s, dt);
    CHECK(std::abs(s.q(0) - 1.0) <= 1e-10);
    CHECK(std::abs(s.qd(0)) <= 1e-10);
  }
  SUBCASE("fourth-order convergence") {
    auto error = [](int steps) {
      const double dt = 1.0 / steps;
      State s{0.0, VectorXd::Constant(1, 1.0), VectorXd::Zero(1)};
      for (int k = 0; k < steps; ++k) s = rk4_step([](const State& x) { return VectorXd(-x.q); }, s, dt);
      return std::hypot(s.q(0) - std::cos(1.0), s.qd(0) + std::sin(1.0));
    };
    for (int steps : {10, 20, 40}) {
      const double ratio = error(steps) / error(2 * steps);
      CHECK(ratio == doctest::Approx(16.0).epsilon(0.2));
    }
  }
  SUBCASE("non-finite acceleration") {
    State s{0.0, VectorXd::Constant(1, 1.0), VectorXd::Zero(1)};
    CHECK_THROWS_AS(rk4_step([](const State&) { return VectorXd::Constant(1, NAN); }, s, 0.1), NumericalError);
  }
}

TEST_CASE("golden 3R run") {
  const RunResult& r = golden();
  REQUIRE(r.events.size() == 2);
  REQUIRE(r.phases.size() == 3);

  SUBCASE("smooth phases conserve energy") {
    for (const auto& ph : r.phases) CHECK(ph.energy_drift <= 1e-6);
  }
  SUBCASE("lock values come from the trajectory at the event") {
    const auto pairs = event_pairs(r.trajectory);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first.t == 0.8);
    CHECK(pairs[1].first.t == 1.3);
    CHECK(*r.schedule.events()[0].lock_value == pairs[0].first.q(1));
    CHECK(*r.schedule.events()[1].lock_value == pairs[1].first.q(2));
  }
  SUBCASE("locked coordinates are held exactly") {
    const double v2 = *r.schedule.events()[0].lock_value, v3 = *r.schedule.events()[1].lock_value;
    for (std::size_t i = 0; i < r.trajectory.rows.size(); ++i) {
      const auto& row = r.trajectory.rows[i];
      const bool after1 = row.t > 0.8 || (row.t == 0.8 && i > 0 && r.trajectory.rows[i - 1].t == 0.8);
      const bool after2 = row.t > 1.3 || (row.t == 1.3 && i > 0 && r.trajectory.rows[i - 1].t == 1.3);
      if (after1) {
        CHECK(row.q(1) == v2);
        CHECK(row.qd(1) == 0.0);
      }
      if (after2) {
        CHECK(row.q(2) == v3);
        CHECK(row.qd(2) == 0.0);
      }
    }
    for (const auto& ph : r.phases) CHECK(ph.lock_deviation == 0.0);
  }
  SUBCASE("event rows keep the free momenta") {
    for (const auto& [pre, post] : event_pairs(r.trajectory)) {
      REQUIRE(pre.momentum.size() == post.momentum.size());
      CHECK((pre.momentum - post.momentum).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(post.total <= pre.total);
    }
    for (const auto& ev : r.events) {
      CHECK(ev.momentum_jump <= 1e-8);
      CHECK(ev.transition.kinetic_drop >= 0.0);
    }
  }
  SUBCASE("times are on the grid and non-decreasing") {
    for (std::size_t i = 1; i < r.trajectory.rows.size(); ++i) CHECK(r.trajectory.rows[i].t >= r.trajectory.rows[i - 1].t);
    CHECK(r.trajectory.rows.back().t == 2.0);
    CHECK(r.trajectory.rows.front().t == 0.0);
  }
  SUBCASE("projected equations hold along the locked phase") {
    const ChainModel model = three_link();
    const PhaseConstraints phase(3, {1}, VectorXd::Constant(1, *r.schedule.events()[0].lock_value));
    for (const auto& row : r.trajectory.rows) {
      if (row.t <= 0.8 || row.t >= 1.3) continue;
      const State s{row.t, row.q, row.qd};
      const VectorXd qdd = accel_projected(model, ForceLaw{}, phase, s);
      const MatrixXd m = mass_matrix(model, s.q);
      const MatrixXd n = nullspace_projector(phase.jacobian(s.q), m);
      const VectorXd forces = coriolis_vector(model, s.q, s.qd) + gravity_vector(model, s.q);
      CHECK((n.transpose() * (m * qdd + forces)).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + forces.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("second 3R event: solvers agree on the recorded inputs") {
  const RunResult& r = golden();
  const auto pairs = event_pairs(r.trajectory);
  REQUIRE(pairs.size() == 2);
  const auto& pre = pairs[1].first;
  TransitionInput in;
  in.mass = mass_matrix(three_link(), pre.q);
  in.j1 = selectors(3, {1});
  in.j2 = selectors(3, {2});
  in.qd_minus = pre.qd;
  const auto g = solve_general(in);
  CHECK((solve_partitioned(in).dqd - g.dqd).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((solve_redundant_projected(in).dqd - g.dqd).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((solve_minimal_voronets(in).dqd - g.dqd).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((g.qd_plus - pairs[1].second.qd).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("consistent methods and formulations give the same trajectory") {
  const Scenario sc = locking_scenario();
  const RunResult red = run(sc, TransitionMethod::redundant, Formulation::voronets_minimal);
  CHECK(trajectory_deviation(golden().trajectory, red.trajectory) <= 1e-8);
  for (Formulation f : {Formulation::index1_dae, Formulation::projected_ode}) {
    CAPTURE(to_string(f));
    const RunResult other = run(sc, TransitionMethod::minimal, f);
    CHECK(trajectory_deviation(golden().trajectory, other.trajectory) <= 1e-7);
  }
}

TEST_CASE("naive zeroing breaks momentum continuity") {
  const RunResult naive = run(locking_scenario(), TransitionMethod::naive, Formulation::voronets_minimal);
  REQUIRE(naive.events.size() == 2);
  CHECK(naive.events[0].momentum_jump > 1e-3);
  const VectorXd diff = naive.trajectory.rows.back().q - golden().trajectory.rows.back().q;
  CHECK(diff.cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("run without events is a conservative pendulum") {
  Scenario sc = locking_scenario();
  sc.events.clear();
  const RunResult r = run(sc, TransitionMethod::minimal, Formulation::index1_dae);
  REQUIRE(r.phases.size() == 1);
  CHECK(r.phases[0].energy_drift <= 1e-6);
  CHECK(r.events.empty());
}

TEST_CASE("runs are deterministic") {
  Scenario sc = locking_scenario();
  sc.t_end = 1.0;
  sc.events.resize(1);
  const RunResult a = run(sc, TransitionMethod::minimal, Formulation::index1_dae);
  const RunResult b = run(sc, TransitionMethod::minimal, Formulation::index1_dae);
  REQUIRE(a.trajectory.rows.size() == b.trajectory.rows.size());
  for (std::size_t i = 0; i < a.trajectory.rows.size(); ++i) {
    CHECK(a.trajectory.rows[i].q == b.trajectory.rows[i].q);
    CHECK(a.trajectory.rows[i].qd == b.trajectory.rows[i].qd);
  }
}

TEST_CASE("off-grid events are rejected") {
  const Scenario sc = locking_scenario();
  ConstraintSchedule sched(3, {{0.80005, 2, std::nullopt}});
  CHECK_THROWS_AS(run_scenario(sc.model(), ForceLaw{}, sched, sc.initial_state(), sc.run_options()), ValidationError);
  CHECK_NOTHROW(check_on_grid(0.8, 0.0, 1e-4, "event"));
  CHECK_THROWS_AS(check_on_grid(0.85001, 0.0, 1e-4, "event"), ValidationError);
}

TEST_CASE("diagnostics row") {
  const ChainModel model = three_link();
  const State s{0.0, Eigen::Vector3d(0.3, -0.2, 0.5), Eigen::Vector3d(1.0, 0.0, -0.5)};
  SUBCASE("no constraints") {
    const auto row = diagnostics_row(model, PhaseConstraints(3, {}, VectorXd(0)), locking_partition(3, {}), s);
    CHECK((row.momentum - mass_matrix(model, s.q) * s.qd).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(row.drift == 0.0);
    CHECK(row.total == doctest::Approx(row.kinetic + row.potential));
  }
  SUBCASE("one lock") {
    const auto row = diagnostics_row(model, PhaseConstraints(3, {1}, VectorXd::Constant(1, -0.2)),
                                     locking_partition(3, {1}), s);
    CHECK(row.momentum.size() == 2);
    CHECK(row.free_joints == std::vector<int>{0, 2});
    CHECK(row.drift == 0.0);
  }
  SUBCASE("drift picks up position and rate violations") {
    State off = s;
    off.qd(1) = 0.25;
    const auto row = diagnostics_row(model, PhaseConstraints(3, {1}, VectorXd::Constant(1, -0.1)),
                                     locking_partition(3, {1}), off);
    CHECK(row.drift == doctest::Approx(0.25));
  }
}
