#include "vtm/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "vtm/errors.hpp"
#include "vtm/trajectory_csv.hpp"

namespace vtm {

namespace {

struct TimedRun {
  RunResult result;
  double wall_time_s;
};

TimedRun timed_run(const Scenario& sc, TransitionMethod method) {
  RunOptions opt = sc.run_options();
  opt.method = method;
  const auto start = std::chrono::steady_clock::now();
  RunResult r = run_scenario(sc.model(), ForceLaw{}, sc.schedule(), sc.initial_state(), opt);
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  return {std::move(r), wall.count()};
}

void write_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file " + path.string());
  write_trajectory_csv(out, traj);
  if (!out) throw NumericalError("failed writing " + path.string());
}

std::string join(const VectorXd& v) {
  std::ostringstream ss;
  ss << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) ss << (i ? ", " : "") << v(i);
  ss << ')';
  return ss.str();
}

}  // namespace

RunSummary summarize(const RunResult& result, TransitionMethod method, Formulation formulation,
                     double wall_time_s) {
  RunSummary s;
  s.method = method;
  s.formulation = formulation;
  s.wall_time_s = wall_time_s;
  s.max_constraint_drift = result.max_constraint_drift;
  for (const auto& e : result.events) {
    s.events.push_back({e.time, e.joint, e.transition.kinetic_drop, e.transition.impulse, e.momentum_jump});
    if (e.momentum_jump > kMomentumTolerance) s.momentum_discontinuity = true;
  }
  for (const auto& p : result.phases) s.phase_energy_drift.push_back(p.energy_drift);
  return s;
}

void print_summary(std::ostream& out, const RunSummary& s) {
  const auto flags = out.flags();
  out << "method: " << to_string(s.method) << "  formulation: " << to_string(s.formulation) << '\n';
  out << "events: " << s.events.size() << '\n';
  out << std::setprecision(6);
  for (const auto& e : s.events) {
    out << "  t = " << e.time << " s  joint " << e.joint << "  kinetic_drop = " << e.kinetic_drop
        << " J  impulse = " << join(e.impulse) << "  momentum_jump = " << std::scientific << e.momentum_jump
        << std::defaultfloat << '\n';
  }
  for (std::size_t i = 0; i < s.phase_energy_drift.size(); ++i) {
    out << "  phase " << i << " relative energy drift = " << std::scientific << s.phase_energy_drift[i]
        << std::defaultfloat << '\n';
  }
  out << "max constraint drift: " << std::scientific << s.max_constraint_drift << std::defaultfloat << '\n';
  if (s.momentum_discontinuity) {
    out << "WARNING: momentum discontinuity above " << kMomentumTolerance << " at one or more events\n";
  } else {
    out << "momentum continuous across all events (tol " << kMomentumTolerance << ")\n";
  }
  out << "wall time: " << s.wall_time_s << " s\n";
  out.flags(flags);
}

RunSummary cmd_run(const Scenario& sc, const std::filesystem::path& out_path, std::ostream& log) {
  TimedRun run = timed_run(sc, sc.transition);
  write_csv(out_path, run.result.trajectory);
  RunSummary s = summarize(run.result, sc.transition, sc.formulation, run.wall_time_s);
  print_summary(log, s);
  log << "wrote " << out_path.string() << '\n';
  return s;
}

double trajectory_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.dof != b.dof || a.rows.size() != b.rows.size()) return std::numeric_limits<double>::infinity();
  double dev = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].t != b.rows[i].t) return std::numeric_limits<double>::infinity();
    dev = std::max(dev, (a.rows[i].q - b.rows[i].q).cwiseAbs().maxCoeff());
    dev = std::max(dev, (a.rows[i].qd - b.rows[i].qd).cwiseAbs().maxCoeff());
  }
  return dev;
}

CompareReport cmd_compare(const Scenario& sc, const std::vector<TransitionMethod>& methods,
                          const std::filesystem::path& out_dir, std::ostream& log, unsigned max_threads) {
  if (methods.size() < 2) throw ValidationError("compare: at least two methods are required");
  std::filesystem::create_directories(out_dir);

  const std::size_t count = methods.size();
  std::vector<std::optional<TimedRun>> runs(count);
  std::vector<std::exception_ptr> errors(count);
  unsigned workers = max_threads > 0 ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        runs[i] = timed_run(sc, methods[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CompareReport report;
  report.methods = methods;
  for (std::size_t i = 0; i < count; ++i) {
    write_csv(out_dir / (std::string(to_string(methods[i])) + ".csv"), runs[i]->result.trajectory);
    report.runs.push_back(summarize(runs[i]->result, methods[i], sc.formulation, runs[i]->wall_time_s));
  }
  report.ok = true;
  log << "pairwise max deviation of (q, qd):\n";
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      PairDeviation p{methods[i], methods[j],
                      trajectory_deviation(runs[i]->result.trajectory, runs[j]->result.trajectory),
                      is_momentum_consistent(methods[i]) && is_momentum_consistent(methods[j])};
      const bool pass = !p.gated || p.max_deviation <= kCompareTolerance;
      if (!pass) report.ok = false;
      log << "  " << to_string(p.a) << " vs " << to_string(p.b) << ": " << std::scientific
          << p.max_deviation << std::defaultfloat
          << (p.gated ? (pass ? "  ok" : "  FAIL") : "  (not gated)") << '\n';
      report.pairs.push_back(p);
    }
  }
  for (const auto& r : report.runs) {
    if (r.momentum_discontinuity) log << "  " << to_string(r.method) << ": momentum discontinuity at events\n";
  }
  log << (report.ok ? "compare: consistent methods agree within " : "compare: consistent methods DISAGREE beyond ")
      << kCompareTolerance << '\n';
  return report;
}

ValidateReport cmd_validate(const Scenario& sc, std::ostream& log) {
  ValidateReport report;
  const ConstraintSchedule sched = sc.schedule();
  const MatrixXd mass = mass_matrix(sc.model(), sc.q0);
  log << "events: " << sched.events().size() << '\n';
  for (std::size_t i = 0; i < sched.events().size(); ++i) {
    const EventSplit split = sched.split_at_event(i);
    const RegularityReport r = validate_regularity(split.persistent, split.added, mass);
    const auto& e = sched.events()[i];
    log << "  t = " << e.time << " s  lock joint " << e.joint << ": rank J1 " << r.rank_persistent << "/"
        << r.m_persistent << ", rank J2 " << r.rank_added << "/" << r.m_added << ", stacked " << r.rank_stacked
        << "/" << (r.m_persistent + r.m_added) << (r.ok ? "  ok" : "  FAIL") << '\n';
    if (!r.ok) report.failures.push_back("event " + std::to_string(i) + " is not regular");
    report.events.push_back(r);
  }
  report.ok = report.failures.empty();
  log << (report.ok ? "validate: ok\n" : "validate: FAILED\n");
  return report;
}

std::vector<TransitionMethod> parse_method_list(const std::string& csv) {
  std::vector<TransitionMethod> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_transition_method(item));
  }
  return out;
}

}  // namespace vtm
