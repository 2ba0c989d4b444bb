#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vtm/chain_model.hpp"

namespace vtm {

/// Holonomic scleronomic constraints h(q) = 0 with Jacobian J(q).
///
/// The transition solvers only ever see J1, J2 as matrices, so any
/// implementation of this interface can drive them. Joint locking is the
/// only implementation shipped.
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;

  virtual int dof() const = 0;
  virtual int count() const = 0;
  virtual VectorXd residual(const VectorXd& q) const = 0;
  virtual MatrixXd jacobian(const VectorXd& q) const = 0;
  /// Jdot(q, qd) qd.
  virtual VectorXd jacobian_rate_product(const VectorXd& q, const VectorXd& qd) const = 0;
};

/// A scheduled lock of one joint. `joint` is 1-based, as in scenario files.
/// `lock_value` is filled from the running state when the event fires.
struct LockEvent {
  double time = 0.0;
  int joint = 1;
  std::optional<double> lock_value;

  int index() const { return joint - 1; }
};

/// Constraints active during one phase of a locking schedule: one selector
/// row per locked joint, h_k(q) = q_{j_k} - value_k.
class PhaseConstraints final : public ConstraintSet {
 public:
  /// `locked` holds 0-based joint indices in activation order.
  PhaseConstraints(int n, std::vector<int> locked, VectorXd values);

  int dof() const override { return n_; }
  int count() const override { return static_cast<int>(locked_.size()); }
  VectorXd residual(const VectorXd& q) const override;
  MatrixXd jacobian(const VectorXd& q) const override;
  VectorXd jacobian_rate_product(const VectorXd& q, const VectorXd& qd) const override;

  const MatrixXd& selector() const { return selector_; }
  const VectorXd& h_values() const { return values_; }
  const std::vector<int>& locked() const { return locked_; }
  std::vector<int> free_joints() const;
  bool is_locked(int joint_index) const;

 private:
  int n_;
  std::vector<int> locked_;
  VectorXd values_;
  MatrixXd selector_;
};

/// Jacobians of the persistent (J1) and newly activated (J2) constraints at
/// one event.
struct EventSplit {
  MatrixXd persistent;
  MatrixXd added;
};

/// Ordered joint-lock events over an n-joint chain. Construction rejects
/// non-increasing times, out-of-range joints and repeated locks of a joint.
class ConstraintSchedule {
 public:
  ConstraintSchedule(int n, std::vector<LockEvent> events);

  int dof() const { return n_; }
  const std::vector<LockEvent>& events() const { return events_; }

  /// Constraints of the phase containing `t`. Phases are right-continuous:
  /// an event at t_i is active from t_i on. Every event at or before `t`
  /// must have been captured.
  PhaseConstraints active_constraints_at(double t) const;

  /// Number of events with time <= t.
  std::size_t events_up_to(double t) const;

  /// Capture the lock value of event `index` from `s`.
  void capture(std::size_t index, const State& s, double time_tolerance = 1e-9);

  EventSplit split_at_event(const LockEvent& event) const;
  EventSplit split_at_event(std::size_t index) const;

  /// Index of the event with the same time and joint, or nullopt.
  std::optional<std::size_t> find(const LockEvent& event) const;

 private:
  int n_;
  std::vector<LockEvent> events_;
};

/// Copy of `event` with lock_value taken from s.q. Throws ValidationError
/// if s.t does not match the event time or the value is already set.
LockEvent capture_lock(const LockEvent& event, const State& s, double time_tolerance = 1e-9);

/// Selector matrix with one row e_j^T per entry of `joints` (0-based).
MatrixXd selector_rows(int n, const std::vector<int>& joints);

struct RegularityReport {
  int rank_persistent = 0;
  int rank_added = 0;
  int rank_stacked = 0;
  int m_persistent = 0;
  int m_added = 0;
  bool ok = false;
};

/// Full-rank checks on J1, J2 and their stack. `mass` only participates in
/// the dimension check.
RegularityReport validate_regularity(const MatrixXd& j1, const MatrixXd& j2, const MatrixXd& mass);

}  // namespace vtm
