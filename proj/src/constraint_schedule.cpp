#include "vtm/constraint_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vtm/errors.hpp"
#include "vtm/projection.hpp"

namespace vtm {

MatrixXd selector_rows(int n, const std::vector<int>& joints) {
  MatrixXd j = MatrixXd::Zero(static_cast<Eigen::Index>(joints.size()), n);
  for (std::size_t r = 0; r < joints.size(); ++r) {
    if (joints[r] < 0 || joints[r] >= n) {
      throw ValidationError("selector row: joint index " + std::to_string(joints[r]) +
                            " out of range");
    }
    j(static_cast<Eigen::Index>(r), joints[r]) = 1.0;
  }
  return j;
}

PhaseConstraints::PhaseConstraints(int n, std::vector<int> locked, VectorXd values)
    : n_(n), locked_(std::move(locked)), values_(std::move(values)) {
  detail::require_size(values_.size(), static_cast<long>(locked_.size()), "PhaseConstraints values");
  std::vector<int> sorted = locked_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("PhaseConstraints: a joint is locked twice");
  }
  selector_ = selector_rows(n_, locked_);
}

VectorXd PhaseConstraints::residual(const VectorXd& q) const {
  detail::require_size(q.size(), n_, "PhaseConstraints::residual q");
  VectorXd h(count());
  for (int k = 0; k < count(); ++k) h(k) = q(locked_[k]) - values_(k);
  return h;
}

MatrixXd PhaseConstraints::jacobian(const VectorXd& q) const {
  detail::require_size(q.size(), n_, "PhaseConstraints::jacobian q");
  return selector_;
}

VectorXd PhaseConstraints::jacobian_rate_product(const VectorXd& q, const VectorXd& qd) const {
  detail::require_size(q.size(), n_, "PhaseConstraints q");
  detail::require_size(qd.size(), n_, "PhaseConstraints qd");
  return VectorXd::Zero(count());
}

std::vector<int> PhaseConstraints::free_joints() const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j) {
    if (!is_locked(j)) out.push_back(j);
  }
  return out;
}

bool PhaseConstraints::is_locked(int joint_index) const {
  return std::find(locked_.begin(), locked_.end(), joint_index) != locked_.end();
}

ConstraintSchedule::ConstraintSchedule(int n, std::vector<LockEvent> events)
    : n_(n), events_(std::move(events)) {
  if (n_ < 1) throw ValidationError("schedule: coordinate count must be >= 1");
  if (static_cast<int>(events_.size()) > n_) {
    throw ValidationError("schedule: more lock events than joints");
  }
  std::vector<int> seen;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    const std::string where = "events[" + std::to_string(i) + "]";
    if (!std::isfinite(e.time)) throw ValidationError(where + ".time_s: not finite");
    if (e.joint < 1 || e.joint > n_) {
      throw ValidationError(where + ".joint: " + std::to_string(e.joint) + " outside 1.." +
                            std::to_string(n_));
    }
    if (i > 0 && !(e.time > events_[i - 1].time)) {
      throw ValidationError(where + ".time_s: event times must be strictly increasing");
    }
    if (std::find(seen.begin(), seen.end(), e.joint) != seen.end()) {
      throw ValidationError(where + ".joint: joint " + std::to_string(e.joint) +
                            " is already locked by an earlier event");
    }
    seen.push_back(e.joint);
  }
}

std::size_t ConstraintSchedule::events_up_to(double t) const {
  std::size_t k = 0;
  while (k < events_.size() && events_[k].time <= t) ++k;
  return k;
}

PhaseConstraints ConstraintSchedule::active_constraints_at(double t) const {
  const std::size_t k = events_up_to(t);
  std::vector<int> locked;
  VectorXd values(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (!events_[i].lock_value) {
      throw ValidationError("schedule: event " + std::to_string(i) + " at t = " +
                            std::to_string(events_[i].time) + " has not been captured");
    }
    locked.push_back(events_[i].index());
    values(static_cast<Eigen::Index>(i)) = *events_[i].lock_value;
  }
  return PhaseConstraints(n_, std::move(locked), std::move(values));
}

void ConstraintSchedule::capture(std::size_t index, const State& s, double time_tolerance) {
  if (index >= events_.size()) throw ValidationError("schedule: event index out of range");
  detail::require_size(s.q.size(), n_, "capture state q");
  events_[index] = capture_lock(events_[index], s, time_tolerance);
}

std::optional<std::size_t> ConstraintSchedule::find(const LockEvent& event) const {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].time == event.time && events_[i].joint == event.joint) return i;
  }
  return std::nullopt;
}

EventSplit ConstraintSchedule::split_at_event(const LockEvent& event) const {
  const auto idx = find(event);
  if (!idx) {
    throw ValidationError("schedule: no event locking joint " + std::to_string(event.joint) +
                          " at t = " + std::to_string(event.time));
  }
  return split_at_event(*idx);
}

EventSplit ConstraintSchedule::split_at_event(std::size_t index) const {
  if (index >= events_.size()) throw ValidationError("schedule: event index out of range");
  std::vector<int> before;
  for (std::size_t i = 0; i < index; ++i) before.push_back(events_[i].index());
  return {selector_rows(n_, before), selector_rows(n_, {events_[index].index()})};
}

LockEvent capture_lock(const LockEvent& event, const State& s, double time_tolerance) {
  if (event.lock_value) {
    throw ValidationError("capture_lock: event at t = " + std::to_string(event.time) +
                          " already captured");
  }
  if (std::abs(s.t - event.time) > time_tolerance) {
    throw ValidationError("capture_lock: state time " + std::to_string(s.t) +
                          " does not match event time " + std::to_string(event.time));
  }
  if (event.index() < 0 || event.index() >= s.q.size()) {
    throw ValidationError("capture_lock: joint " + std::to_string(event.joint) + " out of range");
  }
  LockEvent out = event;
  out.lock_value = s.q(event.index());
  return out;
}

RegularityReport validate_regularity(const MatrixXd& j1, const MatrixXd& j2,
                                     const MatrixXd& mass) {
  const Eigen::Index n = mass.rows();
  detail::require_size(mass.cols(), n, "validate_regularity mass cols");
  if (j1.rows() > 0) detail::require_size(j1.cols(), n, "validate_regularity J1 cols");
  if (j2.rows() > 0) detail::require_size(j2.cols(), n, "validate_regularity J2 cols");

  MatrixXd stacked(j1.rows() + j2.rows(), n);
  if (j1.rows() > 0) stacked.topRows(j1.rows()) = j1;
  if (j2.rows() > 0) stacked.bottomRows(j2.rows()) = j2;

  RegularityReport r;
  r.m_persistent = static_cast<int>(j1.rows());
  r.m_added = static_cast<int>(j2.rows());
  r.rank_persistent = j1.rows() > 0 ? numerical_rank(j1) : 0;
  r.rank_added = j2.rows() > 0 ? numerical_rank(j2) : 0;
  r.rank_stacked = stacked.rows() > 0 ? numerical_rank(stacked) : 0;
  r.ok = r.rank_persistent == r.m_persistent && r.rank_added == r.m_added &&
         r.rank_stacked == r.m_persistent + r.m_added;
  return r;
}

}  // namespace vtm
