#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

namespace vtm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Data at the switching configuration q0. J1 holds the constraints active
/// before and after the event, J2 those activated at it. U is the impulse of
/// the applied forces over the event and defaults to zero.
struct TransitionInput {
  MatrixXd mass;
  MatrixXd j1;
  MatrixXd j2;
  VectorXd qd_minus;
  VectorXd impulse_applied;

  int dof() const { return static_cast<int>(mass.rows()); }
  /// (J1; J2)
  MatrixXd stacked() const;
  /// U, or zero when unset.
  VectorXd applied() const;
};

/// Velocity jump at an event. Momentum balance reads
/// M dqd + J+^T Lambda = U.
struct TransitionResult {
  VectorXd dqd;
  VectorXd qd_plus;
  /// Lambda_2 for the specialised solvers; the full Lambda = (Lambda_1;
  /// Lambda_2) for solve_general.
  VectorXd impulse;
  /// Lambda_1, when the solver produces it (general, partitioned).
  std::optional<VectorXd> persistent_impulse;
  /// T(qd_minus) - T(qd_plus).
  double kinetic_drop = 0.0;
};

enum class TransitionMethod { general, partitioned, redundant, minimal, naive };

std::string_view to_string(TransitionMethod m);
TransitionMethod parse_transition_method(std::string_view s);
bool is_momentum_consistent(TransitionMethod m);

/// [[M, J+^T], [J+, 0]] [dqd; Lambda] = [U; -J+ qd-], J+ = (J1; J2).
TransitionResult solve_general(const TransitionInput& in);

/// Same system with Lambda split into persistent and added parts.
TransitionResult solve_partitioned(const TransitionInput& in);

/// Redundant-coordinate condition with the projector N = N_{J1,M}:
/// [[M, N^T J2^T], [J2 N, 0]] [dqd; Lambda_2] = [N^T U; -J2 qd-].
TransitionResult solve_redundant_projected(const TransitionInput& in);

/// Minimal-coordinate condition on the independent rates s of J1:
/// [[F1^T M F1, F1^T J2^T], [J2 F1, 0]] [ds; Lambda_2] = [F1^T U; -J2 F1 s-],
/// dqd = F1 ds. `f1` must come from orthogonal_complement with independent
/// rows equal to the identity; `independent` lists those rows.
TransitionResult solve_minimal_voronets(const TransitionInput& in, const MatrixXd& f1,
                                        const std::vector<int>& independent);

/// Convenience overload building F1 from the locking partition of J1.
TransitionResult solve_minimal_voronets(const TransitionInput& in);

/// Negative control: zero the newly locked rates and leave the rest
/// untouched. The reported impulse is -(M dqd) on the locked rows.
TransitionResult naive_zeroing(const TransitionInput& in);

TransitionResult solve_transition(TransitionMethod method, const TransitionInput& in);

/// Lambda_2 regardless of which solver produced the result.
VectorXd added_impulse(const TransitionResult& r, int m_added);

}  // namespace vtm
