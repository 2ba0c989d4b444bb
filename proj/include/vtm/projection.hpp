#pragma once

#include <Eigen/Dense>
#include <vector>

namespace vtm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Split of the coordinates into m dependent (p) and n - m independent (s)
/// indices, 0-based. The Jacobian block on the dependent columns must be
/// invertible.
struct Partition {
  std::vector<int> dependent;
  std::vector<int> independent;

  int dof() const { return static_cast<int>(dependent.size() + independent.size()); }
};

/// Singular-value rank with tolerance sigma_max * n * eps * 1e3, where n is
/// the column count.
int numerical_rank(const MatrixXd& a);

/// Dependent = `locked` (in the given order), independent = the rest in
/// ascending order.
Partition locking_partition(int n, const std::vector<int>& locked);

/// Greedy column pivoting on J: each row picks the remaining column with the
/// largest pivot magnitude. Throws RankError if J is rank deficient.
Partition select_partition(const MatrixXd& j);

/// M-weighted right pseudoinverse M^{-1} J^T (J M^{-1} J^T)^{-1}.
MatrixXd weighted_pseudoinverse(const MatrixXd& j, const MatrixXd& mass);

/// N = I - J_M^+ J, the M-weighted projector onto ker J.
MatrixXd nullspace_projector(const MatrixXd& j, const MatrixXd& mass);

/// F with J F = 0: rows of the independent coordinates form the identity,
/// rows of the dependent coordinates are -J_p^{-1} J_s.
MatrixXd orthogonal_complement(const MatrixXd& j, const Partition& part);

/// Equations of motion restricted to the span of F: mass * sdd = rhs.
struct ReducedSystem {
  MatrixXd mass;
  VectorXd rhs;
};

/// mass = F^T M F, rhs = F^T (u - C qd - P - Q - M Fdot sd).
ReducedSystem reduced_system(const MatrixXd& f, const MatrixXd& mass, const VectorXd& coriolis,
                             const VectorXd& gravity, const VectorXd& inherent,
                             const VectorXd& control, const VectorXd& fdot_sdot);

}  // namespace vtm
