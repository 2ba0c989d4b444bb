#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace vtm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Geometry and inertia of one link of a planar serial revolute chain.
///
/// `com_offset` is the distance from the inboard joint to the center of mass
/// along the link; `inertia_com` is the moment of inertia about the axis
/// through the COM parallel to the joint axes.
struct LinkParams {
  double length = 1.0;       // m
  double mass = 1.0;         // kg
  double com_offset = 0.5;   // m
  double inertia_com = 1.0;  // kg m^2
};

/// Unconstrained planar serial chain of revolute joints under gravity.
///
/// Joint angles are relative; q_1 is measured from the downward vertical and
/// positive counterclockwise, so q = 0 is the hanging equilibrium. The
/// potential energy is zero there.
class ChainModel {
 public:
  ChainModel(std::vector<LinkParams> links, double gravity);

  int dof() const { return static_cast<int>(links_.size()); }
  const std::vector<LinkParams>& links() const { return links_; }
  double gravity() const { return gravity_; }

 private:
  std::vector<LinkParams> links_;
  double gravity_;
};

struct State {
  double t = 0.0;
  VectorXd q;
  VectorXd qd;
};

/// Generalized forces acting on the chain. `applied` is the control force u,
/// `other` collects the non-potential, non-quadratic forces Q. Both default
/// to zero.
struct ForceLaw {
  std::function<VectorXd(const VectorXd& q, const VectorXd& qd, double t)> applied;
  std::function<VectorXd(const VectorXd& qd, const VectorXd& q, double t)> other;

  VectorXd control(const State& s) const;
  VectorXd inherent(const State& s) const;
};

struct Energies {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

MatrixXd mass_matrix(const ChainModel& model, const VectorXd& q);

/// Partial derivatives dM/dq_k, k = 0..n-1, in closed form.
std::vector<MatrixXd> mass_matrix_gradient(const ChainModel& model, const VectorXd& q);

/// Matrix C(q, qd) with C_ij = sum_k Gamma_ijk qd_k built from the
/// Christoffel symbols of the first kind of M. Mdot - 2C is skew-symmetric.
MatrixXd coriolis_matrix(const ChainModel& model, const VectorXd& q, const VectorXd& qd);

/// C(q, qd) qd.
VectorXd coriolis_vector(const ChainModel& model, const VectorXd& q, const VectorXd& qd);

double potential_energy(const ChainModel& model, const VectorXd& q);

/// Gradient of potential_energy.
VectorXd gravity_vector(const ChainModel& model, const VectorXd& q);

/// a = M^{-1}(u - C qd - P - Q).
VectorXd unconstrained_accel(const ChainModel& model, const ForceLaw& forces, const State& s);

Energies energies(const ChainModel& model, const State& s);

}  // namespace vtm
