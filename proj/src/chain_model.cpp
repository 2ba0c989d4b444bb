#include "vtm/chain_model.hpp"

#include <cmath>
#include <string>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

VectorXd absolute_angles(const VectorXd& q) {
  VectorXd theta(q.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    acc += q(i);
    theta(i) = acc;
  }
  return theta;
}

// Lever arm of link j as seen from the COM of link i (zero for j > i).
double lever(const std::vector<LinkParams>& links, int i, int j) {
  if (j < i) return links[j].length;
  if (j == i) return links[i].com_offset;
  return 0.0;
}

// coupling(j, k) = sum_{i >= max(j,k)} m_i a_ij a_ik, the coefficient of
// cos(theta_j - theta_k) in the absolute-angle mass matrix.
MatrixXd coupling(const ChainModel& model) {
  const auto& links = model.links();
  const int n = model.dof();
  MatrixXd c = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int i = std::max(j, k); i < n; ++i) {
        c(j, k) += links[i].mass * lever(links, i, j) * lever(links, i, k);
      }
    }
  }
  return c;
}

// Weight multiplying (1 - cos theta_r) in the potential energy.
VectorXd gravity_weights(const ChainModel& model) {
  const auto& links = model.links();
  const int n = model.dof();
  VectorXd w(n);
  for (int r = 0; r < n; ++r) {
    double outboard = 0.0;
    for (int i = r + 1; i < n; ++i) outboard += links[i].mass;
    w(r) = model.gravity() * (links[r].mass * links[r].com_offset + links[r].length * outboard);
  }
  return w;
}

// S^T A S for the lower-triangular all-ones map S from relative joint rates
// to absolute link rates: entry (l, m) sums A over rows >= l, cols >= m.
MatrixXd to_joint_space(const MatrixXd& a) {
  const Eigen::Index n = a.rows();
  MatrixXd rows = a;
  for (Eigen::Index r = n - 2; r >= 0; --r) rows.row(r) += rows.row(r + 1);
  for (Eigen::Index c = n - 2; c >= 0; --c) rows.col(c) += rows.col(c + 1);
  return rows;
}

}  // namespace

ChainModel::ChainModel(std::vector<LinkParams> links, double gravity)
    : links_(std::move(links)), gravity_(gravity) {
  if (links_.empty()) throw ValidationError("model.links: at least one link is required");
  if (!(gravity_ >= 0.0) || !std::isfinite(gravity_)) {
    throw ValidationError("model.gravity: must be finite and >= 0");
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    const std::string where = "model.links[" + std::to_string(i) + "]";
    if (!(l.length > 0.0)) throw ValidationError(where + ".length: must be > 0");
    if (!(l.mass > 0.0)) throw ValidationError(where + ".mass: must be > 0");
    if (!(l.com_offset >= 0.0 && l.com_offset <= l.length)) {
      throw ValidationError(where + ".com_offset: must lie in [0, length]");
    }
    if (!(l.inertia_com > 0.0)) throw ValidationError(where + ".inertia_com: must be > 0");
  }
}

VectorXd ForceLaw::control(const State& s) const {
  if (!applied) return VectorXd::Zero(s.q.size());
  VectorXd u = applied(s.q, s.qd, s.t);
  detail::require_size(u.size(), s.q.size(), "ForceLaw::applied");
  return u;
}

VectorXd ForceLaw::inherent(const State& s) const {
  if (!other) return VectorXd::Zero(s.q.size());
  VectorXd f = other(s.qd, s.q, s.t);
  detail::require_size(f.size(), s.q.size(), "ForceLaw::other");
  return f;
}

MatrixXd mass_matrix(const ChainModel& model, const VectorXd& q) {
  const int n = model.dof();
  detail::require_size(q.size(), n, "mass_matrix q");
  const VectorXd theta = absolute_angles(q);
  const MatrixXd c = coupling(model);
  MatrixXd m_abs(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) m_abs(j, k) = c(j, k) * std::cos(theta(j) - theta(k));
    m_abs(j, j) += model.links()[j].inertia_com;
  }
  return to_joint_space(m_abs);
}

std::vector<MatrixXd> mass_matrix_gradient(const ChainModel& model, const VectorXd& q) {
  const int n = model.dof();
  detail::require_size(q.size(), n, "mass_matrix_gradient q");
  const VectorXd theta = absolute_angles(q);
  const MatrixXd c = coupling(model);
  std::vector<MatrixXd> grad;
  grad.reserve(n);
  for (int l = 0; l < n; ++l) {
    // Changing q_l rotates every absolute angle theta_r with r >= l.
    MatrixXd d(n, n);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double moved = (j >= l ? 1.0 : 0.0) - (k >= l ? 1.0 : 0.0);
        d(j, k) = -c(j, k) * std::sin(theta(j) - theta(k)) * moved;
      }
    }
    grad.push_back(to_joint_space(d));
  }
  return grad;
}

MatrixXd coriolis_matrix(const ChainModel& model, const VectorXd& q, const VectorXd& qd) {
  const int n = model.dof();
  detail::require_size(qd.size(), n, "coriolis_matrix qd");
  const auto dm = mass_matrix_gradient(model, q);
  MatrixXd c = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double gamma = 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k));
        c(i, j) += gamma * qd(k);
      }
    }
  }
  return c;
}

VectorXd coriolis_vector(const ChainModel& model, const VectorXd& q, const VectorXd& qd) {
  return coriolis_matrix(model, q, qd) * qd;
}

double potential_energy(const ChainModel& model, const VectorXd& q) {
  detail::require_size(q.size(), model.dof(), "potential_energy q");
  const VectorXd theta = absolute_angles(q);
  const VectorXd w = gravity_weights(model);
  double v = 0.0;
  for (int r = 0; r < model.dof(); ++r) v += w(r) * (1.0 - std::cos(theta(r)));
  return v;
}

VectorXd gravity_vector(const ChainModel& model, const VectorXd& q) {
  const int n = model.dof();
  detail::require_size(q.size(), n, "gravity_vector q");
  const VectorXd theta = absolute_angles(q);
  const VectorXd w = gravity_weights(model);
  VectorXd p(n);
  double acc = 0.0;
  for (int r = n - 1; r >= 0; --r) {
    acc += w(r) * std::sin(theta(r));
    p(r) = acc;
  }
  return p;
}

VectorXd unconstrained_accel(const ChainModel& model, const ForceLaw& forces, const State& s) {
  const int n = model.dof();
  detail::require_size(s.q.size(), n, "unconstrained_accel q");
  detail::require_size(s.qd.size(), n, "unconstrained_accel qd");
  const MatrixXd m = mass_matrix(model, s.q);
  const VectorXd rhs = forces.control(s) - coriolis_vector(model, s.q, s.qd) -
                       gravity_vector(model, s.q) - forces.inherent(s);
  return m.llt().solve(rhs);
}

Energies energies(const ChainModel& model, const State& s) {
  detail::require_size(s.qd.size(), model.dof(), "energies qd");
  Energies e;
  e.kinetic = 0.5 * s.qd.dot(mass_matrix(model, s.q) * s.qd);
  e.potential = potential_energy(model, s.q);
  e.total = e.kinetic + e.potential;
  return e;
}

}  // namespace vtm
