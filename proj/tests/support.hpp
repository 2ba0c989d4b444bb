// Shared fixtures, generators and independent oracles for the test suites.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "vtm/chain_model.hpp"
#include "vtm/projection.hpp"
#include "vtm/transition.hpp"

namespace vtm::testing {

inline constexpr double kPi = 3.14159265358979323846;

inline ChainModel three_link() {
  return ChainModel({{1.0, 108.0, 0.5, 9.36}, {1.0, 108.0, 0.5, 9.36}, {1.0, 108.0, 0.5, 9.36}}, 9.81);
}

inline ChainModel irregular_chain(int n) {
  std::vector<LinkParams> links;
  for (int i = 0; i < n; ++i) {
    const double len = 0.4 + 0.15 * i;
    links.push_back({len, 3.0 + 2.0 * i, len * (0.3 + 0.1 * (i % 4)), 0.05 + 0.02 * i});
  }
  return ChainModel(links, 9.81);
}

inline VectorXd random_vector(std::mt19937& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

/// SPD matrix with eigenvalues log-uniform in [lo, hi] and a random basis.
inline MatrixXd random_spd(std::mt19937& rng, int n, double lo = 1e-3, double hi = 1e3) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(a).householderQ();
  std::uniform_real_distribution<double> u(std::log10(lo), std::log10(hi));
  VectorXd lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = std::pow(10.0, u(rng));
  lambda(0) = lo;
  lambda(n - 1) = hi;
  MatrixXd m = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

/// Disjoint random joint subsets of sizes m1 and m2 out of n.
inline std::pair<std::vector<int>, std::vector<int>> random_locks(std::mt19937& rng, int n, int m1, int m2) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  return {std::vector<int>(idx.begin(), idx.begin() + m1),
          std::vector<int>(idx.begin() + m1, idx.begin() + m1 + m2)};
}

inline MatrixXd selectors(int n, const std::vector<int>& rows) {
  MatrixXd j = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) j(static_cast<Eigen::Index>(r), rows[r]) = 1.0;
  return j;
}

// ---------------------------------------------------------------------------
// Point-mass discretization oracle. Each link is replaced by `samples`
// equal point masses spread uniformly on the link axis over a segment
// centered at the COM whose half-length a reproduces the link's inertia
// (m a^2 / 3 = I). Point velocities come from central differences of the
// forward kinematics.

inline Eigen::Vector2d point_position(const ChainModel& model, const VectorXd& q, int link, double r) {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double theta = 0.0;
  for (int k = 0; k <= link; ++k) {
    theta += q(k);
    const Eigen::Vector2d axis(std::sin(theta), -std::cos(theta));
    p += (k < link ? model.links()[k].length : r) * axis;
  }
  return p;
}

inline double point_mass_kinetic_energy(const ChainModel& model, const VectorXd& q, const VectorXd& qd,
                                        int samples = 10000) {
  const double h = 1e-6;
  const VectorXd qp = q + h * qd;
  const VectorXd qm = q - h * qd;
  double t = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    const auto& l = model.links()[i];
    const double a = std::sqrt(3.0 * l.inertia_com / l.mass);
    const double dm = l.mass / samples;
    for (int k = 0; k < samples; ++k) {
      const double r = l.com_offset - a + (k + 0.5) * (2.0 * a / samples);
      const Eigen::Vector2d v = (point_position(model, qp, i, r) - point_position(model, qm, i, r)) / (2.0 * h);
      t += 0.5 * dm * v.squaredNorm();
    }
  }
  return t;
}

/// Potential energy from COM heights, shifted so the hanging pose is zero.
inline double com_height_potential(const ChainModel& model, const VectorXd& q) {
  double v = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    const auto& l = model.links()[i];
    const double y = point_position(model, q, i, l.com_offset).y();
    const double y0 = point_position(model, VectorXd::Zero(model.dof()), i, l.com_offset).y();
    v += l.mass * model.gravity() * (y - y0);
  }
  return v;
}

/// Five-point central difference of a matrix-valued function along a
/// direction.
template <typename F>
MatrixXd directional_derivative(F&& f, const VectorXd& x, const VectorXd& dir, double h = 1e-3) {
  return (-f(x + 2 * h * dir) + 8.0 * f(x + h * dir) - 8.0 * f(x - h * dir) + f(x - 2 * h * dir)) / (12.0 * h);
}


/// Random event: n <= 8, SPD mass with condition 1e6, disjoint selector
/// J1/J2 (J2 nonempty), qd_minus projected onto ker J1.
struct RandomEvent {
  TransitionInput input;
  std::vector<int> persistent;
  std::vector<int> added;
};

inline RandomEvent random_event(std::mt19937& rng, bool with_impulse = false) {
  const int n = std::uniform_int_distribution<int>(2, 8)(rng);
  const int m1 = std::uniform_int_distribution<int>(0, n - 1)(rng);
  const int m2 = std::uniform_int_distribution<int>(1, n - m1)(rng);
  auto [p, a] = random_locks(rng, n, m1, m2);
  RandomEvent ev;
  ev.persistent = p;
  ev.added = a;
  ev.input.mass = random_spd(rng, n);
  ev.input.j1 = selectors(n, p);
  ev.input.j2 = selectors(n, a);
  ev.input.qd_minus = nullspace_projector(ev.input.j1, ev.input.mass) * random_vector(rng, n);
  for (int j : p) ev.input.qd_minus(j) = 0.0;
  if (with_impulse) ev.input.impulse_applied = random_vector(rng, n);
  return ev;
}

}  // namespace vtm::testing
