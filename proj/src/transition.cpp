#include "vtm/transition.hpp"

#include <cmath>
#include <string>

#include "extended.hpp"
#include "vtm/constraint_schedule.hpp"
#include "vtm/errors.hpp"
#include "vtm/projection.hpp"

namespace vtm {

namespace {

constexpr double kPersistentTolerance = 1e-8;

void check_input(const TransitionInput& in) {
  const Eigen::Index n = in.mass.rows();
  detail::require_size(in.mass.cols(), n, "TransitionInput mass cols");
  detail::require_size(in.qd_minus.size(), n, "TransitionInput qd_minus");
  if (in.j1.rows() > 0) detail::require_size(in.j1.cols(), n, "TransitionInput J1 cols");
  if (in.j2.rows() > 0) detail::require_size(in.j2.cols(), n, "TransitionInput J2 cols");
  if (in.impulse_applied.size() > 0) detail::require_size(in.impulse_applied.size(), n, "TransitionInput U");
  if (!in.qd_minus.allFinite()) throw NumericalError("TransitionInput: qd_minus is not finite");

  if (in.j1.rows() > 0) {
    const double violation = (in.j1 * in.qd_minus).cwiseAbs().maxCoeff();
    if (violation > kPersistentTolerance) {
      throw ValidationError("TransitionInput: persistent constraints violated before the event (|J1 qd-| = " +
                            std::to_string(violation) + ")");
    }
  }
  const RegularityReport reg = validate_regularity(in.j1, in.j2, in.mass);
  if (!reg.ok) {
    throw RankError("transition: constraints are not regular at the switching configuration (ranks " +
                    std::to_string(reg.rank_persistent) + "/" + std::to_string(reg.m_persistent) + ", " +
                    std::to_string(reg.rank_added) + "/" + std::to_string(reg.m_added) + ", stacked " +
                    std::to_string(reg.rank_stacked) + ")");
  }
}

using detail::LMatrix;
using detail::LVector;
using detail::widen;

VectorXd solve_saddle(const LMatrix& k, const LVector& rhs, const char* who) {
  const Eigen::FullPivLU<LMatrix> lu(k);
  if (!lu.isInvertible()) {
    throw RankError(std::string(who) + ": saddle-point matrix is singular (rank " +
                    std::to_string(lu.rank()) + " of " + std::to_string(k.rows()) + ")");
  }
  return lu.solve(rhs).cast<double>();
}

// [[a, b^T], [b, 0]]
LMatrix bordered(const LMatrix& a, const LMatrix& b) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  LMatrix k = LMatrix::Zero(n + m, n + m);
  k.topLeftCorner(n, n) = a;
  if (m > 0) {
    k.topRightCorner(n, m) = b.transpose();
    k.bottomLeftCorner(m, n) = b;
  }
  return k;
}

TransitionResult finish(const TransitionInput& in, VectorXd dqd, VectorXd impulse) {
  TransitionResult r;
  r.qd_plus = in.qd_minus + dqd;
  r.dqd = std::move(dqd);
  r.impulse = std::move(impulse);
  r.kinetic_drop = 0.5 * in.qd_minus.dot(in.mass * in.qd_minus) - 0.5 * r.qd_plus.dot(in.mass * r.qd_plus);
  return r;
}

}  // namespace

MatrixXd TransitionInput::stacked() const {
  const Eigen::Index n = mass.rows();
  MatrixXd j(j1.rows() + j2.rows(), n);
  if (j1.rows() > 0) j.topRows(j1.rows()) = j1;
  if (j2.rows() > 0) j.bottomRows(j2.rows()) = j2;
  return j;
}

VectorXd TransitionInput::applied() const {
  if (impulse_applied.size() == 0) return VectorXd::Zero(mass.rows());
  return impulse_applied;
}

std::string_view to_string(TransitionMethod m) {
  switch (m) {
    case TransitionMethod::general: return "general";
    case TransitionMethod::partitioned: return "partitioned";
    case TransitionMethod::redundant: return "redundant";
    case TransitionMethod::minimal: return "minimal";
    case TransitionMethod::naive: return "naive";
  }
  return "unknown";
}

TransitionMethod parse_transition_method(std::string_view s) {
  if (s == "general") return TransitionMethod::general;
  if (s == "partitioned") return TransitionMethod::partitioned;
  if (s == "redundant") return TransitionMethod::redundant;
  if (s == "minimal") return TransitionMethod::minimal;
  if (s == "naive") return TransitionMethod::naive;
  throw ValidationError("transition: unknown method '" + std::string(s) +
                        "' (expected general|partitioned|redundant|minimal|naive)");
}

bool is_momentum_consistent(TransitionMethod m) { return m != TransitionMethod::naive; }

TransitionResult solve_general(const TransitionInput& in) {
  check_input(in);
  const Eigen::Index n = in.mass.rows();
  const LMatrix jp = widen(in.stacked());
  const Eigen::Index m = jp.rows();
  LVector rhs(n + m);
  rhs.head(n) = widen(in.applied());
  rhs.tail(m) = -jp * widen(in.qd_minus);
  const VectorXd x = solve_saddle(bordered(widen(in.mass), jp), rhs, "solve_general");
  TransitionResult r = finish(in, x.head(n), x.tail(m));
  r.persistent_impulse = x.segment(n, in.j1.rows());
  return r;
}

TransitionResult solve_partitioned(const TransitionInput& in) {
  check_input(in);
  const Eigen::Index n = in.mass.rows();
  const Eigen::Index m1 = in.j1.rows();
  const Eigen::Index m2 = in.j2.rows();
  const LMatrix j1 = widen(in.j1), j2 = widen(in.j2);
  const LVector qd = widen(in.qd_minus);
  LMatrix k = LMatrix::Zero(n + m1 + m2, n + m1 + m2);
  k.topLeftCorner(n, n) = widen(in.mass);
  if (m1 > 0) {
    k.block(0, n, n, m1) = j1.transpose();
    k.block(n, 0, m1, n) = j1;
  }
  if (m2 > 0) {
    k.block(0, n + m1, n, m2) = j2.transpose();
    k.block(n + m1, 0, m2, n) = j2;
  }
  LVector rhs(n + m1 + m2);
  rhs.head(n) = widen(in.applied());
  if (m1 > 0) rhs.segment(n, m1) = -j1 * qd;
  if (m2 > 0) rhs.tail(m2) = -j2 * qd;
  const VectorXd x = solve_saddle(k, rhs, "solve_partitioned");
  TransitionResult r = finish(in, x.head(n), x.tail(m2));
  r.persistent_impulse = x.segment(n, m1);
  return r;
}

TransitionResult solve_redundant_projected(const TransitionInput& in) {
  check_input(in);
  const Eigen::Index n = in.mass.rows();
  const Eigen::Index m2 = in.j2.rows();
  const LMatrix mass = widen(in.mass), j2 = widen(in.j2);
  const LMatrix proj = detail::nullspace_projector_ext(widen(in.j1), mass, "solve_redundant_projected");
  // Eliminate dqd: M dqd = N^T (U - J2^T Lambda_2). The bordered matrix is
  // squared in the conditioning of M, the two separate solves are not.
  const Eigen::LLT<LMatrix> mass_llt(mass);
  if (mass_llt.info() != Eigen::Success) {
    throw RankError("solve_redundant_projected: mass matrix is not positive definite");
  }
  const LMatrix b = proj.transpose() * j2.transpose();
  const LMatrix minv_b = mass_llt.solve(b);
  const LVector minv_u = mass_llt.solve(proj.transpose() * widen(in.applied()));
  const LMatrix schur = b.transpose() * minv_b;
  const Eigen::FullPivLU<LMatrix> lu(schur);
  if (m2 > 0 && !lu.isInvertible()) {
    throw RankError("solve_redundant_projected: J2 N M^-1 N^T J2^T is singular");
  }
  const LVector lambda = m2 > 0 ? LVector(lu.solve(b.transpose() * minv_u + j2 * widen(in.qd_minus))) : LVector(0);
  const LVector dqd = minv_u - minv_b * lambda;
  VectorXd x(n + m2);
  x << dqd.cast<double>(), lambda.cast<double>();
  return finish(in, x.head(n), x.tail(m2));
}

TransitionResult solve_minimal_voronets(const TransitionInput& in, const MatrixXd& f1,
                                        const std::vector<int>& independent) {
  check_input(in);
  const Eigen::Index n = in.mass.rows();
  const Eigen::Index m2 = in.j2.rows();
  const Eigen::Index dof = n - in.j1.rows();
  detail::require_size(f1.rows(), n, "solve_minimal_voronets F1 rows");
  detail::require_size(f1.cols(), dof, "solve_minimal_voronets F1 cols");
  detail::require_size(static_cast<long>(independent.size()), dof, "solve_minimal_voronets independent");

  VectorXd sd_minus(dof);
  for (Eigen::Index k = 0; k < dof; ++k) {
    if (independent[k] < 0 || independent[k] >= n) {
      throw ValidationError("solve_minimal_voronets: independent index out of range");
    }
    sd_minus(k) = in.qd_minus(independent[k]);
  }
  const LMatrix f = widen(f1);
  const LMatrix reduced_mass = f.transpose() * widen(in.mass) * f;
  const LMatrix j2f1 = widen(in.j2) * f;
  LVector rhs(dof + m2);
  rhs.head(dof) = f.transpose() * widen(in.applied());
  rhs.tail(m2) = -j2f1 * widen(sd_minus);
  const VectorXd x = solve_saddle(bordered(reduced_mass, j2f1), rhs, "solve_minimal_voronets");
  return finish(in, f1 * x.head(dof), x.tail(m2));
}

TransitionResult solve_minimal_voronets(const TransitionInput& in) {
  const Partition part = select_partition(in.j1.rows() > 0 ? in.j1 : MatrixXd(0, in.mass.rows()));
  return solve_minimal_voronets(in, orthogonal_complement(in.j1, part), part.independent);
}

TransitionResult naive_zeroing(const TransitionInput& in) {
  check_input(in);
  const Eigen::Index m2 = in.j2.rows();
  std::vector<Eigen::Index> locked;
  for (Eigen::Index r = 0; r < m2; ++r) {
    Eigen::Index col = -1;
    for (Eigen::Index c = 0; c < in.j2.cols(); ++c) {
      if (in.j2(r, c) == 1.0 && col < 0) {
        col = c;
      } else if (in.j2(r, c) != 0.0) {
        col = -2;
        break;
      }
    }
    if (col < 0) throw ValidationError("naive_zeroing: J2 must consist of selector rows");
    locked.push_back(col);
  }
  VectorXd dqd = VectorXd::Zero(in.mass.rows());
  for (const auto c : locked) dqd(c) = -in.qd_minus(c);
  const VectorXd pullback = in.mass * dqd;
  VectorXd impulse(m2);
  for (Eigen::Index r = 0; r < m2; ++r) impulse(r) = -pullback(locked[r]);
  return finish(in, std::move(dqd), std::move(impulse));
}

TransitionResult solve_transition(TransitionMethod method, const TransitionInput& in) {
  switch (method) {
    case TransitionMethod::general: return solve_general(in);
    case TransitionMethod::partitioned: return solve_partitioned(in);
    case TransitionMethod::redundant: return solve_redundant_projected(in);
    case TransitionMethod::minimal: return solve_minimal_voronets(in);
    case TransitionMethod::naive: return naive_zeroing(in);
  }
  throw ValidationError("transition: unknown method");
}

VectorXd added_impulse(const TransitionResult& r, int m_added) {
  if (r.impulse.size() < m_added) throw DimensionError("added_impulse: result carries fewer multipliers");
  return r.impulse.tail(m_added);
}

}  // namespace vtm
