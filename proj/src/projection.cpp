#include "vtm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "extended.hpp"
#include "vtm/errors.hpp"

namespace vtm {

int numerical_rank(const MatrixXd& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const VectorXd& sv = svd.singularValues();
  const double tol =
      sv(0) * static_cast<double>(a.cols()) * std::numeric_limits<double>::epsilon() * 1e3;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return rank;
}

Partition locking_partition(int n, const std::vector<int>& locked) {
  Partition p;
  p.dependent = locked;
  for (int j = 0; j < n; ++j) {
    if (std::find(locked.begin(), locked.end(), j) == locked.end()) p.independent.push_back(j);
  }
  if (p.dof() != n) throw ValidationError("locking_partition: repeated or out-of-range joint");
  return p;
}

Partition select_partition(const MatrixXd& j) {
  const Eigen::Index m = j.rows();
  const Eigen::Index n = j.cols();
  if (m > n) throw RankError("select_partition: more constraints than coordinates");
  MatrixXd a = j;
  const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double tol = scale * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * 1e3;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Partition p;
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::Index best = -1;
    double best_abs = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!used[c] && std::abs(a(r, c)) > best_abs) {
        best = c;
        best_abs = std::abs(a(r, c));
      }
    }
    if (best < 0 || best_abs <= tol) {
      throw RankError("select_partition: constraint Jacobian is rank deficient at row " +
                      std::to_string(r));
    }
    used[best] = true;
    p.dependent.push_back(static_cast<int>(best));
    for (Eigen::Index below = r + 1; below < m; ++below) {
      a.row(below) -= (a(below, best) / a(r, best)) * a.row(r);
    }
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    if (!used[c]) p.independent.push_back(static_cast<int>(c));
  }
  return p;
}

namespace detail {

LMatrix weighted_pseudoinverse_ext(const LMatrix& j, const LMatrix& mass, const char* who) {
  const Eigen::LLT<LMatrix> mass_llt(mass);
  if (mass_llt.info() != Eigen::Success) {
    throw RankError(std::string(who) + ": mass matrix is not positive definite");
  }
  const LMatrix minv_jt = mass_llt.solve(j.transpose());
  const LMatrix inner = j * minv_jt;
  const Eigen::LLT<LMatrix> inner_llt(inner);
  if (inner_llt.info() != Eigen::Success) {
    throw RankError(std::string(who) + ": J M^-1 J^T is singular");
  }
  return minv_jt * inner_llt.solve(LMatrix::Identity(j.rows(), j.rows()));
}

LMatrix nullspace_projector_ext(const LMatrix& j, const LMatrix& mass, const char* who) {
  const Eigen::Index n = mass.rows();
  if (j.rows() == 0) return LMatrix::Identity(n, n);
  // N = F (F^T M F)^{-1} F^T M with F a basis of ker J. Same projector as
  // I - J_M^+ J, but M^{-1} never appears, and for selector rows the
  // constrained rows of N come out exactly zero.
  const Partition part = select_partition(j.cast<double>());
  const Eigen::Index m = j.rows();
  LMatrix jp(m, m), js(m, n - m);
  for (Eigen::Index k = 0; k < m; ++k) jp.col(k) = j.col(part.dependent[k]);
  for (Eigen::Index k = 0; k < n - m; ++k) js.col(k) = j.col(part.independent[k]);
  const Eigen::FullPivLU<LMatrix> lu(jp);
  if (!lu.isInvertible()) throw RankError(std::string(who) + ": constraint Jacobian is rank deficient");
  const LMatrix dep = -lu.solve(js);
  LMatrix f = LMatrix::Zero(n, n - m);
  for (Eigen::Index k = 0; k < n - m; ++k) f(part.independent[k], k) = 1.0L;
  for (Eigen::Index k = 0; k < m; ++k) f.row(part.dependent[k]) = dep.row(k);
  if (n == m) return LMatrix::Zero(n, n);
  const LMatrix ftm = f.transpose() * mass;
  const Eigen::LLT<LMatrix> reduced(ftm * f);
  if (reduced.info() != Eigen::Success) {
    throw RankError(std::string(who) + ": mass matrix is not positive definite on ker J");
  }
  return f * reduced.solve(ftm);
}

}  // namespace detail

namespace {

void check_projection_input(const MatrixXd& j, const MatrixXd& mass, const char* who) {
  detail::require_size(mass.cols(), mass.rows(), who);
  if (j.rows() == 0) return;
  detail::require_size(j.cols(), mass.rows(), who);
  if (numerical_rank(j) < j.rows()) {
    throw RankError(std::string(who) + ": J does not have full row rank");
  }
}

}  // namespace

MatrixXd weighted_pseudoinverse(const MatrixXd& j, const MatrixXd& mass) {
  check_projection_input(j, mass, "weighted_pseudoinverse");
  if (j.rows() == 0) return MatrixXd::Zero(mass.rows(), 0);
  return detail::weighted_pseudoinverse_ext(detail::widen(j), detail::widen(mass), "weighted_pseudoinverse")
      .cast<double>();
}

MatrixXd nullspace_projector(const MatrixXd& j, const MatrixXd& mass) {
  check_projection_input(j, mass, "nullspace_projector");
  return detail::nullspace_projector_ext(detail::widen(j), detail::widen(mass), "nullspace_projector")
      .cast<double>();
}

MatrixXd orthogonal_complement(const MatrixXd& j, const Partition& part) {
  const int n = part.dof();
  const int m = static_cast<int>(part.dependent.size());
  if (j.rows() > 0) detail::require_size(j.cols(), n, "orthogonal_complement J cols");
  detail::require_size(j.rows(), m, "orthogonal_complement dependent count");

  std::vector<int> all = part.dependent;
  all.insert(all.end(), part.independent.begin(), part.independent.end());
  std::sort(all.begin(), all.end());
  for (int k = 0; k < n; ++k) {
    if (all[k] != k) throw ValidationError("orthogonal_complement: partition is not a split of 0..n-1");
  }

  MatrixXd f = MatrixXd::Zero(n, n - m);
  for (int k = 0; k < n - m; ++k) f(part.independent[k], k) = 1.0;
  if (m == 0) return f;

  MatrixXd jp(m, m);
  MatrixXd js(m, n - m);
  for (int k = 0; k < m; ++k) jp.col(k) = j.col(part.dependent[k]);
  for (int k = 0; k < n - m; ++k) js.col(k) = j.col(part.independent[k]);
  const Eigen::FullPivLU<MatrixXd> lu(jp);
  if (!lu.isInvertible()) {
    throw RankError("orthogonal_complement: Jacobian block on dependent coordinates is singular");
  }
  const MatrixXd dep_rows = -lu.solve(js);
  for (int k = 0; k < m; ++k) f.row(part.dependent[k]) = dep_rows.row(k);
  return f;
}

ReducedSystem reduced_system(const MatrixXd& f, const MatrixXd& mass, const VectorXd& coriolis,
                             const VectorXd& gravity, const VectorXd& inherent,
                             const VectorXd& control, const VectorXd& fdot_sdot) {
  const Eigen::Index n = mass.rows();
  detail::require_size(mass.cols(), n, "reduced_system mass cols");
  detail::require_size(f.rows(), n, "reduced_system F rows");
  detail::require_size(coriolis.size(), n, "reduced_system coriolis");
  detail::require_size(gravity.size(), n, "reduced_system gravity");
  detail::require_size(inherent.size(), n, "reduced_system inherent");
  detail::require_size(control.size(), n, "reduced_system control");
  detail::require_size(fdot_sdot.size(), n, "reduced_system Fdot sdot");
  ReducedSystem r;
  r.mass = f.transpose() * mass * f;
  r.rhs = f.transpose() * (control - coriolis - gravity - inherent - mass * fdot_sdot);
  return r;
}

}  // namespace vtm
