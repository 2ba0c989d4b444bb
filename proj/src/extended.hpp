// Extended-precision helpers for the small dense kernels. With mass
// matrices conditioned up to 1e6, double rounding alone eats most of the
// 1e-10 budget on projector identities, so factorizations run in long
// double and only the results are rounded back.
#pragma once

#include <Eigen/Dense>

namespace vtm::detail {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline LMatrix widen(const Eigen::MatrixXd& a) { return a.cast<long double>(); }
inline LVector widen(const Eigen::VectorXd& v) { return v.cast<long double>(); }

/// M^{-1} J^T (J M^{-1} J^T)^{-1}; J must have full row rank.
LMatrix weighted_pseudoinverse_ext(const LMatrix& j, const LMatrix& mass, const char* who);

/// I - J_M^+ J.
LMatrix nullspace_projector_ext(const LMatrix& j, const LMatrix& mass, const char* who);

}  // namespace vtm::detail
