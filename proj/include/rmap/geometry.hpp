#pragma once

#include <Eigen/Core>
#include <vector>

#include "rmap/chart.hpp"

namespace rmap {

// Christoffel symbols of the Levi-Civita connection at a point, stored as
// gamma[k](i,j) = Gamma^k_ij.  Throws SingularMetric when the metric's
// condition number exceeds 1e12.
std::vector<Eigen::MatrixXd> christoffel(const ChartManifold& chart, const Eigen::VectorXd& p);

// Gamma^k_ij w^i v^j contracted into a vector.
Eigen::VectorXd christoffel_apply(const std::vector<Eigen::MatrixXd>& gamma,
                                  const Eigen::VectorXd& w, const Eigen::VectorXd& v);

// nabla_w V at p for a vector field V and a fixed direction w:
//   (nabla_w V)^k = w^i dV^k/dx^i + Gamma^k_ij w^i V^j.
Eigen::VectorXd covariant_derivative_vector(const ChartManifold& chart, const VectorFieldSpec& field,
                                            const Eigen::VectorXd& w, const Eigen::VectorXd& p);

// (nabla_w T) Z for a (1,1)-tensor field T given entrywise, applied to a fixed
// vector Z:
//   (nabla_w T)(Z)^k = w^i dT^k_j/dx^i Z^j + Gamma^k_im w^i T^m_j Z^j
//                      - T^k_m Gamma^m_ij w^i Z^j.
Eigen::VectorXd covariant_derivative_tensor11(const ChartManifold& chart,
                                              const std::vector<expr::ScalarField>& tensor,
                                              const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& p);

// [X, Y]^k = X^i dY^k/dx^i - Y^i dX^k/dx^i.
Eigen::VectorXd lie_bracket(const VectorFieldSpec& x, const VectorFieldSpec& y,
                            const Eigen::VectorXd& p);

// Metric Gram-Schmidt, order-stable.  Throws RankDeficient naming the first
// vector whose residual falls below `tol` (relative to its input norm).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& g,
                               double tol = 1e-10);

// Symmetric positive-definite square root and its inverse.
Eigen::MatrixXd metric_sqrt(const Eigen::MatrixXd& g);
Eigen::MatrixXd metric_inv_sqrt(const Eigen::MatrixXd& g);

// Largest principal angle (radians) between the column spans of A and B,
// measured in the metric g.  Spans must have equal dimension.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& g);

// g-orthogonal projector onto the column span of an orthonormalized frame F:
// P v = F (F^T g v).
inline Eigen::VectorXd project_onto(const Eigen::MatrixXd& frame, const Eigen::MatrixXd& g,
                                    const Eigen::VectorXd& v) {
  if (frame.cols() == 0) return Eigen::VectorXd::Zero(v.size());
  return frame * (frame.transpose() * (g * v));
}

}  // namespace rmap
