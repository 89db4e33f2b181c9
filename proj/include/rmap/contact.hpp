#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "rmap/chart.hpp"

namespace rmap {

// Almost-contact metric structure (psi, xi, eta, g) on a chart.  psi is a
// (1,1)-tensor entrywise ((psi V)^i = psi^i_j V^j, row-major), xi a vector
// field, eta a covector field.
struct ContactStructure {
  const ChartManifold* chart = nullptr;
  std::vector<expr::ScalarField> psi;
  VectorFieldSpec xi;
  std::vector<expr::ScalarField> eta;
  // Optional declared (alpha, beta) expressions on the chart.
  std::optional<std::pair<expr::ScalarField, expr::ScalarField>> declared_type;

  static ContactStructure parse(const ChartManifold& chart,
                                const std::vector<std::string>& psi_entries,
                                const std::vector<std::string>& xi_components,
                                const std::vector<std::string>& eta_components);

  Eigen::MatrixXd psi_at(const Eigen::VectorXd& p) const;
  Eigen::VectorXd eta_at(const Eigen::VectorXd& p) const;  // component vector eta_j
  double eta_of(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const;
};

// Worst residual of each structure axiom over a point set:
//   psi^2 = -I + eta (x) xi,  psi xi = 0,  eta o psi = 0,  eta(xi) = 1,
//   g(psi W, psi Z) = g(W, Z) - eta(W) eta(Z),  eta(W) = g(W, xi).
struct AxiomResiduals {
  double psi_squared = 0.0;
  double psi_xi = 0.0;
  double eta_psi = 0.0;
  double eta_xi = 0.0;
  double compatibility = 0.0;
  double eta_metric = 0.0;
  double tol = 0.0;
  bool pass = false;

  double max_residual() const;
};

// Throws DimensionMismatch on even-dimensional charts.  The compatibility
// axiom is checked on a seeded batch of random vector pairs per point.
AxiomResiduals check_almost_contact(const ContactStructure& s,
                                    const std::vector<Eigen::VectorXd>& points, double tol,
                                    std::uint64_t seed = 0, int pairs_per_point = 12);

// Least-squares (alpha, beta) from nabla_W xi = -alpha psi W + beta (W - eta(W) xi)
// over a g-orthonormal direction frame at the point.  Throws DegenerateFit when
// the design matrix condition number exceeds 1e10.
struct TypeEstimate {
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // RMS g-norm misfit over the test directions
  double cond = 0.0;
};

TypeEstimate estimate_type(const ContactStructure& s, const Eigen::VectorXd& p);

// Residuals of the three defining trans-Sasakian equations at a point, for a
// given (alpha, beta), RMS over a seeded batch of random (W, Z) pairs:
//   psi_equation:  (nabla_W psi) Z = alpha (g(W,Z) xi - eta(Z) W)
//                                  + beta (g(psi W, Z) xi - eta(Z) psi W)
//   eta (two readings, reported separately):
//     scalar:  (nabla_W eta)(Z) = -alpha g(psi W, Z) + beta g(psi W, psi Z)
//     printed: the same equation with each scalar promoted along xi
//   xi_equation:   nabla_W xi = -alpha psi W + beta (W - eta(W) xi)
struct TransSasakianResiduals {
  double psi_equation = 0.0;
  double eta_printed = 0.0;
  double eta_scalar = 0.0;
  double xi_equation = 0.0;

  double max_residual() const;
};

TransSasakianResiduals trans_sasakian_residual(const ContactStructure& s, const Eigen::VectorXd& p,
                                               double alpha, double beta, std::uint64_t seed = 0,
                                               int pairs = 20);

}  // namespace rmap
