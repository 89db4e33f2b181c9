#include "rmap/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rmap/error.hpp"

namespace rmap {

namespace {
constexpr double kSingularMetricCond = 1e12;
}

std::vector<Eigen::MatrixXd> christoffel(const ChartManifold& chart, const Eigen::VectorXd& p) {
  const int n = chart.dim();
  ChartManifold::MetricJet mj = chart.metric_jet(p);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mj.g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > kSingularMetricCond)
    fail(ErrorKind::SingularMetric,
         "metric on '" + chart.name() + "' is numerically singular (condition number " +
             std::to_string(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) +
             ")");
  Eigen::MatrixXd ginv = svd.solve(Eigen::MatrixXd::Identity(n, n));

  std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += ginv(k, l) * (mj.dg[static_cast<std::size_t>(i)](j, l) +
                             mj.dg[static_cast<std::size_t>(j)](i, l) -
                             mj.dg[static_cast<std::size_t>(l)](i, j));
        }
        s *= 0.5;
        gamma[static_cast<std::size_t>(k)](i, j) = s;
        gamma[static_cast<std::size_t>(k)](j, i) = s;
      }
    }
  }
  return gamma;
}

Eigen::VectorXd christoffel_apply(const std::vector<Eigen::MatrixXd>& gamma,
                                  const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(static_cast<int>(gamma.size()));
  for (std::size_t k = 0; k < gamma.size(); ++k)
    out[static_cast<int>(k)] = w.dot(gamma[k] * v);
  return out;
}

Eigen::VectorXd covariant_derivative_vector(const ChartManifold& chart, const VectorFieldSpec& field,
                                            const Eigen::VectorXd& w, const Eigen::VectorXd& p) {
  VectorFieldSpec::Jet fj = field.jet(p);
  std::vector<Eigen::MatrixXd> gamma = christoffel(chart, p);
  return fj.jacobian * w + christoffel_apply(gamma, w, fj.value);
}

Eigen::VectorXd covariant_derivative_tensor11(const ChartManifold& chart,
                                              const std::vector<expr::ScalarField>& tensor,
                                              const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& p) {
  const int n = chart.dim();
  if (static_cast<int>(tensor.size()) != n * n)
    fail(ErrorKind::DimensionMismatch, "(1,1)-tensor needs dim^2 entries");

  Eigen::MatrixXd t(n, n);
  std::vector<Eigen::MatrixXd> dt(static_cast<std::size_t>(n));  // dt[i] = d T / d x^i
  for (std::size_t i = 0; i < dt.size(); ++i) dt[i].resize(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      expr::Jet1 j = tensor[static_cast<std::size_t>(r * n + c)].jet1(p);
      t(r, c) = j.value;
      for (int i = 0; i < n; ++i) dt[static_cast<std::size_t>(i)](r, c) = j.grad[i];
    }
  }
  std::vector<Eigen::MatrixXd> gamma = christoffel(chart, p);

  Eigen::VectorXd directional = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) directional += w[i] * (dt[static_cast<std::size_t>(i)] * z);
  Eigen::VectorXd correction_out = christoffel_apply(gamma, w, t * z);
  Eigen::VectorXd correction_in = t * christoffel_apply(gamma, w, z);
  return directional + correction_out - correction_in;
}

Eigen::VectorXd lie_bracket(const VectorFieldSpec& x, const VectorFieldSpec& y,
                            const Eigen::VectorXd& p) {
  VectorFieldSpec::Jet xj = x.jet(p);
  VectorFieldSpec::Jet yj = y.jet(p);
  return yj.jacobian * xj.value - xj.jacobian * yj.value;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& g,
                               double tol) {
  const int n = static_cast<int>(vectors.rows());
  const int m = static_cast<int>(vectors.cols());
  Eigen::MatrixXd out(n, m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd v = vectors.col(j);
    double input_norm = std::sqrt(std::max(0.0, v.dot(g * v)));
    for (int k = 0; k < j; ++k) {
      v -= out.col(k).dot(g * v) * out.col(k);
    }
    double residual = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (residual <= tol * std::max(1.0, input_norm))
      fail(ErrorKind::RankDeficient,
           "orthonormalize: vector " + std::to_string(j) +
               " is in the span of its predecessors (residual " + std::to_string(residual) + ")");
    out.col(j) = v / residual;
  }
  return out;
}

Eigen::MatrixXd metric_sqrt(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  return es.operatorSqrt();
}

Eigen::MatrixXd metric_inv_sqrt(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  return es.operatorInverseSqrt();
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& g) {
  if (a.cols() != b.cols())
    fail(ErrorKind::DimensionMismatch, "principal angles need spans of equal dimension");
  if (a.cols() == 0) return 0.0;
  Eigen::MatrixXd qa = orthonormalize(a, g);
  Eigen::MatrixXd qb = orthonormalize(b, g);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * g * qb);
  double c = svd.singularValues().minCoeff();
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

}  // namespace rmap
