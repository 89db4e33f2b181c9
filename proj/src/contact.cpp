#include "rmap/contact.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rmap/error.hpp"
#include "rmap/geometry.hpp"
#include "rmap/rng.hpp"

namespace rmap {

namespace {
constexpr double kDegenerateFitCond = 1e10;

Eigen::VectorXd random_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}
}  // namespace

ContactStructure ContactStructure::parse(const ChartManifold& chart,
                                         const std::vector<std::string>& psi_entries,
                                         const std::vector<std::string>& xi_components,
                                         const std::vector<std::string>& eta_components) {
  const int n = chart.dim();
  if (static_cast<int>(psi_entries.size()) != n * n)
    fail(ErrorKind::DimensionMismatch, "psi needs dim^2 entries");
  if (static_cast<int>(eta_components.size()) != n)
    fail(ErrorKind::DimensionMismatch, "eta needs dim components");
  ContactStructure s;
  s.chart = &chart;
  s.psi.reserve(psi_entries.size());
  for (const auto& t : psi_entries) s.psi.push_back(chart.parse_field(t));
  s.xi = VectorFieldSpec::parse(chart, xi_components);
  s.eta.reserve(eta_components.size());
  for (const auto& t : eta_components) s.eta.push_back(chart.parse_field(t));
  return s;
}

Eigen::MatrixXd ContactStructure::psi_at(const Eigen::VectorXd& p) const {
  const int n = chart->dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = psi[static_cast<std::size_t>(i * n + j)].eval(p);
  return m;
}

Eigen::VectorXd ContactStructure::eta_at(const Eigen::VectorXd& p) const {
  Eigen::VectorXd v(static_cast<int>(eta.size()));
  for (std::size_t j = 0; j < eta.size(); ++j) v[static_cast<int>(j)] = eta[j].eval(p);
  return v;
}

double ContactStructure::eta_of(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const {
  return eta_at(p).dot(v);
}

double AxiomResiduals::max_residual() const {
  return std::max({psi_squared, psi_xi, eta_psi, eta_xi, compatibility, eta_metric});
}

AxiomResiduals check_almost_contact(const ContactStructure& s,
                                    const std::vector<Eigen::VectorXd>& points, double tol,
                                    std::uint64_t seed, int pairs_per_point) {
  const int n = s.chart->dim();
  if (n % 2 == 0)
    fail(ErrorKind::DimensionMismatch,
         "almost-contact structures need an odd-dimensional chart, got dim " + std::to_string(n));
  if (points.empty()) fail(ErrorKind::Invalid, "check_almost_contact needs at least one point");

  AxiomResiduals out;
  out.tol = tol;
  Rng rng(Rng::derive(seed, 0xac0de));
  for (const auto& p : points) {
    Eigen::MatrixXd psi = s.psi_at(p);
    Eigen::VectorXd xi = s.xi.eval(p);
    Eigen::VectorXd eta = s.eta_at(p);
    Eigen::MatrixXd g = s.chart->metric(p);

    Eigen::MatrixXd psi2 = psi * psi + Eigen::MatrixXd::Identity(n, n) - xi * eta.transpose();
    out.psi_squared = std::max(out.psi_squared, psi2.cwiseAbs().maxCoeff());

    Eigen::VectorXd psi_xi = psi * xi;
    out.psi_xi = std::max(out.psi_xi, std::sqrt(std::max(0.0, psi_xi.dot(g * psi_xi))));

    out.eta_psi = std::max(out.eta_psi, (eta.transpose() * psi).cwiseAbs().maxCoeff());
    out.eta_xi = std::max(out.eta_xi, std::abs(eta.dot(xi) - 1.0));
    out.eta_metric = std::max(out.eta_metric, (eta - g * xi).cwiseAbs().maxCoeff());

    for (int k = 0; k < pairs_per_point; ++k) {
      Eigen::VectorXd w = random_vector(rng, n);
      Eigen::VectorXd z = random_vector(rng, n);
      double lhs = (psi * w).dot(g * (psi * z));
      double rhs = w.dot(g * z) - eta.dot(w) * eta.dot(z);
      out.compatibility = std::max(out.compatibility, std::abs(lhs - rhs));
    }
  }
  out.pass = out.max_residual() < tol;
  return out;
}

TypeEstimate estimate_type(const ContactStructure& s, const Eigen::VectorXd& p) {
  const int n = s.chart->dim();
  Eigen::MatrixXd g = s.chart->metric(p);
  Eigen::MatrixXd psi = s.psi_at(p);
  Eigen::VectorXd xi = s.xi.eval(p);
  Eigen::VectorXd eta = s.eta_at(p);

  // Fitting in a g-orthonormal frame makes the result independent of the
  // chart basis; whitening by chol(g)^T turns g-norms into Euclidean ones.
  Eigen::MatrixXd frame = orthonormalize(Eigen::MatrixXd::Identity(n, n), g);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  Eigen::MatrixXd white = llt.matrixL().transpose();

  Eigen::MatrixXd design(n * n, 2);
  Eigen::VectorXd target(n * n);
  for (int d = 0; d < n; ++d) {
    Eigen::VectorXd wdir = frame.col(d);
    Eigen::VectorXd lhs = covariant_derivative_vector(*s.chart, s.xi, wdir, p);
    Eigen::VectorXd c_alpha = -(psi * wdir);
    Eigen::VectorXd c_beta = wdir - eta.dot(wdir) * xi;
    design.block(d * n, 0, n, 1) = white * c_alpha;
    design.block(d * n, 1, n, 1) = white * c_beta;
    target.segment(d * n, n) = white * lhs;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(1);
  TypeEstimate out;
  out.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 0.0) || out.cond > kDegenerateFitCond)
    fail(ErrorKind::DegenerateFit,
         "type fit is degenerate at this point (condition number " + std::to_string(out.cond) +
             "); psi W and W - eta(W) xi do not separate");
  Eigen::Vector2d sol = svd.solve(target);
  out.alpha = sol[0];
  out.beta = sol[1];
  out.residual = (design * sol - target).norm() / std::sqrt(static_cast<double>(n));
  return out;
}

double TransSasakianResiduals::max_residual() const {
  return std::max({psi_equation, eta_printed, eta_scalar, xi_equation});
}

TransSasakianResiduals trans_sasakian_residual(const ContactStructure& s, const Eigen::VectorXd& p,
                                               double alpha, double beta, std::uint64_t seed,
                                               int pairs) {
  const int n = s.chart->dim();
  Eigen::MatrixXd g = s.chart->metric(p);
  Eigen::MatrixXd psi = s.psi_at(p);
  Eigen::VectorXd xi = s.xi.eval(p);
  Eigen::VectorXd eta = s.eta_at(p);

  // d eta_j / d x^i, for the covariant derivative of eta against constant Z
  Eigen::MatrixXd deta(n, n);
  for (int j = 0; j < n; ++j) {
    expr::Jet1 jet = s.eta[static_cast<std::size_t>(j)].jet1(p);
    for (int i = 0; i < n; ++i) deta(i, j) = jet.grad[i];
  }
  std::vector<Eigen::MatrixXd> gamma = christoffel(*s.chart, p);

  auto gnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); };

  Rng rng(Rng::derive(seed, 0x75a5));
  double acc_psi = 0.0, acc_eta_p = 0.0, acc_eta_s = 0.0, acc_xi = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Eigen::VectorXd w = random_vector(rng, n);
    Eigen::VectorXd z = random_vector(rng, n);

    // (nabla_W psi) Z
    Eigen::VectorXd dpsi = covariant_derivative_tensor11(*s.chart, s.psi, w, z, p);
    Eigen::VectorXd model_psi = alpha * (w.dot(g * z) * xi - eta.dot(z) * w) +
                                beta * ((psi * w).dot(g * z) * xi - eta.dot(z) * (psi * w));
    acc_psi += std::pow(gnorm(dpsi - model_psi), 2);

    // (nabla_W eta)(Z) for constant-coefficient Z
    double deta_wz = w.dot(deta * z) - eta.dot(christoffel_apply(gamma, w, z));
    double model_eta = -alpha * (psi * w).dot(g * z) + beta * (psi * w).dot(g * (psi * z));
    double scalar_gap = deta_wz - model_eta;
    acc_eta_s += scalar_gap * scalar_gap;
    // printed form: both sides ride along xi
    acc_eta_p += std::pow(gnorm(scalar_gap * xi), 2);

    // nabla_W xi
    Eigen::VectorXd dxi = covariant_derivative_vector(*s.chart, s.xi, w, p);
    Eigen::VectorXd model_xi = -alpha * (psi * w) + beta * (w - eta.dot(w) * xi);
    acc_xi += std::pow(gnorm(dxi - model_xi), 2);
  }

  TransSasakianResiduals out;
  out.psi_equation = std::sqrt(acc_psi / pairs);
  out.eta_scalar = std::sqrt(acc_eta_s / pairs);
  out.eta_printed = std::sqrt(acc_eta_p / pairs);
  out.xi_equation = std::sqrt(acc_xi / pairs);
  return out;
}

}  // namespace rmap
