#include "rmap/chart.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "rmap/error.hpp"

namespace rmap {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSymmetryTol = 1e-12;
constexpr double kPositiveEigenFloor = 1e-10;
}  // namespace

DomainSpec DomainSpec::unbounded(int dim) {
  DomainSpec d;
  d.lo = Eigen::VectorXd::Constant(dim, -kInf);
  d.hi = Eigen::VectorXd::Constant(dim, kInf);
  return d;
}

DomainSpec DomainSpec::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size())
    fail(ErrorKind::DimensionMismatch, "domain box bounds have different dimensions");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i]))
      fail(ErrorKind::Invalid, "domain box is empty in coordinate " + std::to_string(i));
  DomainSpec d;
  d.lo = lo;
  d.hi = hi;
  return d;
}

bool DomainSpec::finite() const {
  for (int i = 0; i < lo.size(); ++i)
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
  return true;
}

bool DomainSpec::contains(const Eigen::VectorXd& p, double margin) const {
  if (p.size() != lo.size()) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
  }
  for (const auto& ex : exclusions) {
    if (std::abs(p[ex.coord] - ex.value) <= margin) return false;
  }
  return true;
}

Eigen::VectorXd DomainSpec::sample(Rng& rng, double margin) const {
  if (!finite())
    fail(ErrorKind::Invalid, "sampling requires a finite domain box");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Eigen::VectorXd p(lo.size());
    for (int i = 0; i < lo.size(); ++i) p[i] = rng.uniform(lo[i], hi[i]);
    if (contains(p, margin)) return p;
  }
  fail(ErrorKind::Invalid, "domain sampling failed; exclusions cover the box");
}

ChartManifold::ChartManifold(std::string name, std::vector<std::string> coords, DomainSpec domain,
                             const std::vector<std::string>& metric_entries,
                             std::uint64_t validation_seed, int validation_samples)
    : name_(std::move(name)), coords_(std::move(coords)), domain_(std::move(domain)) {
  dim_ = static_cast<int>(coords_.size());
  if (dim_ == 0) fail(ErrorKind::Invalid, "chart '" + name_ + "' has no coordinates");
  if (domain_.dim() != dim_)
    fail(ErrorKind::DimensionMismatch,
         "chart '" + name_ + "': domain dimension " + std::to_string(domain_.dim()) +
             " does not match " + std::to_string(dim_) + " coordinates");
  if (static_cast<int>(metric_entries.size()) != dim_ * dim_)
    fail(ErrorKind::DimensionMismatch,
         "chart '" + name_ + "': expected " + std::to_string(dim_ * dim_) +
             " metric entries, got " + std::to_string(metric_entries.size()));
  metric_.reserve(metric_entries.size());
  for (const auto& entry : metric_entries) metric_.push_back(parse_field(entry));

  // The declared domain may be unbounded; validate on a clamped box around
  // the origin in that case.
  DomainSpec probe = domain_;
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(probe.lo[i])) probe.lo[i] = -2.0;
    if (!std::isfinite(probe.hi[i])) probe.hi[i] = 2.0;
  }
  Rng rng(Rng::derive(validation_seed, 0x6d65747269636bULL));
  for (int s = 0; s < validation_samples; ++s) {
    Eigen::VectorXd p = probe.sample(rng);
    Eigen::MatrixXd g = metric(p);
    double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if (((g - g.transpose()).cwiseAbs().maxCoeff()) > kSymmetryTol * scale)
      fail(ErrorKind::Invalid, "chart '" + name_ + "': metric is not symmetric at a sampled point");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
    if (es.eigenvalues().minCoeff() <= kPositiveEigenFloor * scale)
      fail(ErrorKind::Invalid,
           "chart '" + name_ + "': metric is not positive definite at a sampled point");
  }
}

expr::ScalarField ChartManifold::parse_field(const std::string& text) const {
  return expr::ScalarField::parse(text, coords_);
}

Eigen::MatrixXd ChartManifold::metric(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd g(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) g(i, j) = metric_[static_cast<std::size_t>(i * dim_ + j)].eval(p);
  return g;
}

ChartManifold::MetricJet ChartManifold::metric_jet(const Eigen::VectorXd& p) const {
  MetricJet out;
  out.g.resize(dim_, dim_);
  out.dg.assign(static_cast<std::size_t>(dim_), Eigen::MatrixXd::Zero(dim_, dim_));
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      expr::Jet1 jet = metric_[static_cast<std::size_t>(i * dim_ + j)].jet1(p);
      out.g(i, j) = jet.value;
      for (int k = 0; k < dim_; ++k) out.dg[static_cast<std::size_t>(k)](i, j) = jet.grad[k];
    }
  }
  return out;
}

double ChartManifold::inner(const Eigen::VectorXd& p, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b) const {
  return a.dot(metric(p) * b);
}

double ChartManifold::norm(const Eigen::VectorXd& p, const Eigen::VectorXd& a) const {
  double q = inner(p, a, a);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

VectorFieldSpec VectorFieldSpec::parse(const ChartManifold& chart,
                                       const std::vector<std::string>& comps) {
  if (static_cast<int>(comps.size()) != chart.dim())
    fail(ErrorKind::DimensionMismatch,
         "vector field on '" + chart.name() + "' needs " + std::to_string(chart.dim()) +
             " components, got " + std::to_string(comps.size()));
  VectorFieldSpec f;
  f.components.reserve(comps.size());
  for (const auto& c : comps) f.components.push_back(chart.parse_field(c));
  return f;
}

VectorFieldSpec VectorFieldSpec::constant(const Eigen::VectorXd& v, int dim) {
  VectorFieldSpec f;
  f.components.reserve(static_cast<std::size_t>(v.size()));
  for (int i = 0; i < v.size(); ++i)
    f.components.push_back(expr::ScalarField::constant(v[i], dim));
  return f;
}

Eigen::VectorXd VectorFieldSpec::eval(const Eigen::VectorXd& p) const {
  Eigen::VectorXd v(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) v[static_cast<int>(i)] = components[i].eval(p);
  return v;
}

VectorFieldSpec::Jet VectorFieldSpec::jet(const Eigen::VectorXd& p) const {
  Jet out;
  const int n = static_cast<int>(components.size());
  out.value.resize(n);
  out.jacobian.resize(n, p.size());
  for (int i = 0; i < n; ++i) {
    expr::Jet1 j = components[static_cast<std::size_t>(i)].jet1(p);
    out.value[i] = j.value;
    out.jacobian.row(i) = j.grad.transpose();
  }
  return out;
}

}  // namespace rmap
