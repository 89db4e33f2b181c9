#include "rmap/smooth_map.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rmap/error.hpp"
#include "rmap/geometry.hpp"

namespace rmap {

namespace {
constexpr double kDefaultRankRtol = 1e-8;
constexpr double kShapeOrthogonalityTol = 1e-9;
}  // namespace

SmoothMapSpec SmoothMapSpec::parse(const ChartManifold& domain, const ChartManifold& codomain,
                                   const std::vector<std::string>& comps) {
  if (static_cast<int>(comps.size()) != codomain.dim())
    fail(ErrorKind::DimensionMismatch,
         "map into '" + codomain.name() + "' needs " + std::to_string(codomain.dim()) +
             " components, got " + std::to_string(comps.size()));
  SmoothMapSpec m;
  m.domain = &domain;
  m.codomain = &codomain;
  m.components.reserve(comps.size());
  for (const auto& c : comps) m.components.push_back(domain.parse_field(c));
  return m;
}

Eigen::VectorXd SmoothMapSpec::apply(const Eigen::VectorXd& p) const {
  Eigen::VectorXd out(static_cast<int>(components.size()));
  for (std::size_t c = 0; c < components.size(); ++c) out[static_cast<int>(c)] = components[c].eval(p);
  return out;
}

MapJet map_jet(const SmoothMapSpec& map, const Eigen::VectorXd& p) {
  const int m = map.domain->dim();
  const int b = map.codomain->dim();
  if (p.size() != m) fail(ErrorKind::DimensionMismatch, "map_jet point has wrong dimension");

  MapJet out;
  out.point = p;
  out.image.resize(b);
  out.jacobian.resize(b, m);
  out.second.reserve(static_cast<std::size_t>(b));
  for (int c = 0; c < b; ++c) {
    expr::Jet2 jet = map.components[static_cast<std::size_t>(c)].jet2(p);
    out.image[c] = jet.value;
    out.jacobian.row(c) = jet.grad.transpose();
    out.second.push_back(jet.hess);
  }
  if (!map.codomain->domain().contains(out.image))
    fail(ErrorKind::ImageOutsideDomain,
         "image of the point under the map leaves the domain of '" + map.codomain->name() + "'");
  return out;
}

FrameDecomposition decompose(const SmoothMapSpec& map, const Eigen::VectorXd& p,
                             double rank_rtol) {
  MapJet jet = map_jet(map, p);
  const int m = map.domain->dim();
  const int b = map.codomain->dim();

  Eigen::MatrixXd g1 = map.domain->metric(p);
  Eigen::MatrixXd g2 = map.codomain->metric(jet.image);
  Eigen::MatrixXd g1_is = metric_inv_sqrt(g1);
  Eigen::MatrixXd g2_s = metric_sqrt(g2);
  Eigen::MatrixXd g2_is = metric_inv_sqrt(g2);

  Eigen::MatrixXd white = g2_s * jet.jacobian * g1_is;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(white, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();

  FrameDecomposition out;
  out.singular_values = sv;
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  double threshold = rank_rtol * smax;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  out.rank = rank;

  if (smax > 0.0) {
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > 0.1 * threshold && sv(i) < 10.0 * threshold)
        out.warnings.push_back("singular value " + std::to_string(sv(i)) +
                               " sits within a decade of the rank threshold " +
                               std::to_string(threshold));
    }
  }

  Eigen::MatrixXd v = svd.matrixV();  // m x m
  Eigen::MatrixXd u = svd.matrixU();  // b x b
  out.hker = g1_is * v.leftCols(rank);
  out.ker = g1_is * v.rightCols(m - rank);
  out.range = g2_is * u.leftCols(rank);
  out.rperp = g2_is * u.rightCols(b - rank);
  return out;
}

double isometry_residual(const SmoothMapSpec& map, const Eigen::VectorXd& p) {
  FrameDecomposition dec = decompose(map, p);
  MapJet jet = map_jet(map, p);
  Eigen::MatrixXd g2 = map.codomain->metric(jet.image);
  Eigen::MatrixXd pushed = jet.jacobian * dec.hker;
  Eigen::MatrixXd gram = pushed.transpose() * g2 * pushed;
  return (gram - Eigen::MatrixXd::Identity(dec.rank, dec.rank)).cwiseAbs().maxCoeff();
}

MapPointData map_point_data(const SmoothMapSpec& map, const Eigen::VectorXd& p) {
  MapPointData data;
  data.jet = map_jet(map, p);
  data.gamma_dom = christoffel(*map.domain, p);
  data.gamma_cod = christoffel(*map.codomain, data.jet.image);
  return data;
}

Eigen::VectorXd second_fundamental_form(const MapPointData& data, const Eigen::VectorXd& w,
                                        const Eigen::VectorXd& z) {
  const int b = static_cast<int>(data.jet.image.size());
  Eigen::VectorXd out(b);
  Eigen::VectorXd gamma_wz = christoffel_apply(data.gamma_dom, w, z);
  Eigen::VectorXd jw = data.jet.jacobian * w;
  Eigen::VectorXd jz = data.jet.jacobian * z;
  Eigen::VectorXd gamma_cod = christoffel_apply(data.gamma_cod, jw, jz);
  for (int c = 0; c < b; ++c)
    out[c] = w.dot(data.jet.second[static_cast<std::size_t>(c)] * z);
  out -= data.jet.jacobian * gamma_wz;
  out += gamma_cod;
  return out;
}

double lemma21_residual(const SmoothMapSpec& map, const Eigen::VectorXd& p) {
  FrameDecomposition dec = decompose(map, p);
  MapPointData data = map_point_data(map, p);
  Eigen::MatrixXd g2 = map.codomain->metric(data.jet.image);
  double worst = 0.0;
  for (int i = 0; i < dec.rank; ++i) {
    for (int j = i; j < dec.rank; ++j) {
      Eigen::VectorXd sff = second_fundamental_form(data, dec.hker.col(i), dec.hker.col(j));
      Eigen::VectorXd overlaps = dec.range.transpose() * (g2 * sff);
      if (overlaps.size() > 0) worst = std::max(worst, overlaps.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

Eigen::MatrixXd shape_operator(const SmoothMapSpec& map, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& v) {
  FrameDecomposition dec = decompose(map, p);
  MapPointData data = map_point_data(map, p);
  Eigen::MatrixXd g2 = map.codomain->metric(data.jet.image);

  double vnorm = std::sqrt(std::max(0.0, v.dot(g2 * v)));
  if (vnorm > 0.0) {
    Eigen::VectorXd range_part = project_onto(dec.range, g2, v);
    double overlap = std::sqrt(std::max(0.0, range_part.dot(g2 * range_part)));
    if (overlap / vnorm > kShapeOrthogonalityTol)
      fail(ErrorKind::NonOrthogonal,
           "shape operator direction has a range component (relative overlap " +
               std::to_string(overlap / vnorm) + ")");
  }

  // entries in the orthonormal range basis; pi_* hker_i = sigma_i range_i
  Eigen::MatrixXd a(dec.rank, dec.rank);
  for (int i = 0; i < dec.rank; ++i) {
    for (int j = i; j < dec.rank; ++j) {
      Eigen::VectorXd sff = second_fundamental_form(data, dec.hker.col(i), dec.hker.col(j));
      double s = v.dot(g2 * sff) / (dec.singular_values(i) * dec.singular_values(j));
      a(i, j) = s;
      a(j, i) = s;
    }
  }
  return a;
}

UmbilicalFit umbilical_fit(const SmoothMapSpec& map, const Eigen::VectorXd& p) {
  FrameDecomposition dec = decompose(map, p);
  MapPointData data = map_point_data(map, p);
  Eigen::MatrixXd g2 = map.codomain->metric(data.jet.image);
  if (dec.rank == 0) fail(ErrorKind::EmptyDistribution, "umbilical fit needs a nonzero rank");

  auto gnorm2 = [&](const Eigen::VectorXd& x) { return std::max(0.0, x.dot(g2 * x)); };

  // g1(hker_i, hker_j) = delta_ij, so the normal equations give H2 as the
  // average diagonal of the second fundamental form, projected off the range.
  std::vector<std::vector<Eigen::VectorXd>> sff(static_cast<std::size_t>(dec.rank));
  UmbilicalFit fit;
  fit.h2 = Eigen::VectorXd::Zero(map.codomain->dim());
  for (int i = 0; i < dec.rank; ++i) {
    sff[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(dec.rank));
    for (int j = i; j < dec.rank; ++j) {
      Eigen::VectorXd s = second_fundamental_form(data, dec.hker.col(i), dec.hker.col(j));
      sff[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
      fit.sff_scale = std::max(fit.sff_scale, std::sqrt(gnorm2(s)));
    }
    fit.h2 += sff[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  }
  fit.h2 /= static_cast<double>(dec.rank);
  if (dec.rperp.cols() > 0)
    fit.h2 = project_onto(dec.rperp, g2, fit.h2);
  else
    fit.h2.setZero();

  double acc = 0.0;
  int pairs = 0;
  for (int i = 0; i < dec.rank; ++i) {
    for (int j = i; j < dec.rank; ++j) {
      Eigen::VectorXd model = (i == j ? 1.0 : 0.0) * fit.h2;
      acc += gnorm2(sff[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - model);
      ++pairs;
    }
  }
  fit.residual = std::sqrt(acc / pairs);
  return fit;
}

Eigen::VectorXd mean_curvature(const SmoothMapSpec& map, const Eigen::VectorXd& p,
                               Distribution which) {
  FrameDecomposition dec = decompose(map, p);
  Eigen::MatrixXd g1 = map.domain->metric(p);
  std::vector<Eigen::MatrixXd> gamma = christoffel(*map.domain, p);

  const Eigen::MatrixXd& frame = which == Distribution::Vertical ? dec.ker : dec.hker;
  const Eigen::MatrixXd& target = which == Distribution::Vertical ? dec.hker : dec.ker;
  if (frame.cols() == 0)
    fail(ErrorKind::EmptyDistribution,
         which == Distribution::Vertical
             ? "vertical mean curvature needs a nonempty kernel"
             : "horizontal mean curvature needs a nonzero rank");

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(map.domain->dim());
  for (int i = 0; i < frame.cols(); ++i) {
    Eigen::VectorXd nab = christoffel_apply(gamma, frame.col(i), frame.col(i));
    acc += project_onto(target, g1, nab);
  }
  return acc / static_cast<double>(frame.cols());
}

HarmonicityReport harmonicity_report(const SmoothMapSpec& map,
                                     const std::vector<Eigen::VectorXd>& points, double tol) {
  if (points.empty()) fail(ErrorKind::Invalid, "harmonicity_report needs at least one point");
  HarmonicityReport rep;
  rep.tol = tol;
  for (const auto& p : points) {
    FrameDecomposition dec = decompose(map, p);
    MapPointData data = map_point_data(map, p);
    Eigen::MatrixXd g2 = map.codomain->metric(data.jet.image);
    auto gnorm = [&](const Eigen::VectorXd& x) {
      return std::sqrt(std::max(0.0, x.dot(g2 * x)));
    };

    Eigen::VectorXd tension = Eigen::VectorXd::Zero(map.codomain->dim());
    for (int i = 0; i < dec.ker.cols(); ++i)
      tension += second_fundamental_form(data, dec.ker.col(i), dec.ker.col(i));
    for (int i = 0; i < dec.hker.cols(); ++i)
      tension += second_fundamental_form(data, dec.hker.col(i), dec.hker.col(i));

    const int q = static_cast<int>(dec.ker.cols());
    Eigen::VectorXd pushed = Eigen::VectorXd::Zero(map.codomain->dim());
    if (q > 0) {
      Eigen::VectorXd rho_v = mean_curvature(map, p, Distribution::Vertical);
      pushed = data.jet.jacobian * rho_v;
    }

    rep.tension_norm = std::max(rep.tension_norm, gnorm(tension));
    rep.pushed_vertical = std::max(rep.pushed_vertical, gnorm(pushed));
    rep.trace_residual = std::max(rep.trace_residual, gnorm(tension + q * pushed));
  }
  rep.harmonic = rep.tension_norm < tol;
  return rep;
}

}  // namespace rmap
