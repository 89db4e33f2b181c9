#include "rmap/clairaut.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>

#include "rmap/error.hpp"
#include "rmap/geometry.hpp"

namespace rmap {

namespace {

constexpr double kOrthogonalityTol = 1e-9;  // relative range overlap for bc_split
constexpr double kReebRatio = 1e-6;         // component ratio for the Reeb position
constexpr double kLiftTol = 1e-8;           // residual for lifts through the Jacobian
constexpr double kSpanTol = 1e-8;           // declared frames must rebuild the velocity
constexpr double kFrameMismatchTol = 1e-6;  // declared vs computed span angle

double gnorm(const Eigen::MatrixXd& g, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(g * v)));
}

void require_same_chart(const SmoothMapSpec& map, const ContactStructure& structure) {
  if (structure.chart == map.codomain) return;
  if (structure.chart != nullptr && map.codomain != nullptr &&
      structure.chart->name() == map.codomain->name() &&
      structure.chart->dim() == map.codomain->dim())
    return;
  fail(ErrorKind::Invalid,
       "structure lives on '" + (structure.chart != nullptr ? structure.chart->name() : "?") +
           "' but the map lands in '" + map.codomain->name() + "'");
}

// (alpha, beta) at a codomain point: forced override first, then declared
// expressions, then the least-squares estimate.
std::pair<double, double> type_at(const ContactStructure& s, const Eigen::VectorXd& b,
                                  const TypeOverride& forced) {
  if (forced) return *forced;
  if (s.declared_type)
    return {s.declared_type->first.eval(b), s.declared_type->second.eval(b)};
  auto est = estimate_type(s, b);
  return {est.alpha, est.beta};
}

// g-orthonormal basis of the column span, dropping near-dependent columns.
Eigen::MatrixXd span_basis(const Eigen::MatrixXd& cols, const Eigen::MatrixXd& g) {
  if (cols.cols() == 0) return Eigen::MatrixXd(cols.rows(), 0);
  Eigen::MatrixXd whitened = metric_sqrt(g) * cols;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * smax && sv[i] > 0.0) ++r;
  return metric_inv_sqrt(g) * svd.matrixU().leftCols(r);
}

// Declared frame fields evaluated and g-orthonormalized at a point.
Eigen::MatrixXd eval_frame(const std::vector<VectorFieldSpec>& fields,
                           const Eigen::VectorXd& b, const Eigen::MatrixXd& g) {
  Eigen::MatrixXd cols(b.size(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i)
    cols.col(static_cast<Eigen::Index>(i)) = fields[i].eval(b);
  if (cols.cols() == 0) return cols;
  return orthonormalize(cols, g);
}

// Least-squares lift through the Jacobian into (ker pi_*)^perp: the W with
// pi_* W = target.  `what` names the quantity for the error message.
Eigen::VectorXd horizontal_lift(const MapJet& jet, const FrameDecomposition& dec,
                                const Eigen::MatrixXd& g2, const Eigen::VectorXd& target,
                                const char* what) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(jet.jacobian.cols());
  for (int i = 0; i < dec.rank; ++i) {
    double c = dec.range.col(i).dot(g2 * target) / dec.singular_values[i];
    w += c * dec.hker.col(i);
  }
  double scale = std::max(1.0, gnorm(g2, target));
  if (gnorm(g2, jet.jacobian * w - target) > kLiftTol * scale)
    fail(ErrorKind::Invalid,
         std::string(what) + " left the range of the map (lift residual above 1e-8)");
  return w;
}

Eigen::VectorXd raise_gradient(const std::optional<expr::ScalarField>& h,
                               const Eigen::MatrixXd& g, const Eigen::VectorXd& b) {
  if (!h) return Eigen::VectorXd::Zero(b.size());
  return g.llt().solve(h->jet1(b).grad);
}

}  // namespace

// ============================================================================
// Anti-invariance and the B/C split
// ============================================================================

AntiInvariantSplit anti_invariance_check(const SmoothMapSpec& map,
                                         const ContactStructure& structure,
                                         const Eigen::VectorXd& p, double tol) {
  require_same_chart(map, structure);
  AntiInvariantSplit out;
  out.tol = tol;
  out.frames = decompose(map, p);
  out.image = map.apply(p);
  out.g2 = map.codomain->metric(out.image);
  out.psi = structure.psi_at(out.image);
  const FrameDecomposition& dec = out.frames;

  Eigen::MatrixXd psi_range(out.image.size(), dec.rank);
  double res = 0.0;
  for (int i = 0; i < dec.rank; ++i) {
    psi_range.col(i) = out.psi * dec.range.col(i);
    res = std::max(res, gnorm(out.g2, project_onto(dec.range, out.g2, psi_range.col(i))));
  }
  out.residual = res;
  out.is_anti_invariant = res < tol;
  out.psi_range_frame = span_basis(psi_range, out.g2);

  // mu: what remains of the range complement after removing psi(range).
  Eigen::MatrixXd residuals(out.image.size(), dec.rperp.cols());
  for (int i = 0; i < dec.rperp.cols(); ++i)
    residuals.col(i) =
        dec.rperp.col(i) - project_onto(out.psi_range_frame, out.g2, dec.rperp.col(i));
  out.mu_frame = span_basis(residuals, out.g2);

  Eigen::VectorXd xi = structure.xi.eval(out.image);
  out.reeb_vertical_norm = gnorm(out.g2, project_onto(dec.range, out.g2, xi));
  out.reeb_horizontal_norm = gnorm(out.g2, project_onto(dec.rperp, out.g2, xi));
  double total = gnorm(out.g2, xi);
  if (out.reeb_vertical_norm <= kReebRatio * total)
    out.reeb_position = ReebPosition::Horizontal;
  else if (out.reeb_horizontal_norm <= kReebRatio * total)
    out.reeb_position = ReebPosition::Vertical;
  else
    out.reeb_position = ReebPosition::Mixed;
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> bc_split(const AntiInvariantSplit& split,
                                                     const Eigen::VectorXd& v) {
  double vn = gnorm(split.g2, v);
  if (vn > 0.0) {
    double overlap = gnorm(split.g2, project_onto(split.frames.range, split.g2, v)) / vn;
    if (overlap > kOrthogonalityTol)
      fail(ErrorKind::NonOrthogonal,
           "vector has a range component (relative overlap " + std::to_string(overlap) + ")");
  }
  Eigen::VectorXd psiv = split.psi * v;
  Eigen::VectorXd bv = project_onto(split.frames.range, split.g2, psiv);
  return {bv, psiv - bv};
}

// ============================================================================
// Declared codomain frames
// ============================================================================

double declared_frame_mismatch(const SmoothMapSpec& map, const CodomainFrames& frames,
                               const Eigen::VectorXd& p) {
  FrameDecomposition dec = decompose(map, p);
  Eigen::VectorXd b = map.apply(p);
  Eigen::MatrixXd g2 = map.codomain->metric(b);
  if (static_cast<int>(frames.range.size()) != dec.rank)
    fail(ErrorKind::DimensionMismatch,
         "declared range frame has " + std::to_string(frames.range.size()) +
             " fields but the map has rank " + std::to_string(dec.rank));
  if (static_cast<int>(frames.perp.size()) != static_cast<int>(b.size()) - dec.rank)
    fail(ErrorKind::DimensionMismatch,
         "declared complement frame has " + std::to_string(frames.perp.size()) +
             " fields but the complement has dimension " +
             std::to_string(b.size() - dec.rank));
  double angle = 0.0;
  if (dec.rank > 0)
    angle = std::max(angle, max_principal_angle(eval_frame(frames.range, b, g2), dec.range, g2));
  if (!frames.perp.empty())
    angle = std::max(angle, max_principal_angle(eval_frame(frames.perp, b, g2), dec.rperp, g2));
  return angle;
}

// ============================================================================
// Clairaut verification along geodesics
// ============================================================================

std::vector<ClairautGeodesicTrace> clairaut_geodesic_check(
    const SmoothMapSpec& map, const ContactStructure& structure,
    const std::optional<expr::ScalarField>& h, const CodomainFrames& frames,
    const std::optional<SmoothMapSpec>& section, const std::vector<ClairautStart>& starts,
    double length, double step, double tol) {
  require_same_chart(map, structure);
  const ChartManifold& target = *map.codomain;
  if (h && h->dim() != target.dim())
    fail(ErrorKind::DimensionMismatch, "h must be a function of the codomain coordinates");
  if (section && (section->domain->name() != map.codomain->name() ||
                  section->codomain->name() != map.domain->name()))
    fail(ErrorKind::Invalid, "section must map the codomain chart back into the domain chart");

  std::vector<ClairautGeodesicTrace> out;
  for (const auto& start : starts) {
    ClairautGeodesicTrace tr;
    tr.h_fitted = !h.has_value();
    tr.tol = tol;
    tr.base = integrate_geodesic(target, start.point, start.velocity, length, step);
    const auto& samples = tr.base.samples;
    tr.theta.reserve(samples.size());
    tr.invariant.reserve(samples.size());

    double inv0 = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& smp = samples[i];
      Eigen::MatrixXd g2 = target.metric(smp.point);
      double speed = gnorm(g2, smp.velocity);
      if (speed <= 0.0)
        fail(ErrorKind::Invalid, "zero velocity along the trace: theta is undefined");
      Eigen::MatrixXd rframe = eval_frame(frames.range, smp.point, g2);
      Eigen::MatrixXd pframe = eval_frame(frames.perp, smp.point, g2);
      Eigen::VectorXd rho = project_onto(rframe, g2, smp.velocity);
      Eigen::VectorXd u = project_onto(pframe, g2, smp.velocity);
      if (gnorm(g2, rho + u - smp.velocity) > kSpanTol * speed)
        fail(ErrorKind::RankDeficient,
             "declared frames do not span the tangent space along the trace");
      double cos_t = std::clamp(gnorm(g2, u) / speed, 0.0, 1.0);
      double sin_t = std::clamp(gnorm(g2, rho) / speed, 0.0, 1.0);
      tr.theta.push_back(std::acos(cos_t));
      double inv = (h ? std::exp(h->eval(smp.point)) : 1.0) * sin_t;
      tr.invariant.push_back(inv);
      if (i == 0) inv0 = inv;
      tr.drift = std::max(tr.drift,
                          std::abs(inv - inv0) / std::max(std::abs(inv0), 1e-12));
    }
    tr.pass = tr.drift < tol;

    if (section) {
      tr.def22_checked = true;
      std::size_t stride = std::max<std::size_t>(1, samples.size() / 64);
      for (std::size_t i = 0; i < samples.size(); i += stride) {
        Eigen::VectorXd p = section->apply(samples[i].point);
        if (!map.domain->domain().contains(p))
          fail(ErrorKind::ImageOutsideDomain, "section left the domain chart");
        UmbilicalFit fit = umbilical_fit(map, p);
        Eigen::VectorXd image = map.apply(p);
        Eigen::MatrixXd g2 = target.metric(image);
        tr.umbilical_residual = std::max(tr.umbilical_residual, fit.residual);
        tr.gradient_residual = std::max(
            tr.gradient_residual, gnorm(g2, fit.h2 + raise_gradient(h, g2, image)));
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

UmbilicalGradientReport umbilical_gradient_check(const SmoothMapSpec& map,
                                                 const std::optional<expr::ScalarField>& h,
                                                 const std::vector<Eigen::VectorXd>& points,
                                                 double tol) {
  if (points.empty()) fail(ErrorKind::Invalid, "no points supplied");
  if (h && h->dim() != map.codomain->dim())
    fail(ErrorKind::DimensionMismatch, "h must be a function of the codomain coordinates");
  UmbilicalGradientReport rep;
  rep.tol = tol;
  for (const auto& p : points) {
    UmbilicalFit fit = umbilical_fit(map, p);
    Eigen::VectorXd b = map.apply(p);
    Eigen::MatrixXd g2 = map.codomain->metric(b);
    Eigen::VectorXd grad = raise_gradient(h, g2, b);
    rep.umbilical_residual = std::max(rep.umbilical_residual, fit.residual);
    rep.gradient_residual = std::max(rep.gradient_residual, gnorm(g2, fit.h2 + grad));
    rep.h2_norm = std::max(rep.h2_norm, gnorm(g2, fit.h2));
    rep.grad_norm = std::max(rep.grad_norm, gnorm(g2, grad));
  }
  rep.satisfied = rep.umbilical_residual < tol && rep.gradient_residual < tol;
  return rep;
}

// ============================================================================
// Theorem residual evaluators
// ============================================================================

namespace {

// Everything the per-sample term assembly needs, precomputed in one pass so
// the along-curve derivatives can be taken by centered differences.
struct CurveSample {
  Eigen::VectorXd x, v;        // domain point and velocity
  MapPointData data;           // jet + both connection coefficient sets
  FrameDecomposition dec;
  Eigen::MatrixXd g1, g2;
  Eigen::VectorXd image, pushed;      // pi(x), pi_* gammadot
  Eigen::VectorXd w, u;               // horizontal lift and perp part
  Eigen::VectorXd piw, piz, z;        // pi_* W, pi_* Z, Z
  Eigen::VectorXd psi_piw, cu, xi;
  double eta_u = 0.0, alpha = 0.0, beta = 0.0, speed2 = 0.0;
  Eigen::VectorXd accel;              // nabla_{Omegadot} Omegadot
};

CurveSample build_sample(const SmoothMapSpec& map, const ContactStructure& structure,
                         const GeodesicSample& gs, const TypeOverride& forced) {
  CurveSample cs;
  cs.x = gs.point;
  cs.v = gs.velocity;
  cs.data = map_point_data(map, cs.x);
  cs.dec = decompose(map, cs.x);
  if (cs.dec.rank == 0) fail(ErrorKind::Invalid, "map has rank zero along the trace");
  cs.g1 = map.domain->metric(cs.x);
  cs.image = cs.data.jet.image;
  cs.g2 = map.codomain->metric(cs.image);
  const Eigen::MatrixXd& jac = cs.data.jet.jacobian;

  cs.pushed = jac * cs.v;
  Eigen::VectorXd rho = project_onto(cs.dec.range, cs.g2, cs.pushed);
  cs.w = horizontal_lift(cs.data.jet, cs.dec, cs.g2, rho, "the range part of the velocity");
  cs.piw = jac * cs.w;
  cs.u = cs.pushed - cs.piw;

  Eigen::MatrixXd psi = structure.psi_at(cs.image);
  cs.psi_piw = psi * cs.piw;
  Eigen::VectorXd psi_u = psi * cs.u;
  Eigen::VectorXd bu = project_onto(cs.dec.range, cs.g2, psi_u);
  cs.cu = psi_u - bu;
  cs.z = horizontal_lift(cs.data.jet, cs.dec, cs.g2, bu, "the B-part of the perp velocity");
  cs.piz = jac * cs.z;

  cs.xi = structure.xi.eval(cs.image);
  cs.eta_u = structure.eta_of(cs.image, cs.u);
  auto ab = type_at(structure, cs.image, forced);
  cs.alpha = ab.first;
  cs.beta = ab.second;
  cs.speed2 = cs.pushed.dot(cs.g2 * cs.pushed);

  // Image-curve acceleration: Omegaddot + Gamma^B(Omegadot, Omegadot), with
  // Omegaddot from the map's second derivatives and the geodesic equation.
  Eigen::VectorXd gammaddot = -christoffel_apply(cs.data.gamma_dom, cs.v, cs.v);
  Eigen::VectorXd omegaddot = jac * gammaddot;
  for (int c = 0; c < cs.image.size(); ++c)
    omegaddot[c] += cs.v.dot(cs.data.jet.second[static_cast<std::size_t>(c)] * cs.v);
  cs.accel = omegaddot + christoffel_apply(cs.data.gamma_cod, cs.pushed, cs.pushed);
  return cs;
}

// A_V applied to pi_* W, expressed as a codomain vector:
// g2(A_V pi_*W, sigma_j r_j) = g2(V, sff(W, h_j)).
Eigen::VectorXd shape_apply(const CurveSample& cs, const Eigen::VectorXd& v_dir) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cs.image.size());
  for (int j = 0; j < cs.dec.rank; ++j) {
    Eigen::VectorXd sff = second_fundamental_form(cs.data, cs.w, cs.dec.hker.col(j));
    out += (v_dir.dot(cs.g2 * sff) / cs.dec.singular_values[j]) * cs.dec.range.col(j);
  }
  return out;
}

}  // namespace

std::vector<Thm31Sample> thm31_residuals(const SmoothMapSpec& map,
                                         const ContactStructure& structure,
                                         const GeodesicTrace& gamma,
                                         const TypeOverride& forced_type) {
  require_same_chart(map, structure);
  const auto& samples = gamma.samples;
  if (samples.size() < 3)
    fail(ErrorKind::Invalid, "trace too short for centered differences");

  std::vector<CurveSample> cs;
  cs.reserve(samples.size());
  for (const auto& gs : samples) cs.push_back(build_sample(map, structure, gs, forced_type));

  std::vector<Thm31Sample> out;
  out.reserve(samples.size() - 2);
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const CurveSample& c = cs[i];
    // The stored velocities are affine-parameter derivatives, so the centered
    // differences must be taken in the affine parameter as well.
    double dt = (samples[i + 1].s - samples[i - 1].s) / gamma.initial_speed;
    Eigen::VectorXd dz = (cs[i + 1].z - cs[i - 1].z) / dt;
    Eigen::VectorXd dpsi_piw = (cs[i + 1].psi_piw - cs[i - 1].psi_piw) / dt;
    Eigen::VectorXd dcu = (cs[i + 1].cu - cs[i - 1].cu) / dt;

    Thm31Sample s;
    s.s = samples[i].s;
    s.image_accel = gnorm(c.g2, c.accel);

    // Range equation.
    s.range_terms.push_back({"-A_psiPiW piW", -shape_apply(c, c.psi_piw)});
    s.range_terms.push_back({"-A_CU piW", -shape_apply(c, c.cu)});
    Eigen::VectorXd nabla_w_z = dz + christoffel_apply(c.data.gamma_dom, c.w, c.z);
    s.range_terms.push_back(
        {"pi(H nabla_W Z)",
         c.data.jet.jacobian * project_onto(c.dec.hker, c.g1, nabla_w_z)});
    s.range_terms.push_back(
        {"nabla_U piZ", christoffel_apply(c.data.gamma_cod, c.u, c.piz)});
    s.range_terms.push_back({"eta(U) alpha piW", c.eta_u * c.alpha * c.piw});
    s.range_terms.push_back({"eta(U) beta piZ", c.eta_u * c.beta * c.piz});

    // Complement equation.  The two curve-direction derivatives (along W and
    // along U) add up to the derivative along the full pushed velocity.
    Eigen::VectorXd d_psi =
        dpsi_piw + christoffel_apply(c.data.gamma_cod, c.pushed, c.psi_piw);
    Eigen::VectorXd d_cu = dcu + christoffel_apply(c.data.gamma_cod, c.pushed, c.cu);
    s.perp_terms.push_back({"perp nabla psiPiW", project_onto(c.dec.rperp, c.g2, d_psi)});
    s.perp_terms.push_back({"perp nabla CU", project_onto(c.dec.rperp, c.g2, d_cu)});
    s.perp_terms.push_back({"sff(W,Z)", second_fundamental_form(c.data, c.w, c.z)});
    s.perp_terms.push_back({"-alpha speed2 xi", -c.alpha * c.speed2 * c.xi});
    s.perp_terms.push_back({"eta(U) alpha U", c.eta_u * c.alpha * c.u});
    s.perp_terms.push_back({"eta(U) beta psiPiW", c.eta_u * c.beta * c.psi_piw});
    s.perp_terms.push_back({"eta(U) beta CU", c.eta_u * c.beta * c.cu});

    Eigen::VectorXd rsum = Eigen::VectorXd::Zero(c.image.size());
    for (const auto& t : s.range_terms) rsum += t.value;
    Eigen::VectorXd psum = Eigen::VectorXd::Zero(c.image.size());
    for (const auto& t : s.perp_terms) psum += t.value;
    s.range_residual = gnorm(c.g2, rsum);
    s.perp_residual = gnorm(c.g2, psum);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Thm32Sample> thm32_residual(const SmoothMapSpec& map,
                                        const ContactStructure& structure,
                                        const std::optional<expr::ScalarField>& h,
                                        const ClairautGeodesicTrace& trace,
                                        const CodomainFrames& frames,
                                        const SmoothMapSpec& section,
                                        const TypeOverride& forced_type) {
  require_same_chart(map, structure);
  const ChartManifold& target = *map.codomain;
  if (h && h->dim() != target.dim())
    fail(ErrorKind::DimensionMismatch, "h must be a function of the codomain coordinates");
  if (section.domain->name() != map.codomain->name() ||
      section.codomain->name() != map.domain->name())
    fail(ErrorKind::Invalid, "section must map the codomain chart back into the domain chart");
  const auto& samples = trace.base.samples;
  if (samples.size() < 3)
    fail(ErrorKind::Invalid, "trace too short for centered differences");

  // First pass: codomain-side values along the trace.
  const std::size_t n = samples.size();
  std::vector<double> hval(n, 0.0);
  std::vector<Eigen::VectorXd> rho(n), u(n), psi_rho(n), cu(n), psi_u(n);
  std::vector<Eigen::VectorXd> rho_coords(n), bu_coords(n);
  std::vector<Eigen::MatrixXd> g2(n);
  std::vector<double> eta_u(n), alpha(n), beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& smp = samples[i];
    g2[i] = target.metric(smp.point);
    double speed = gnorm(g2[i], smp.velocity);
    if (speed <= 0.0) fail(ErrorKind::Invalid, "zero velocity along the trace");
    Eigen::MatrixXd rframe = eval_frame(frames.range, smp.point, g2[i]);
    Eigen::MatrixXd pframe = eval_frame(frames.perp, smp.point, g2[i]);
    rho[i] = project_onto(rframe, g2[i], smp.velocity);
    u[i] = project_onto(pframe, g2[i], smp.velocity);
    if (gnorm(g2[i], rho[i] + u[i] - smp.velocity) > kSpanTol * speed)
      fail(ErrorKind::RankDeficient,
           "declared frames do not span the tangent space along the trace");
    Eigen::MatrixXd psi = structure.psi_at(smp.point);
    psi_rho[i] = psi * rho[i];
    psi_u[i] = psi * u[i];
    Eigen::VectorXd bu = project_onto(rframe, g2[i], psi_u[i]);
    cu[i] = psi_u[i] - bu;
    rho_coords[i] = rframe.transpose() * (g2[i] * rho[i]);
    bu_coords[i] = rframe.transpose() * (g2[i] * bu);
    eta_u[i] = structure.eta_of(smp.point, u[i]);
    auto ab = type_at(structure, smp.point, forced_type);
    alpha[i] = ab.first;
    beta[i] = ab.second;
    hval[i] = h ? h->eval(smp.point) : 0.0;
  }

  std::vector<Thm32Sample> out;
  out.reserve(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto& smp = samples[i];
    // Same convention as the equivalence residuals: differences in the affine
    // parameter, matching the stored velocities.
    double dt = (samples[i + 1].s - samples[i - 1].s) / trace.base.initial_speed;
    Thm32Sample s;
    s.s = smp.s;
    double dh = h ? (hval[i + 1] - hval[i - 1]) / dt : 0.0;
    s.lhs = rho[i].dot(g2[i] * rho[i]) * dh;

    // Map-side data at the fiber point over the trace sample.
    Eigen::VectorXd p = section.apply(smp.point);
    if (!map.domain->domain().contains(p))
      fail(ErrorKind::ImageOutsideDomain, "section left the domain chart");
    MapPointData data = map_point_data(map, p);
    FrameDecomposition dec = decompose(map, p);
    Eigen::VectorXd image = data.jet.image;
    Eigen::MatrixXd g2p = target.metric(image);
    Eigen::MatrixXd rframe_p = eval_frame(frames.range, image, g2p);
    if (dec.rank > 0 &&
        max_principal_angle(rframe_p, dec.range, g2p) > kFrameMismatchTol)
      fail(ErrorKind::Invalid,
           "declared range frames disagree with the computed decomposition at the fiber point");

    // Transport the velocity components through the declared frame
    // coordinates and lift them at the fiber point.
    Eigen::VectorXd piw_p = rframe_p * rho_coords[i];
    Eigen::VectorXd piz_p = rframe_p * bu_coords[i];
    Eigen::VectorXd w = horizontal_lift(data.jet, dec, g2p, piw_p, "the range part");
    Eigen::VectorXd z = horizontal_lift(data.jet, dec, g2p, piz_p, "the B-part");

    Eigen::MatrixXd psi_p = structure.psi_at(image);
    Eigen::VectorXd sff_wz = second_fundamental_form(data, w, z);
    double shape_term = (psi_p * piw_p).dot(g2p * sff_wz);

    Eigen::VectorXd dpsi_rho = (psi_rho[i + 1] - psi_rho[i - 1]) / dt;
    auto gamma_b = christoffel(target, smp.point);
    Eigen::VectorXd d_psi = dpsi_rho + christoffel_apply(gamma_b, smp.velocity, psi_rho[i]);
    Eigen::MatrixXd pframe = eval_frame(frames.perp, smp.point, g2[i]);
    double perp_term = -project_onto(pframe, g2[i], d_psi).dot(g2[i] * cu[i]);

    Eigen::MatrixXd g1p = map.domain->metric(p);
    double alpha_term = -eta_u[i] * alpha[i] * w.dot(g1p * z);
    double beta_term = -eta_u[i] * beta[i] * psi_u[i].dot(g2[i] * psi_u[i]);

    s.rhs_terms.push_back({"shape term", shape_term});
    s.rhs_terms.push_back({"perp nabla psiPiW vs CU", perp_term});
    s.rhs_terms.push_back({"eta(U) alpha g1(W,Z)", alpha_term});
    s.rhs_terms.push_back({"eta(U) beta psiU2", beta_term});
    double rhs = shape_term + perp_term + alpha_term + beta_term;
    s.residual = std::abs(s.lhs - rhs);
    out.push_back(std::move(s));
  }
  return out;
}

RangeDistributionReport range_distribution_checks(const SmoothMapSpec& map,
                                                  const ContactStructure& structure,
                                                  const std::optional<expr::ScalarField>& h,
                                                  const CodomainFrames& frames,
                                                  const std::vector<Eigen::VectorXd>& points,
                                                  double tol) {
  require_same_chart(map, structure);
  if (points.empty()) fail(ErrorKind::Invalid, "no points supplied");
  if (h && h->dim() != map.codomain->dim())
    fail(ErrorKind::DimensionMismatch, "h must be a function of the codomain coordinates");
  RangeDistributionReport rep;
  rep.tol = tol;

  FrameDecomposition first = decompose(map, points.front());
  rep.range_dim = first.rank;
  if (first.rank <= 1) {
    rep.vacuous = true;
    rep.gradient_pass = true;
    rep.minimal_pass = true;
    return rep;
  }

  for (const auto& p : points) {
    FrameDecomposition dec = decompose(map, p);
    if (dec.rank != rep.range_dim)
      fail(ErrorKind::Invalid, "map rank changes across the sample points");
    Eigen::VectorXd b = map.apply(p);
    Eigen::MatrixXd g2 = map.codomain->metric(b);
    Eigen::MatrixXd psi = structure.psi_at(b);
    Eigen::VectorXd grad = raise_gradient(h, g2, b);
    for (int i = 0; i < dec.rank; ++i)
      rep.gradient_pairing =
          std::max(rep.gradient_pairing, std::abs(grad.dot(g2 * (psi * dec.range.col(i)))));

    // Mean curvature of the range distribution from the declared frame
    // fields: H = (1/r) sum_ij Ginv_ij P_perp(nabla_{F_i} F_j).
    if (static_cast<int>(frames.range.size()) != dec.rank)
      fail(ErrorKind::DimensionMismatch,
           "declared range frame count does not match the map rank");
    Eigen::MatrixXd rframe = eval_frame(frames.range, b, g2);
    if (max_principal_angle(rframe, dec.range, g2) > kFrameMismatchTol)
      fail(ErrorKind::Invalid,
           "declared range frames disagree with the computed decomposition");
    const auto r = static_cast<Eigen::Index>(frames.range.size());
    Eigen::MatrixXd raw(b.size(), r);
    for (Eigen::Index i = 0; i < r; ++i)
      raw.col(i) = frames.range[static_cast<std::size_t>(i)].eval(b);
    Eigen::MatrixXd gram = raw.transpose() * g2 * raw;
    Eigen::MatrixXd ginv = gram.llt().solve(Eigen::MatrixXd::Identity(r, r));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(b.size());
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::VectorXd cd = covariant_derivative_vector(
            *map.codomain, frames.range[static_cast<std::size_t>(j)], raw.col(i), b);
        mean += ginv(i, j) * project_onto(dec.rperp, g2, cd);
      }
    mean /= static_cast<double>(r);
    rep.range_mean_curvature = std::max(rep.range_mean_curvature, gnorm(g2, mean));
  }
  rep.gradient_pass = rep.gradient_pairing < tol;
  rep.minimal_pass = rep.range_mean_curvature < tol;
  return rep;
}

// ============================================================================
// Distribution integrability
// ============================================================================

IntegrabilityReport integrability_check(const ChartManifold& chart,
                                        const std::vector<VectorFieldSpec>& frames,
                                        const std::vector<VectorFieldSpec>& complement,
                                        const std::vector<Eigen::VectorXd>& points,
                                        double tol) {
  if (frames.size() < 2)
    fail(ErrorKind::Invalid, "integrability needs at least two frame fields");
  if (points.empty()) fail(ErrorKind::Invalid, "no points supplied");
  IntegrabilityReport rep;
  rep.tol = tol;
  for (const auto& p : points) {
    Eigen::MatrixXd g = chart.metric(p);
    Eigen::MatrixXd cols(p.size(), static_cast<Eigen::Index>(frames.size()));
    for (std::size_t i = 0; i < frames.size(); ++i)
      cols.col(static_cast<Eigen::Index>(i)) = frames[i].eval(p);
    orthonormalize(cols, g);  // throws RankDeficient on a Gram deficiency
    for (std::size_t i = 0; i < frames.size(); ++i)
      for (std::size_t j = i + 1; j < frames.size(); ++j) {
        Eigen::VectorXd br = lie_bracket(frames[i], frames[j], p);
        for (const auto& ncomp : complement)
          rep.residual = std::max(rep.residual, std::abs(br.dot(g * ncomp.eval(p))));
      }
  }
  rep.integrable = rep.residual < tol;
  return rep;
}

}  // namespace rmap
