#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rmap/chart.hpp"

namespace rmap {

// A smooth map between charts, components given as expressions of the domain
// coordinates.
struct SmoothMapSpec {
  const ChartManifold* domain = nullptr;
  const ChartManifold* codomain = nullptr;
  std::vector<expr::ScalarField> components;

  static SmoothMapSpec parse(const ChartManifold& domain, const ChartManifold& codomain,
                             const std::vector<std::string>& comps);

  Eigen::VectorXd apply(const Eigen::VectorXd& p) const;
};

// Value, Jacobian and second derivatives of the map at a point.  Throws
// ImageOutsideDomain when pi(p) leaves the codomain chart.
struct MapJet {
  Eigen::VectorXd point;
  Eigen::VectorXd image;
  Eigen::MatrixXd jacobian;               // b x m
  std::vector<Eigen::MatrixXd> second;    // per codomain component, m x m
};

MapJet map_jet(const SmoothMapSpec& map, const Eigen::VectorXd& p);

// Orthogonal splitting of both tangent spaces induced by the map at a point:
// ker pi_* and its g1-complement in TM, range pi_* and its g2-complement in TB.
// Columns of each block are metric-orthonormal frames.  Computed from the SVD
// of the metrically whitened Jacobian G2^{1/2} J G1^{-1/2}; singular values
// below rank_rtol * sigma_max count as kernel, and values within a decade of
// the threshold are surfaced as warnings.
struct FrameDecomposition {
  int rank = 0;
  Eigen::MatrixXd ker;    // m x (m - rank)
  Eigen::MatrixXd hker;   // m x rank
  Eigen::MatrixXd range;  // b x rank
  Eigen::MatrixXd rperp;  // b x (b - rank)
  Eigen::VectorXd singular_values;  // all min(m, b) whitened values, descending
  std::vector<std::string> warnings;
};

FrameDecomposition decompose(const SmoothMapSpec& map, const Eigen::VectorXd& p,
                             double rank_rtol = 1e-8);

// max over horizontal frame pairs of |g2(pi_* W, pi_* Z) - g1(W, Z)|.
double isometry_residual(const SmoothMapSpec& map, const Eigen::VectorXd& p);

// Second-order data of the map at a point: jet plus connection coefficients
// of both charts, enough to evaluate the second fundamental form.
struct MapPointData {
  MapJet jet;
  std::vector<Eigen::MatrixXd> gamma_dom;  // at p
  std::vector<Eigen::MatrixXd> gamma_cod;  // at pi(p)
};

MapPointData map_point_data(const SmoothMapSpec& map, const Eigen::VectorXd& p);

// (nabla pi_*)(W, Z) in codomain coordinates for fixed tangent vectors W, Z
// at p (constant-coefficient extensions):
//   W^i Z^j (d_i d_j pi^c - Gamma^k_ij d_k pi^c + Gamma^c_ab d_i pi^a d_j pi^b).
Eigen::VectorXd second_fundamental_form(const MapPointData& data, const Eigen::VectorXd& w,
                                        const Eigen::VectorXd& z);

// max over horizontal pairs (W, Z) and range directions R of
// |g2((nabla pi_*)(W, Z), R)|; vanishes for Riemannian maps.
double lemma21_residual(const SmoothMapSpec& map, const Eigen::VectorXd& p);

// Shape operator A_V in the orthonormal range basis of `frames`:
//   g2(A_V pi_* W, pi_* Z) = g2(V, (nabla pi_*)(W, Z)).
// V must be g2-orthogonal to the range (relative residual < 1e-9), else
// NonOrthogonal is thrown.
Eigen::MatrixXd shape_operator(const SmoothMapSpec& map, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& v);

// Least-squares fit of (nabla pi_*)(W, Z) = g1(W, Z) H2 over the horizontal
// frame pairs; H2 is constrained to the range complement.
struct UmbilicalFit {
  Eigen::VectorXd h2;      // codomain vector
  double residual = 0.0;   // RMS g2 misfit over frame pairs
  double sff_scale = 0.0;  // largest ||sff(W,Z)|| seen, for relative reporting
};

UmbilicalFit umbilical_fit(const SmoothMapSpec& map, const Eigen::VectorXd& p);

enum class Distribution { Vertical, Horizontal };

// Mean curvature vector of ker pi_* (projected horizontally) or of the
// horizontal distribution (projected vertically), with constant-coefficient
// frame extensions.  Throws EmptyDistribution when the frame is empty.
Eigen::VectorXd mean_curvature(const SmoothMapSpec& map, const Eigen::VectorXd& p,
                               Distribution which);

// Tension field diagnostics at each point:
//   tension = trace_g1 (nabla pi_*) over a full orthonormal frame of TM,
//   rho_v   = vertical mean curvature,
//   residual = ||tension + q pi_*(rho_v)||_g2 (the trace identity; equals the
//              horizontal trace of the second fundamental form).
struct HarmonicityReport {
  double tension_norm = 0.0;       // max over points
  double pushed_vertical = 0.0;    // max ||pi_*(rho_v)||
  double trace_residual = 0.0;     // max ||tension + q pi_*(rho_v)||
  bool harmonic = false;
  double tol = 0.0;
};

HarmonicityReport harmonicity_report(const SmoothMapSpec& map,
                                     const std::vector<Eigen::VectorXd>& points, double tol);

}  // namespace rmap
