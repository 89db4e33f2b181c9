#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmap/contact.hpp"
#include "rmap/geodesic.hpp"
#include "rmap/smooth_map.hpp"

namespace rmap {

// ============================================================================
// Anti-invariance and the B/C split
// ============================================================================

enum class ReebPosition { Vertical, Horizontal, Mixed };

// Splitting of the range complement at one image point:
//   (range pi_*)perp = psi(range pi_*) (+) mu.
// Carries the frames and tensors needed by bc_split and the theorem
// evaluators, all evaluated at `image`.
struct AntiInvariantSplit {
  bool is_anti_invariant = false;
  double residual = 0.0;             // max ||P_range psi R||_g2 over range frame
  Eigen::MatrixXd psi_range_frame;   // orthonormal basis of psi(range pi_*)
  Eigen::MatrixXd mu_frame;          // complement of psi(range) inside rperp
  ReebPosition reeb_position = ReebPosition::Mixed;
  double reeb_vertical_norm = 0.0;   // ||P_range xi||_g2
  double reeb_horizontal_norm = 0.0; // ||P_rperp xi||_g2
  double tol = 0.0;

  Eigen::VectorXd image;             // pi(p)
  Eigen::MatrixXd g2;                // codomain metric at image
  Eigen::MatrixXd psi;               // structure tensor at image
  FrameDecomposition frames;         // pointwise splitting at p
};

// Checks psi(range pi_*) c (range pi_*)perp at the image of p and classifies
// the Reeb field position by its g2-projections (component norm ratio 1e-6;
// mixed is reported explicitly).  Throws Invalid when the structure does not
// live on the codomain chart.
AntiInvariantSplit anti_invariance_check(const SmoothMapSpec& map,
                                         const ContactStructure& structure,
                                         const Eigen::VectorXd& p, double tol);

// Orthogonal resolution psi V = BV + CV of a range-complement vector: BV is
// the g2-projection of psi V onto range pi_*, CV the remainder.  V must be
// g2-orthogonal to the range (relative overlap < 1e-9), else NonOrthogonal.
std::pair<Eigen::VectorXd, Eigen::VectorXd> bc_split(const AntiInvariantSplit& split,
                                                     const Eigen::VectorXd& v);

// ============================================================================
// Declared codomain frames
// ============================================================================

// range pi_* is only defined along the image of the map, so codomain-side
// checks need the range and its complement declared as closed-form frame
// fields on the codomain.  The declared spans are cross-validated against the
// pointwise decomposition at image points.
struct CodomainFrames {
  std::vector<VectorFieldSpec> range;
  std::vector<VectorFieldSpec> perp;
};

// Largest principal angle between the declared spans at pi(p) and the
// computed range/rperp frames there.  Throws DimensionMismatch when the
// declared counts do not match the rank splitting.
double declared_frame_mismatch(const SmoothMapSpec& map, const CodomainFrames& frames,
                               const Eigen::VectorXd& p);

// ============================================================================
// Clairaut verification along geodesics (Definitions 2.1 and 2.2)
// ============================================================================

struct ClairautStart {
  Eigen::VectorXd point;     // on the codomain
  Eigen::VectorXd velocity;
};

struct ClairautGeodesicTrace {
  GeodesicTrace base;                // geodesic of g2 on the codomain
  std::vector<double> theta;         // angle between the velocity and its
                                     // range-complement part, per sample
  std::vector<double> invariant;     // e^{h(Omega(s))} sin(theta(s))
  bool h_fitted = false;             // true when h was fitted as a constant
  double drift = 0.0;                // max |invariant - invariant_0| / |invariant_0|
  double tol = 0.0;
  bool pass = false;                 // drift < tol

  // Umbilical side (evaluated when a section is supplied): the fiber point
  // section(Omega(s)) feeds the umbilical fit, and the gradient residual is
  // ||H2 + grad h||_g2 at the corresponding image point.
  bool def22_checked = false;
  double umbilical_residual = 0.0;   // max fit residual over checked samples
  double gradient_residual = 0.0;    // max ||H2 + grad h||_g2
};

// Integrates a codomain geodesic per start and tracks the Clairaut invariant
// e^{h} sin(theta), with cos(theta) = ||U|| / ||velocity|| for U the
// declared-perp part of the velocity.  h empty means fit-constant mode: the
// conservation of sin(theta) alone is tested.  The optional section (a map
// from the codomain chart back into the domain chart) enables the independent
// umbilical check.  Throws DomainExit/StepTooLarge from the integrator,
// Invalid on a zero velocity sample, and RankDeficient when the declared
// frames fail to span the tangent space along the trace.
std::vector<ClairautGeodesicTrace> clairaut_geodesic_check(
    const SmoothMapSpec& map, const ContactStructure& structure,
    const std::optional<expr::ScalarField>& h, const CodomainFrames& frames,
    const std::optional<SmoothMapSpec>& section, const std::vector<ClairautStart>& starts,
    double length, double step, double tol);

// Pointwise umbilical certificate: umbilical fit residual and
// ||H2 + grad h||_g2 over domain points (h empty fits a constant, making the
// gradient side ||H2||).  Both residuals must clear tol for `satisfied`.
struct UmbilicalGradientReport {
  double umbilical_residual = 0.0;  // max over points
  double gradient_residual = 0.0;   // max ||H2 + grad h||_g2
  double h2_norm = 0.0;             // max ||H2||_g2, reported for both sides
  double grad_norm = 0.0;           // max ||grad h||_g2
  bool satisfied = false;
  double tol = 0.0;
};

UmbilicalGradientReport umbilical_gradient_check(const SmoothMapSpec& map,
                                                 const std::optional<expr::ScalarField>& h,
                                                 const std::vector<Eigen::VectorXd>& points,
                                                 double tol);

// ============================================================================
// Theorem residual evaluators
// ============================================================================

// One labeled summand of a residual equation, kept separate so parameter
// slices ((alpha,0), (0,beta), (0,0)) can be checked term by term.
struct LabeledVector {
  std::string label;
  Eigen::VectorXd value;
};

struct LabeledScalar {
  std::string label;
  double value = 0.0;
};

// Forces the structure type functions to fixed constants; used for the
// corollary parameter slices.
using TypeOverride = std::optional<std::pair<double, double>>;

// Geodesic-image characterisation residuals at one trace sample: the curve
// Omega = pi o gamma is a codomain geodesic iff both labeled sums vanish.
// Derivatives of along-curve fields use centered differences over the dense
// trace; directional derivatives transverse to the curve use the connection
// term with constant-coefficient extensions, matching the convention in
// mean_curvature.
struct Thm31Sample {
  double s = 0.0;
  double range_residual = 0.0;  // g2-norm of the range-equation sum
  double perp_residual = 0.0;   // g2-norm of the complement-equation sum
  double image_accel = 0.0;     // ||nabla_{Omegadot} Omegadot||_g2
  std::vector<LabeledVector> range_terms;
  std::vector<LabeledVector> perp_terms;
};

// Evaluates both characterisation equations along the image of a certified
// domain geodesic.  Interior samples only (the first and last sample carry no
// centered difference).  Throws Invalid when the perp part of the pushed
// velocity cannot be lifted back through the Jacobian (projection residual
// above 1e-8).
std::vector<Thm31Sample> thm31_residuals(const SmoothMapSpec& map,
                                         const ContactStructure& structure,
                                         const GeodesicTrace& gamma,
                                         const TypeOverride& forced_type = std::nullopt);

// Rate-of-change identity along a Clairaut trace:
//   g2(piW, piW) d(h o Omega)/ds = shape term - perp-derivative term
//                                  - eta(U)[alpha g1(W,Z) + beta ||psi U||^2].
// LHS by centered differences of h along the trace; map-side data (shape
// term, g1(W,Z)) is evaluated at the fiber point section(Omega(s)).
struct Thm32Sample {
  double s = 0.0;
  double lhs = 0.0;
  std::vector<LabeledScalar> rhs_terms;
  double residual = 0.0;  // |lhs - sum of rhs|
};

std::vector<Thm32Sample> thm32_residual(const SmoothMapSpec& map,
                                        const ContactStructure& structure,
                                        const std::optional<expr::ScalarField>& h,
                                        const ClairautGeodesicTrace& trace,
                                        const CodomainFrames& frames,
                                        const SmoothMapSpec& section,
                                        const TypeOverride& forced_type = std::nullopt);

// Dichotomy and minimality of the range distribution.  For a rank-1 map both
// checks are vacuous (the dichotomy is satisfied by the dimension branch);
// otherwise reports max |g2(grad h, psi R)| over the range frame and the
// g2-norm of the range distribution's mean curvature, built from the declared
// frame fields.
struct RangeDistributionReport {
  int range_dim = 0;
  bool vacuous = false;
  double gradient_pairing = 0.0;      // max |g2(grad h, psi R)|
  double range_mean_curvature = 0.0;  // max over points
  bool gradient_pass = false;
  bool minimal_pass = false;
  double tol = 0.0;
};

RangeDistributionReport range_distribution_checks(const SmoothMapSpec& map,
                                                  const ContactStructure& structure,
                                                  const std::optional<expr::ScalarField>& h,
                                                  const CodomainFrames& frames,
                                                  const std::vector<Eigen::VectorXd>& points,
                                                  double tol);

// ============================================================================
// Distribution integrability
// ============================================================================

// Frobenius check: max over points, frame pairs (X, Y) and complement vectors
// N of |g([X, Y], N)|.  The frames must span the claimed distribution at every
// point (Gram deficiency throws RankDeficient).
struct IntegrabilityReport {
  double residual = 0.0;
  bool integrable = false;
  double tol = 0.0;
};

IntegrabilityReport integrability_check(const ChartManifold& chart,
                                        const std::vector<VectorFieldSpec>& frames,
                                        const std::vector<VectorFieldSpec>& complement,
                                        const std::vector<Eigen::VectorXd>& points, double tol);

}  // namespace rmap
