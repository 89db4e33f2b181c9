#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rmap/chart.hpp"
#include "rmap/clairaut.hpp"
#include "rmap/contact.hpp"
#include "rmap/smooth_map.hpp"

namespace rmap {

inline constexpr const char* kToolkitVersion = "0.1.0";

// ============================================================================
// Manifest
// ============================================================================

// Evaluation points for a check: an explicit list, or a seeded uniform draw
// from the relevant chart's box (exclusions respected).  Without an explicit
// seed the draw is derived from the run seed and the check's position.
struct PointsSpec {
  std::vector<Eigen::VectorXd> points;
  int random_n = 0;
  std::optional<std::uint64_t> random_seed;
};

// Per-type check parameters, resolved against the manifest's objects at load
// time.  Pointers refer into the owning Manifest and stay valid for its
// lifetime.
struct AlmostContactCheck {
  const ContactStructure* structure = nullptr;
  PointsSpec points;
  bool expect_pass = true;  // false documents a structure that violates the axioms
};

struct EstimateTypeCheck {
  const ContactStructure* structure = nullptr;
  PointsSpec points;
  // Expected (alpha, beta) as expressions of the chart coordinates.
  std::optional<std::pair<expr::ScalarField, expr::ScalarField>> expect;
};

struct TransSasakianCheck {
  const ContactStructure* structure = nullptr;
  PointsSpec points;
  // Explicit (alpha, beta) expressions; fall back to the structure's declared
  // type, then to a pointwise least-squares estimate.
  std::optional<std::pair<expr::ScalarField, expr::ScalarField>> type;
};

struct RiemannianMapCheck {
  const SmoothMapSpec* map = nullptr;
  PointsSpec points;
  std::optional<int> expect_rank;
  std::vector<Eigen::VectorXd> expect_kernel;  // coordinate spanning set
  double kernel_tol = 1e-8;
};

struct SffCheck {
  const SmoothMapSpec* map = nullptr;
  PointsSpec points;
  // Expected value of sff(W, W) for the unit horizontal frame vector, as
  // codomain-coordinate expressions evaluated at the image point.  Empty
  // means expect zero over all horizontal frame pairs.
  std::vector<expr::ScalarField> expect;
};

struct ShapeOperatorCheck {
  const SmoothMapSpec* map = nullptr;
  PointsSpec points;
  std::vector<expr::ScalarField> vector_field;              // codomain components
  std::vector<std::vector<expr::ScalarField>> expect;       // rank x rank entries
};

struct UmbilicalCheck {
  const SmoothMapSpec* map = nullptr;
  PointsSpec points;
  std::optional<expr::ScalarField> h;  // codomain function; absent fits a constant
  bool expect_satisfied = true;
};

struct AntiInvarianceCheck {
  const SmoothMapSpec* map = nullptr;
  const ContactStructure* structure = nullptr;
  PointsSpec points;
  std::optional<ReebPosition> expect_reeb;
};

struct HarmonicityCheck {
  const SmoothMapSpec* map = nullptr;
  PointsSpec points;
  bool expect_harmonic = true;
};

struct FrameMatchCheck {
  const SmoothMapSpec* map = nullptr;
  CodomainFrames frames;
  PointsSpec points;
};

struct ClairautGeodesicCheck {
  const SmoothMapSpec* map = nullptr;
  const ContactStructure* structure = nullptr;
  CodomainFrames frames;
  std::optional<expr::ScalarField> h;
  std::optional<SmoothMapSpec> section;  // codomain -> domain, enables the
                                         // umbilical side of the check
  std::vector<ClairautStart> starts;
  double length = 1.0;
  double step = 1e-3;
  bool expect_conserved = true;
};

struct Thm31Check {
  const SmoothMapSpec* map = nullptr;
  const ContactStructure* structure = nullptr;
  Eigen::VectorXd start;     // domain geodesic data
  Eigen::VectorXd velocity;
  double length = 1.0;
  double step = 1e-3;
  bool expect_geodesic = true;  // of the image curve
};

struct Thm32Check {
  const SmoothMapSpec* map = nullptr;
  const ContactStructure* structure = nullptr;
  CodomainFrames frames;
  std::optional<expr::ScalarField> h;
  SmoothMapSpec section;
  std::vector<ClairautStart> starts;
  double length = 1.0;
  double step = 1e-3;
};

struct RangeDistributionCheck {
  const SmoothMapSpec* map = nullptr;
  const ContactStructure* structure = nullptr;
  CodomainFrames frames;
  std::optional<expr::ScalarField> h;
  PointsSpec points;
};

struct IntegrabilityCheck {
  const ChartManifold* manifold = nullptr;
  std::vector<VectorFieldSpec> frames;
  std::vector<VectorFieldSpec> complement;
  PointsSpec points;
  bool expect_integrable = true;
};

using CheckParams =
    std::variant<AlmostContactCheck, EstimateTypeCheck, TransSasakianCheck, RiemannianMapCheck,
                 SffCheck, ShapeOperatorCheck, UmbilicalCheck, AntiInvarianceCheck,
                 HarmonicityCheck, FrameMatchCheck, ClairautGeodesicCheck, Thm31Check, Thm32Check,
                 RangeDistributionCheck, IntegrabilityCheck>;

struct CheckSpec {
  std::string name;
  std::string type;            // manifest keyword, echoed into the report
  std::optional<double> tol;   // falls back to the run's default tolerance
  CheckParams params;
};

// A parsed manifest.  Charts, structures and maps are heap-allocated so the
// resolved pointers inside the checks survive moves of the Manifest itself.
struct Manifest {
  struct NamedStructure {
    std::string name;
    std::unique_ptr<ContactStructure> value;
  };
  struct NamedMap {
    std::string name;
    std::unique_ptr<SmoothMapSpec> value;
  };
  struct FrameSet {
    std::string name;
    const ChartManifold* manifold = nullptr;
    std::vector<VectorFieldSpec> fields;
  };

  std::vector<std::unique_ptr<ChartManifold>> manifolds;
  std::vector<NamedStructure> structures;
  std::vector<NamedMap> maps;
  std::vector<FrameSet> frames;
  std::vector<CheckSpec> checks;

  const ChartManifold* find_manifold(const std::string& name) const;
  const ContactStructure* find_structure(const std::string& name) const;
  const SmoothMapSpec* find_map(const std::string& name) const;
  const FrameSet* find_frames(const std::string& name) const;
};

// Parses and validates a manifest.  Throws Error with kind Parse (malformed
// text or expression, with the offending section in the message),
// UnresolvedReference (named object missing, message quotes the name) or
// DimensionMismatch.
Manifest load_manifest(const std::string& path);
Manifest parse_manifest(const std::string& text, const std::string& source = "<manifest>");

// ============================================================================
// Check runner and report
// ============================================================================

enum class CheckStatus { Pass, Fail, Vacuous, Error };

const char* to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  std::string type;
  CheckStatus status = CheckStatus::Error;
  std::vector<std::pair<std::string, double>> residuals;               // labelled
  std::vector<std::pair<std::string, std::vector<double>>> artifacts;  // trace summaries
  std::string error;  // message when status == Error
};

struct Report {
  std::string toolkit_version;
  std::uint64_t seed = 0;
  double elapsed_seconds = 0.0;
  std::vector<CheckResult> checks;

  // 0 when every check passes (vacuous counts as a pass), 1 when any check
  // fails, 2 when any check errored.
  int exit_code() const;
};

// Runs every check in manifest order.  A check that throws is reported with
// status error and the run continues.  Results are deterministic for a fixed
// seed; checks without their own tolerance use default_tol.
Report run_checks(const Manifest& m, std::uint64_t seed, double default_tol = 1e-8);

// Byte-stable JSON (insertion-ordered keys, reals at 17 significant digits;
// elapsed time is omitted so repeated runs compare equal) and a plain-text
// summary table.
std::string emit_report_json(const Report& r);
std::string emit_report_text(const Report& r);

// CSV trace of a codomain geodesic with the angle and conserved-quantity
// columns.  The declared frames, structure and h are taken from the first
// clairaut or rate-of-change check bound to the named map.
std::string geodesic_csv(const Manifest& m, const std::string& map_name,
                         const Eigen::VectorXd& start, const Eigen::VectorXd& velocity,
                         double length, double step);

}  // namespace rmap
