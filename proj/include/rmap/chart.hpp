#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rmap/expr.hpp"
#include "rmap/rng.hpp"

namespace rmap {

// Coordinate box with optional excluded hyperplanes {coord == value}.  The
// box is open at infinite ends and closed at finite ones; exclusions carve
// out singular slices like w == 0.
struct DomainSpec {
  struct Exclusion {
    int coord = 0;
    double value = 0.0;
  };

  Eigen::VectorXd lo;  // -inf allowed
  Eigen::VectorXd hi;  // +inf allowed
  std::vector<Exclusion> exclusions;

  static DomainSpec unbounded(int dim);
  static DomainSpec box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  int dim() const { return static_cast<int>(lo.size()); }
  bool finite() const;

  // margin keeps points away from excluded hyperplanes.
  bool contains(const Eigen::VectorXd& p, double margin = 0.0) const;

  // Rejection-samples a point at least `margin` from every exclusion.
  Eigen::VectorXd sample(Rng& rng, double margin = 1e-3) const;
};

// A single chart of a manifold: named coordinates, a domain, and the metric
// given entrywise as expressions of the coordinates.  Construction parses and
// validates; evaluation helpers are all per-point.
class ChartManifold {
 public:
  ChartManifold() = default;

  // metric entries are row-major dim x dim expression strings.  Symmetry and
  // positive-definiteness are checked on `validation_samples` random domain
  // points (with the given seed) at construction.
  ChartManifold(std::string name, std::vector<std::string> coords, DomainSpec domain,
                const std::vector<std::string>& metric_entries,
                std::uint64_t validation_seed = 0, int validation_samples = 50);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const std::vector<std::string>& coords() const { return coords_; }
  const DomainSpec& domain() const { return domain_; }

  expr::ScalarField parse_field(const std::string& text) const;

  Eigen::MatrixXd metric(const Eigen::VectorXd& p) const;

  // Metric with first derivatives: dg[k](i,j) = d g_ij / d x^k.
  struct MetricJet {
    Eigen::MatrixXd g;
    std::vector<Eigen::MatrixXd> dg;
  };
  MetricJet metric_jet(const Eigen::VectorXd& p) const;

  double inner(const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& p, const Eigen::VectorXd& a) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  DomainSpec domain_;
  std::vector<expr::ScalarField> metric_;  // row-major
  int dim_ = 0;
};

// A vector field with components given as expressions of the chart coords.
struct VectorFieldSpec {
  std::vector<expr::ScalarField> components;

  static VectorFieldSpec parse(const ChartManifold& chart, const std::vector<std::string>& comps);
  static VectorFieldSpec constant(const Eigen::VectorXd& v, int dim);

  int dim() const { return static_cast<int>(components.size()); }
  Eigen::VectorXd eval(const Eigen::VectorXd& p) const;

  // value + Jacobian J(i,j) = d V^i / d x^j
  struct Jet {
    Eigen::VectorXd value;
    Eigen::MatrixXd jacobian;
  };
  Jet jet(const Eigen::VectorXd& p) const;
};

}  // namespace rmap
