#pragma once

#include <Eigen/Core>
#include <vector>

#include "rmap/chart.hpp"

namespace rmap {

struct GeodesicSample {
  double s = 0.0;  // arclength parameter
  Eigen::VectorXd point;
  Eigen::VectorXd velocity;
  double speed = 0.0;  // g-norm of the velocity, tracked for drift checks
};

struct GeodesicTrace {
  std::vector<GeodesicSample> samples;
  double initial_speed = 0.0;
  double max_speed_drift = 0.0;  // max |speed - initial| / initial
};

// Fixed-step RK4 integration of x' = v, v'^k = -Gamma^k_ij v^i v^j.
//
// Aborts with DomainExit when a step leaves the chart domain (the error
// message carries the last valid arclength; the partial trace is available
// through the `partial` out-parameter when given) and with StepTooLarge when
// the relative speed drift exceeds 1e-3.
GeodesicTrace integrate_geodesic(const ChartManifold& chart, const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& velocity, double length, double step,
                                 GeodesicTrace* partial = nullptr);

}  // namespace rmap
