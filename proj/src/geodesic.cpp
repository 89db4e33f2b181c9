#include "rmap/geodesic.hpp"

#include <cmath>

#include "rmap/error.hpp"
#include "rmap/geometry.hpp"

namespace rmap {

namespace {

constexpr double kSpeedDriftAbort = 1e-3;
constexpr double kExclusionMargin = 1e-9;

struct State {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
};

State deriv(const ChartManifold& chart, const State& s) {
  std::vector<Eigen::MatrixXd> gamma = christoffel(chart, s.x);
  State d;
  d.x = s.v;
  d.v = -christoffel_apply(gamma, s.v, s.v);
  return d;
}

State step_rk4(const ChartManifold& chart, const State& s, double h) {
  State k1 = deriv(chart, s);
  State k2 = deriv(chart, {s.x + 0.5 * h * k1.x, s.v + 0.5 * h * k1.v});
  State k3 = deriv(chart, {s.x + 0.5 * h * k2.x, s.v + 0.5 * h * k2.v});
  State k4 = deriv(chart, {s.x + h * k3.x, s.v + h * k3.v});
  State out;
  out.x = s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.v = s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  return out;
}

}  // namespace

GeodesicTrace integrate_geodesic(const ChartManifold& chart, const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& velocity, double length, double step,
                                 GeodesicTrace* partial) {
  if (start.size() != chart.dim() || velocity.size() != chart.dim())
    fail(ErrorKind::DimensionMismatch, "geodesic start/velocity dimension mismatch");
  if (!(length > 0.0) || !(step > 0.0))
    fail(ErrorKind::Invalid, "geodesic length and step must be positive");
  if (!chart.domain().contains(start, kExclusionMargin))
    fail(ErrorKind::DomainExit, "geodesic start lies outside the domain of '" + chart.name() + "'");

  GeodesicTrace trace;
  double speed0 = chart.norm(start, velocity);
  if (!(speed0 > 0.0)) fail(ErrorKind::Invalid, "geodesic initial velocity has zero norm");
  trace.initial_speed = speed0;

  // Integrate in the affine parameter t; arclength is s = t * speed0, so a
  // `step` of arclength corresponds to dt = step / speed0.
  const double t_end = length / speed0;
  const double dt = step / speed0;
  const int steps = static_cast<int>(std::ceil(length / step - 1e-12));
  State s{start, velocity};
  trace.samples.push_back({0.0, s.x, s.v, speed0});

  double t = 0.0;
  for (int i = 0; i < steps; ++i) {
    double h = std::min(dt, t_end - t);
    if (h <= 0.0) break;
    State next = step_rk4(chart, s, h);
    t += h;
    if (!chart.domain().contains(next.x, kExclusionMargin)) {
      if (partial) *partial = trace;
      fail(ErrorKind::DomainExit,
           "geodesic on '" + chart.name() + "' left the domain near arclength " +
               std::to_string(trace.samples.back().s));
    }
    double speed = chart.norm(next.x, next.v);
    double drift = std::abs(speed - speed0) / speed0;
    trace.max_speed_drift = std::max(trace.max_speed_drift, drift);
    trace.samples.push_back({t * speed0, next.x, next.v, speed});
    if (drift > kSpeedDriftAbort) {
      if (partial) *partial = trace;
      fail(ErrorKind::StepTooLarge,
           "geodesic speed drifted by " + std::to_string(drift) +
               " (step too large for '" + chart.name() + "')");
    }
    s = next;
  }
  return trace;
}

}  // namespace rmap
