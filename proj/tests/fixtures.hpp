#pragma once

// Shared chart/structure constructions used across the test suites.  All
// values here were derived by hand from the closed-form metrics and verified
// against the finite-difference oracles in oracles.hpp.

#include <memory>

#include "rmap/chart.hpp"

namespace fixtures {

using rmap::ChartManifold;
using rmap::DomainSpec;

inline Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

inline Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Flat Euclidean plane.
inline ChartManifold plane() {
  return ChartManifold("plane", {"x", "y"}, DomainSpec::box(vec2(-10, -10), vec2(10, 10)),
                       {"1", "0", "0", "1"});
}

// Euclidean plane in polar coordinates, r bounded away from the singular axis.
inline ChartManifold polar() {
  return ChartManifold("polar", {"r", "th"}, DomainSpec::box(vec2(0.2, -4), vec2(6, 4)),
                       {"1", "0", "0", "r^2"});
}

// Unit sphere chart (theta polar angle, phi azimuth), away from the poles.
inline ChartManifold sphere() {
  return ChartManifold("sphere", {"th", "ph"}, DomainSpec::box(vec2(0.3, -3), vec2(2.8, 3)),
                       {"1", "0", "0", "sin(th)^2"});
}

// Three-space with the quarter-scaled shear metric carrying the unit-Sasakian
// structure (psi, xi = 2 d/dw, eta = (dw - v du)/2).
inline ChartManifold sasakian_target(bool exclude_w0 = false) {
  DomainSpec dom = DomainSpec::box(vec3(-3, -3, -3), vec3(3, 3, 3));
  if (exclude_w0) dom.exclusions.push_back({2, 0.0});
  return ChartManifold("B", {"u", "v", "w"}, dom,
                       {"(1+v^2)/4", "0", "-v/4",
                        "0", "1/4", "0",
                        "-v/4", "0", "1/4"});
}

// Source of the rank-one map onto the Sasakian target: R^3 with a constant
// shear metric.
inline ChartManifold shear_source() {
  return ChartManifold("M", {"x", "y", "z"}, DomainSpec::box(vec3(-3, -3, -3), vec3(3, 3, 3)),
                       {"3/8", "1/8", "0",
                        "1/8", "3/8", "0",
                        "0", "0", "1/4"});
}

// Warped-product target e^{2w}(du^2 + dv^2) + eta (x) eta with eta = dw - v du;
// carries a type (e^{-2w}/2, 1) structure.  v = 0 is excluded because the
// associated h expressions divide by v.
inline ChartManifold warped_target() {
  DomainSpec dom = DomainSpec::box(vec3(-2, 0.25, -1.25), vec3(2, 2.5, 1.25));
  return ChartManifold("B", {"u", "v", "w"}, dom,
                       {"exp(2*w)+v^2", "0", "-v",
                        "0", "exp(2*w)", "0",
                        "-v", "0", "1"});
}

// Flat source for the rank-one map onto the warped target.
inline ChartManifold flat3() {
  return ChartManifold("M", {"x", "y", "z"}, DomainSpec::box(vec3(-3, -3, -3), vec3(3, 3, 3)),
                       {"1", "0", "0", "0", "1", "0", "0", "0", "1"});
}

// Flat R^3 with the product (cosymplectic) structure, type (0, 0).
inline ChartManifold cosymplectic3() {
  return ChartManifold("C", {"u", "v", "w"}, DomainSpec::box(vec3(-3, -3, -3), vec3(3, 3, 3)),
                       {"1", "0", "0", "0", "1", "0", "0", "0", "1"});
}

}  // namespace fixtures
